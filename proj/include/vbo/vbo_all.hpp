#pragma once

// Umbrella header.

#include "vbo/bench/objectives.hpp"
#include "vbo/core/adam.hpp"
#include "vbo/core/checkpoint.hpp"
#include "vbo/core/matrix.hpp"
#include "vbo/core/rng.hpp"
#include "vbo/core/tensor.hpp"
#include "vbo/flops/model.hpp"
#include "vbo/gp/gp.hpp"
#include "vbo/harness/config.hpp"
#include "vbo/harness/harness.hpp"
#include "vbo/mi/dv.hpp"
#include "vbo/mi/estimator.hpp"
#include "vbo/nets/networks.hpp"
#include "vbo/nets/params.hpp"
#include "vbo/opt/history.hpp"
#include "vbo/opt/runners.hpp"
#include "vbo/opt/vbo.hpp"
