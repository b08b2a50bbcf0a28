#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vbo/gp/gp.hpp"
#include "vbo/opt/runners.hpp"
#include "vbo/opt/vbo.hpp"

namespace vbo {

/// INI-style key/value text with [section] headers, '#' or ';' comments.
/// Keys outside any section belong to the implicit "experiment" section.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline RawConfig parse_config_text(std::istream& in) {
  RawConfig cfg;
  std::string line, section = "experiment";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) + ": unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty section name");
      cfg[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    cfg[section][key] = detail::trim(line.substr(eq + 1));
  }
  return cfg;
}

inline RawConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config_text(in);
}

/// Typed reader over a RawConfig that records which keys were consumed, so
/// unrecognized keys can be reported by name.
class ConfigReader {
 public:
  explicit ConfigReader(RawConfig raw) : raw_(std::move(raw)) {}

  bool has(const std::string& section, const std::string& key) const {
    auto s = raw_.find(section);
    return s != raw_.end() && s->second.count(key) > 0;
  }

  std::string get_string(const std::string& section, const std::string& key, std::string dflt) {
    mark(section, key);
    auto s = raw_.find(section);
    if (s == raw_.end()) return dflt;
    auto k = s->second.find(key);
    return k == s->second.end() ? dflt : k->second;
  }

  long get_int(const std::string& section, const std::string& key, long dflt) {
    const std::string v = get_string(section, key, "");
    if (v.empty()) return dflt;
    size_t pos = 0;
    long out;
    try {
      out = std::stol(v, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("config key " + section + "." + key + ": '" + v + "' is not an integer");
    }
    if (pos != v.size())
      throw std::runtime_error("config key " + section + "." + key + ": '" + v + "' is not an integer");
    return out;
  }

  double get_double(const std::string& section, const std::string& key, double dflt) {
    const std::string v = get_string(section, key, "");
    if (v.empty()) return dflt;
    size_t pos = 0;
    double out;
    try {
      out = std::stod(v, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("config key " + section + "." + key + ": '" + v + "' is not a number");
    }
    if (pos != v.size())
      throw std::runtime_error("config key " + section + "." + key + ": '" + v + "' is not a number");
    return out;
  }

  std::vector<std::string> get_list(const std::string& section, const std::string& key) {
    return detail::split_list(get_string(section, key, ""));
  }

  /// Every key present in the raw text must have been consumed by a getter.
  void reject_unknown_keys() const {
    std::vector<std::string> unknown;
    for (const auto& [section, kv] : raw_)
      for (const auto& [key, _] : kv)
        if (!consumed_.count(section + "." + key)) unknown.push_back(section + "." + key);
    if (!unknown.empty()) {
      std::string msg = "unknown config keys:";
      for (const auto& k : unknown) msg += " " + k;
      throw std::runtime_error(msg);
    }
  }

 private:
  void mark(const std::string& section, const std::string& key) {
    consumed_.insert(section + "." + key);
  }
  RawConfig raw_;
  std::set<std::string> consumed_;
};

/// Fully resolved experiment description; every field has its default filled
/// in so the frozen config copy is self-describing.
struct ExperimentConfig {
  std::string objective = "branin";
  int dim_override = 0;
  double noise_sd = 0.0;
  std::vector<std::string> methods = {"vbo"};
  int n_seeds = 1;
  std::uint64_t base_seed = 0;
  std::string output_dir = "out";
  int jobs = 1;
  VboConfig vbo;
  GpUcbRunConfig gp_ucb;
  RandomSearchConfig random_search;
  std::string sweep_parameter;       // e.g. "vbo.beta"; empty = no sweep
  std::vector<double> sweep_values;
};

namespace detail {

inline ExploitationMode parse_exploitation(const std::string& s) {
  if (s == "reward_head") return ExploitationMode::RewardHead;
  if (s == "batch_mean_constant") return ExploitationMode::BatchMeanConstant;
  if (s == "gp_mean") return ExploitationMode::GpMean;
  throw std::runtime_error("unknown exploitation_mode '" + s + "'");
}
inline ExplorationMode parse_exploration(const std::string& s) {
  if (s == "dv_mi") return ExplorationMode::DvMi;
  if (s == "gp_sigma") return ExplorationMode::GpSigma;
  if (s == "none") return ExplorationMode::None;
  throw std::runtime_error("unknown exploration_mode '" + s + "'");
}
inline PairingMode parse_pairing(const std::string& s) {
  if (s == "all_pairs") return PairingMode::AllPairs;
  if (s == "derangement") return PairingMode::Derangement;
  throw std::runtime_error("unknown pairing '" + s + "'");
}
inline const char* exploitation_name(ExploitationMode m) {
  switch (m) {
    case ExploitationMode::RewardHead: return "reward_head";
    case ExploitationMode::BatchMeanConstant: return "batch_mean_constant";
    case ExploitationMode::GpMean: return "gp_mean";
  }
  return "?";
}
inline const char* exploration_name(ExplorationMode m) {
  switch (m) {
    case ExplorationMode::DvMi: return "dv_mi";
    case ExplorationMode::GpSigma: return "gp_sigma";
    case ExplorationMode::None: return "none";
  }
  return "?";
}
inline const char* pairing_name(PairingMode m) {
  return m == PairingMode::AllPairs ? "all_pairs" : "derangement";
}

inline const std::set<std::string>& known_methods() {
  static const std::set<std::string> m = {"vbo", "gp_ucb", "random", "vbo_gp_exploration",
                                          "vbo_gp_exploitation"};
  return m;
}

}  // namespace detail

inline ExperimentConfig resolve_config(const RawConfig& raw) {
  ConfigReader r(raw);
  ExperimentConfig c;
  c.objective = r.get_string("experiment", "objective", c.objective);
  c.dim_override = static_cast<int>(r.get_int("experiment", "dim", c.dim_override));
  c.noise_sd = r.get_double("experiment", "noise_sd", c.noise_sd);
  if (c.noise_sd < 0.0) throw std::runtime_error("experiment.noise_sd must be >= 0");
  const std::string method = r.get_string("experiment", "method", "");
  const std::vector<std::string> methods = r.get_list("experiment", "methods");
  if (!method.empty() && !methods.empty())
    throw std::runtime_error("set experiment.method or experiment.methods, not both");
  if (!method.empty()) c.methods = {method};
  if (!methods.empty()) c.methods = methods;
  for (const auto& m : c.methods)
    if (!detail::known_methods().count(m)) throw std::runtime_error("unknown method '" + m + "'");
  c.n_seeds = static_cast<int>(r.get_int("experiment", "n_seeds", c.n_seeds));
  if (c.n_seeds < 1) throw std::runtime_error("experiment.n_seeds must be >= 1");
  c.base_seed = static_cast<std::uint64_t>(r.get_int("experiment", "seed", 0));
  c.output_dir = r.get_string("experiment", "output_dir", c.output_dir);
  c.jobs = static_cast<int>(r.get_int("experiment", "jobs", c.jobs));
  if (c.jobs < 1) throw std::runtime_error("experiment.jobs must be >= 1");

  VboConfig& v = c.vbo;
  v.warmup_steps = static_cast<int>(r.get_int("vbo", "warmup_steps", v.warmup_steps));
  v.iterations = static_cast<int>(r.get_int("vbo", "iterations", v.iterations));
  v.k_critic = static_cast<int>(r.get_int("vbo", "k_critic", v.k_critic));
  v.k_action = static_cast<int>(r.get_int("vbo", "k_action", v.k_action));
  v.batch = static_cast<int>(r.get_int("vbo", "batch", v.batch));
  v.beta = r.get_double("vbo", "beta", v.beta);
  v.exploration_sign = static_cast<int>(r.get_int("vbo", "exploration_sign", v.exploration_sign));
  v.lr_action = r.get_double("vbo", "lr_action", v.lr_action);
  v.lr_critic = r.get_double("vbo", "lr_critic", v.lr_critic);
  v.lr_head = r.get_double("vbo", "lr_head", v.lr_head);
  v.exploitation_mode = detail::parse_exploitation(
      r.get_string("vbo", "exploitation_mode", detail::exploitation_name(v.exploitation_mode)));
  v.exploration_mode = detail::parse_exploration(
      r.get_string("vbo", "exploration_mode", detail::exploration_name(v.exploration_mode)));
  v.pairing = detail::parse_pairing(r.get_string("vbo", "pairing", detail::pairing_name(v.pairing)));
  v.critic_window = static_cast<int>(r.get_int("vbo", "critic_window", v.critic_window));
  v.seed_dim = static_cast<int>(r.get_int("vbo", "seed_dim", v.seed_dim));
  v.critic_hidden = static_cast<int>(r.get_int("vbo", "critic_hidden", v.critic_hidden));
  v.head_steps = static_cast<int>(r.get_int("vbo", "head_steps", v.head_steps));
  v.head_batch = static_cast<int>(r.get_int("vbo", "head_batch", v.head_batch));
  v.gp_max_points = static_cast<int>(r.get_int("vbo", "gp_max_points", v.gp_max_points));
  v.gp_hyperfit_every = static_cast<int>(r.get_int("vbo", "gp_hyperfit_every", v.gp_hyperfit_every));
  v.max_evaluations = r.get_int("vbo", "max_evaluations", v.max_evaluations);
  v.validate();

  GpUcbRunConfig& g = c.gp_ucb;
  g.iterations = static_cast<int>(r.get_int("gp_ucb", "iterations", g.iterations));
  g.n_init = static_cast<int>(r.get_int("gp_ucb", "n_init", g.n_init));
  g.batch = static_cast<int>(r.get_int("gp_ucb", "batch", g.batch));
  g.beta = r.get_double("gp_ucb", "beta", g.beta);
  g.hyperfit_every = static_cast<int>(r.get_int("gp_ucb", "hyperfit_every", g.hyperfit_every));
  g.ucb.n_restarts = static_cast<int>(r.get_int("gp_ucb", "n_restarts", g.ucb.n_restarts));
  g.ucb.n_refine_steps = static_cast<int>(r.get_int("gp_ucb", "n_refine_steps", g.ucb.n_refine_steps));
  g.ucb.candidate_pool_size =
      static_cast<int>(r.get_int("gp_ucb", "candidate_pool_size", g.ucb.candidate_pool_size));
  g.validate();

  RandomSearchConfig& rs = c.random_search;
  rs.iterations = static_cast<int>(r.get_int("random", "iterations", v.iterations));
  rs.batch = static_cast<int>(r.get_int("random", "batch", v.batch));

  c.sweep_parameter = r.get_string("sweep", "parameter", "");
  for (const auto& s : r.get_list("sweep", "values")) {
    try {
      c.sweep_values.push_back(std::stod(s));
    } catch (const std::exception&) {
      throw std::runtime_error("sweep.values: '" + s + "' is not a number");
    }
  }

  r.reject_unknown_keys();
  return c;
}

/// Serializes the resolved config with every default filled in.
inline std::string frozen_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "[experiment]\n";
  os << "objective = " << c.objective << "\n";
  os << "dim = " << c.dim_override << "\n";
  os << "noise_sd = " << c.noise_sd << "\n";
  os << "methods = ";
  for (size_t i = 0; i < c.methods.size(); ++i) os << (i ? ", " : "") << c.methods[i];
  os << "\n";
  os << "n_seeds = " << c.n_seeds << "\n";
  os << "seed = " << c.base_seed << "\n";
  os << "output_dir = " << c.output_dir << "\n";
  os << "jobs = " << c.jobs << "\n\n";

  const VboConfig& v = c.vbo;
  os << "[vbo]\n";
  os << "warmup_steps = " << v.warmup_steps << "\n";
  os << "iterations = " << v.iterations << "\n";
  os << "k_critic = " << v.k_critic << "\n";
  os << "k_action = " << v.k_action << "\n";
  os << "batch = " << v.batch << "\n";
  os << "beta = " << v.beta << "\n";
  os << "exploration_sign = " << v.exploration_sign << "\n";
  os << "lr_action = " << v.lr_action << "\n";
  os << "lr_critic = " << v.lr_critic << "\n";
  os << "lr_head = " << v.lr_head << "\n";
  os << "exploitation_mode = " << detail::exploitation_name(v.exploitation_mode) << "\n";
  os << "exploration_mode = " << detail::exploration_name(v.exploration_mode) << "\n";
  os << "pairing = " << detail::pairing_name(v.pairing) << "\n";
  os << "critic_window = " << v.critic_window << "\n";
  os << "seed_dim = " << v.seed_dim << "\n";
  os << "critic_hidden = " << v.critic_hidden << "\n";
  os << "head_steps = " << v.head_steps << "\n";
  os << "head_batch = " << v.head_batch << "\n";
  os << "gp_max_points = " << v.gp_max_points << "\n";
  os << "gp_hyperfit_every = " << v.gp_hyperfit_every << "\n";
  os << "max_evaluations = " << v.max_evaluations << "\n\n";

  const GpUcbRunConfig& g = c.gp_ucb;
  os << "[gp_ucb]\n";
  os << "iterations = " << g.iterations << "\n";
  os << "n_init = " << g.n_init << "\n";
  os << "batch = " << g.batch << "\n";
  os << "beta = " << g.beta << "\n";
  os << "hyperfit_every = " << g.hyperfit_every << "\n";
  os << "n_restarts = " << g.ucb.n_restarts << "\n";
  os << "n_refine_steps = " << g.ucb.n_refine_steps << "\n";
  os << "candidate_pool_size = " << g.ucb.candidate_pool_size << "\n\n";

  os << "[random]\n";
  os << "iterations = " << c.random_search.iterations << "\n";
  os << "batch = " << c.random_search.batch << "\n";

  if (!c.sweep_parameter.empty()) {
    os << "\n[sweep]\n";
    os << "parameter = " << c.sweep_parameter << "\n";
    os << "values = ";
    for (size_t i = 0; i < c.sweep_values.size(); ++i) os << (i ? ", " : "") << c.sweep_values[i];
    os << "\n";
  }
  return os.str();
}

}  // namespace vbo
