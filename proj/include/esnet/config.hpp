#pragma once

// Run configuration shared by the CLI subcommands: defaults < preset <
// config file < command-line flags. The key=value file format rejects
// unknown keys; render_config round-trips every value at full precision.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "esnet/errors.hpp"

namespace esnet {

struct RunConfig {
  // grid / PDE
  int dims = 1;
  int n = 256;
  double epsilon = 0.01;
  double t_end = 5.0;
  // reference solver
  double rtol = 1e-3;
  double atol = 1e-6;
  bool dealias = true;
  // dataset
  std::uint64_t count = 1120;
  std::uint64_t seed = 7;
  double train_fraction = 0.7;
  // model
  std::string kind = "estable-g";
  int blocks = 4;
  int kernel = 21;
  std::string channels = "1,16,1,16,1";
  double c_shift = 0.0;
  std::string g_inverse = "identity";
  std::string init = "xavier-uniform";
  // training
  double lr0 = 1e-3;
  double weight_decay = 1e-6;
  int batch_size = 16;
  int epochs = 1000;
  int halve_every = 50;
  int restart_every = 200;
  double beta = 0.0;
  int eval_every = 1;
  int energy_check_every = 0;
  // execution
  int workers = 1;
  bool deterministic = false;
  // diagnostics
  std::uint64_t samples = 256;
  // paths
  std::string dataset = "";
  std::string checkpoint = "";
  std::string out_dir = "out";
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline long long parse_ll(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    unsigned long long r = std::stoull(v, &pos);
    if (pos != v.size() || (!v.empty() && v[0] == '-')) throw std::invalid_argument("bad");
    return r;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' expects a nonnegative integer, got '" + v + "'");
  }
}

inline double parse_f64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' expects a real number, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::string f64_str(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct ConfigEntry {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

inline const std::vector<ConfigEntry>& config_entries() {
  static const std::vector<ConfigEntry> entries = [] {
    std::vector<ConfigEntry> e;
    auto add_int = [&](const char* k, int RunConfig::*f) {
      e.push_back({k, [f](const RunConfig& c) { return std::to_string(c.*f); },
                   [f, k](RunConfig& c, const std::string& v) { c.*f = int(parse_ll(k, v)); }});
    };
    auto add_u64 = [&](const char* k, std::uint64_t RunConfig::*f) {
      e.push_back({k, [f](const RunConfig& c) { return std::to_string(c.*f); },
                   [f, k](RunConfig& c, const std::string& v) { c.*f = parse_u64(k, v); }});
    };
    auto add_f64 = [&](const char* k, double RunConfig::*f) {
      e.push_back({k, [f](const RunConfig& c) { return f64_str(c.*f); },
                   [f, k](RunConfig& c, const std::string& v) { c.*f = parse_f64(k, v); }});
    };
    auto add_bool = [&](const char* k, bool RunConfig::*f) {
      e.push_back({k, [f](const RunConfig& c) { return c.*f ? "true" : "false"; },
                   [f, k](RunConfig& c, const std::string& v) { c.*f = parse_bool(k, v); }});
    };
    auto add_str = [&](const char* k, std::string RunConfig::*f) {
      e.push_back({k, [f](const RunConfig& c) { return c.*f; },
                   [f](RunConfig& c, const std::string& v) { c.*f = v; }});
    };
    add_int("dims", &RunConfig::dims);
    add_int("n", &RunConfig::n);
    add_f64("epsilon", &RunConfig::epsilon);
    add_f64("t_end", &RunConfig::t_end);
    add_f64("rtol", &RunConfig::rtol);
    add_f64("atol", &RunConfig::atol);
    add_bool("dealias", &RunConfig::dealias);
    add_u64("count", &RunConfig::count);
    add_u64("seed", &RunConfig::seed);
    add_f64("train_fraction", &RunConfig::train_fraction);
    add_str("kind", &RunConfig::kind);
    add_int("blocks", &RunConfig::blocks);
    add_int("kernel", &RunConfig::kernel);
    add_str("channels", &RunConfig::channels);
    add_f64("c_shift", &RunConfig::c_shift);
    add_str("g_inverse", &RunConfig::g_inverse);
    add_str("init", &RunConfig::init);
    add_f64("lr0", &RunConfig::lr0);
    add_f64("weight_decay", &RunConfig::weight_decay);
    add_int("batch_size", &RunConfig::batch_size);
    add_int("epochs", &RunConfig::epochs);
    add_int("halve_every", &RunConfig::halve_every);
    add_int("restart_every", &RunConfig::restart_every);
    add_f64("beta", &RunConfig::beta);
    add_int("eval_every", &RunConfig::eval_every);
    add_int("energy_check_every", &RunConfig::energy_check_every);
    add_int("workers", &RunConfig::workers);
    add_bool("deterministic", &RunConfig::deterministic);
    add_u64("samples", &RunConfig::samples);
    add_str("dataset", &RunConfig::dataset);
    add_str("checkpoint", &RunConfig::checkpoint);
    add_str("out_dir", &RunConfig::out_dir);
    return e;
  }();
  return entries;
}

}  // namespace detail

inline void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : detail::config_entries())
    if (key == e.key) {
      e.set(cfg, value);
      return;
    }
  throw UsageError("config: unknown key '" + key + "'");
}

// key = value lines; '#' starts a comment; blank lines ignored
inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("config: cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config: " + path + ":" + std::to_string(lineno) +
                       ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw UsageError("config: " + path + ":" + std::to_string(lineno) + ": empty key");
    set_config_key(cfg, key, value);
  }
}

// The two experiment presets from the study this reproduces.
inline void apply_preset(RunConfig& cfg, const std::string& name) {
  if (name == "ac1d") {
    cfg.dims = 1;
    cfg.n = 256;
    cfg.epsilon = 0.01;
    cfg.t_end = 5.0;
    cfg.count = 1120;
    cfg.train_fraction = 0.7;  // 784 train / 336 test
    cfg.blocks = 4;
    cfg.kernel = 21;
    cfg.channels = "1,16,1,16,1";
    cfg.lr0 = 1e-3;
    cfg.weight_decay = 1e-6;
    cfg.batch_size = 16;
    cfg.epochs = 1000;
    cfg.halve_every = 50;
    cfg.restart_every = 200;
    cfg.init = "xavier-uniform";
  } else if (name == "ac2d") {
    cfg.dims = 2;
    cfg.n = 128;
    cfg.epsilon = 0.02;
    cfg.t_end = 5.0;
    cfg.count = 2528;
    cfg.train_fraction = 2048.0 / 2528.0;  // 2048 train / 480 test
    cfg.blocks = 5;
    cfg.kernel = 13;
    cfg.channels = "1,16,1,16,1";
    cfg.lr0 = 1e-3;
    cfg.weight_decay = 1e-7;
    cfg.batch_size = 32;
    cfg.epochs = 4000;
    cfg.halve_every = 100;
    cfg.restart_every = 800;
    cfg.init = "kaiming-uniform";
  } else {
    throw UsageError("unknown preset '" + name + "' (ac1d | ac2d)");
  }
}

inline std::string render_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : detail::config_entries()) {
    out += e.key;
    out += " = ";
    out += e.get(cfg);
    out += '\n';
  }
  return out;
}

inline std::vector<int> parse_channels(const std::string& spec) {
  std::vector<int> out;
  std::string cur;
  std::istringstream is(spec);
  while (std::getline(is, cur, ',')) {
    cur = detail::trim(cur);
    if (cur.empty()) throw UsageError("channels: empty entry in '" + spec + "'");
    out.push_back(int(detail::parse_ll("channels", cur)));
  }
  if (out.size() < 2) throw UsageError("channels: need at least two entries, got '" + spec + "'");
  return out;
}

}  // namespace esnet
