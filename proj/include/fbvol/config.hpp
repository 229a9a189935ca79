#pragma once

// Experiment configuration files.
//
// One `key = value` pair per line; `#` starts a comment. Values are JSON
// literals (numbers, strings, arrays). Units: times in years, rates and
// drifts per year, volatilities per sqrt(year). Example:
//
//   model = "fb"
//   Q     = [[-7, 4, 3], [2, -4, 2], [3, 5, -8]]
//   mu    = [1, 0, -2]
//   sigma = [0.10, 0.15, 0.25]
//   T     = 1
//   n     = 250
//   seed  = 42

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fbvol/error.hpp"
#include "fbvol/filters.hpp"
#include "fbvol/models.hpp"
#include "fbvol/params.hpp"
#include "fbvol/portfolio.hpp"
#include "fbvol/stylized.hpp"

namespace fbvol {

struct ExperimentConfig {
  ExperimentConfig() : params(RateMatrix(Matrix::Zero(1, 1)), Vector::Zero(1), Vector::Ones(1)), grid(1.0, 1) {}

  ModelKind model = ModelKind::Fb;
  RegimeParams params;
  Grid grid;
  std::uint64_t seed = 1;
  int replications = 100;
  std::optional<int> initial_state;  ///< 0-based; unset means Y_0 ~ nu

  int window = 0;  ///< detector window; 0 selects default_detector_window(n)
  int bins = 50;
  int max_lag = 20;
  AcfTransform transform = AcfTransform::Square;
  int leverage_window = 20;

  std::vector<int> n_values{64, 256, 1024, 4096};
  int fine_n = 16384;

  std::optional<Clamp> clamp = Clamp{0.0, 1.0};
  double x0 = 1.0;

  std::optional<double> mse_time;                          ///< enables the MSE check in `stylized`
  std::optional<std::pair<double, double>> autocov_times;  ///< enables the autocovariance in `stylized`

  nlohmann::json canonical;  ///< the parsed key/value pairs, for hashing and echoing

  int effective_window() const { return window > 0 ? window : default_detector_window(grid.steps()); }
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"model", "Q", "mu", "sigma", "sigma0", "T", "n", "seed", "replications", "initial_state",
                                          "prior", "window", "bins", "max_lag", "transform", "leverage_window", "n_values", "fine_n",
                                          "clamp", "x0", "mse_time", "autocov_times"};
  return keys;
}

inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Reads `key = value` lines into a JSON object. Parse errors carry
/// `origin:line` context.
inline nlohmann::json parse_key_values(const std::string& text, const std::string& origin, nlohmann::json into = nlohmann::json::object()) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Config, where + ": expected `key = value`");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) fail(ErrorKind::Config, where + ": missing key");
    if (!detail::known_keys().count(key)) fail(ErrorKind::Config, where + ": unknown key `" + key + "`");
    try {
      into[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      // Bare words are accepted as strings: model = fb
      if (value.find_first_of("[]{},\"") == std::string::npos && !value.empty()) {
        into[key] = value;
      } else {
        fail(ErrorKind::Config, where + ": field `" + key + "`: cannot parse value `" + value + "`");
      }
    }
  }
  return into;
}

/// Validates a key/value object; every violated invariant is reported at once.
inline ExperimentConfig build_config(const nlohmann::json& kv) {
  std::vector<std::string> errors;
  auto err = [&](const std::string& field, const std::string& msg) { errors.push_back("field `" + field + "`: " + msg); };

  auto get_number = [&](const char* key, double fallback) -> double {
    if (!kv.contains(key)) return fallback;
    if (!kv[key].is_number()) {
      err(key, "expected a number");
      return fallback;
    }
    return kv[key].get<double>();
  };
  auto get_int = [&](const char* key, long long fallback) -> long long {
    if (!kv.contains(key)) return fallback;
    if (!kv[key].is_number_integer()) {
      err(key, "expected an integer");
      return fallback;
    }
    return kv[key].get<long long>();
  };
  auto get_vector = [&](const char* key) -> std::optional<Vector> {
    if (!kv.contains(key)) return std::nullopt;
    const auto& v = kv[key];
    if (!v.is_array() || v.empty()) {
      err(key, "expected a non-empty array of numbers");
      return std::nullopt;
    }
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        err(key, "entry " + std::to_string(i + 1) + " is not a number");
        return std::nullopt;
      }
      out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
  };

  // Rate matrix
  std::optional<Matrix> q;
  if (!kv.contains("Q")) {
    err("Q", "required");
  } else if (!kv["Q"].is_array() || kv["Q"].empty()) {
    err("Q", "expected an array of rows");
  } else {
    const auto& rows = kv["Q"];
    const std::size_t d = rows.size();
    Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    bool ok = true;
    for (std::size_t i = 0; i < d && ok; ++i) {
      if (!rows[i].is_array() || rows[i].size() != d) {
        err("Q", "row " + std::to_string(i + 1) + " must have " + std::to_string(d) + " numbers");
        ok = false;
        break;
      }
      for (std::size_t j = 0; j < d; ++j) {
        if (!rows[i][j].is_number()) {
          err("Q", "row " + std::to_string(i + 1) + " entry " + std::to_string(j + 1) + " is not a number");
          ok = false;
          break;
        }
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
      }
    }
    if (ok) {
      for (const auto& problem : rate_matrix_violations(m)) err("Q", problem);
      q = m;
    }
  }

  const auto mu = get_vector("mu");
  if (!kv.contains("mu")) err("mu", "required");
  const auto sigma = get_vector("sigma");
  if (!kv.contains("sigma")) err("sigma", "required");
  std::optional<double> sigma0;
  if (kv.contains("sigma0")) sigma0 = get_number("sigma0", 0.0);

  const double horizon = get_number("T", 1.0);
  const long long steps = get_int("n", 250);
  if (!(horizon > 0.0)) err("T", "must be > 0");
  if (steps < 1) err("n", "must be >= 1");

  ModelKind model = ModelKind::Fb;
  if (kv.contains("model")) {
    const auto parsed = kv["model"].is_string() ? parse_model_kind(kv["model"].get<std::string>()) : std::nullopt;
    if (!parsed) err("model", "expected one of hmm, msm, fb");
    else model = *parsed;
  }

  const long long seed = get_int("seed", 1);
  if (seed < 0) err("seed", "must be >= 0");
  const long long reps = get_int("replications", 100);
  if (reps < 1) err("replications", "must be >= 1");

  std::optional<int> initial_state;
  if (kv.contains("initial_state")) {
    const long long s = get_int("initial_state", 1);
    if (q && (s < 1 || s > q->rows())) err("initial_state", "must be a state index in 1..d");
    else initial_state = static_cast<int>(s - 1);
  }
  if (kv.contains("prior")) {
    if (!kv["prior"].is_string() || kv["prior"].get<std::string>() != "stationary") err("prior", "only \"stationary\" is supported");
  }

  ExperimentConfig cfg;
  cfg.model = model;
  cfg.seed = static_cast<std::uint64_t>(std::max<long long>(seed, 0));
  cfg.replications = static_cast<int>(reps);
  cfg.initial_state = initial_state;

  cfg.window = static_cast<int>(get_int("window", 0));
  if (cfg.window < 0) err("window", "must be >= 1 (or 0 for the default)");
  cfg.bins = static_cast<int>(get_int("bins", 50));
  if (cfg.bins < 1) err("bins", "must be >= 1");
  cfg.max_lag = static_cast<int>(get_int("max_lag", 20));
  if (cfg.max_lag < 1) err("max_lag", "must be >= 1");
  cfg.leverage_window = static_cast<int>(get_int("leverage_window", 20));
  if (cfg.leverage_window < 1) err("leverage_window", "must be >= 1");
  if (kv.contains("transform")) {
    const auto t = kv["transform"].is_string() ? parse_transform(kv["transform"].get<std::string>()) : std::nullopt;
    if (!t) err("transform", "expected one of identity, abs, square, sign");
    else cfg.transform = *t;
  }

  if (kv.contains("n_values")) {
    cfg.n_values.clear();
    const auto& v = kv["n_values"];
    if (!v.is_array() || v.empty()) {
      err("n_values", "expected a non-empty array of integers");
    } else {
      for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<long long>() < 1) err("n_values", "entries must be positive integers");
        else cfg.n_values.push_back(e.get<int>());
      }
    }
  }
  cfg.fine_n = static_cast<int>(get_int("fine_n", 16384));
  if (cfg.fine_n < 1) err("fine_n", "must be >= 1");
  for (int n : cfg.n_values) {
    if (cfg.fine_n >= 1 && cfg.fine_n % n != 0) err("n_values", "fine_n = " + std::to_string(cfg.fine_n) + " is not divisible by " + std::to_string(n));
  }

  if (kv.contains("clamp")) {
    const auto& c = kv["clamp"];
    if (c.is_string() && c.get<std::string>() == "none") {
      cfg.clamp.reset();
    } else if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number() && c[0].get<double>() <= c[1].get<double>()) {
      cfg.clamp = Clamp{c[0].get<double>(), c[1].get<double>()};
    } else {
      err("clamp", "expected [lo, hi] with lo <= hi, or \"none\"");
    }
  }
  cfg.x0 = get_number("x0", 1.0);
  if (!(cfg.x0 > 0.0)) err("x0", "must be > 0");

  if (kv.contains("mse_time")) cfg.mse_time = get_number("mse_time", 0.0);
  if (kv.contains("autocov_times")) {
    const auto& a = kv["autocov_times"];
    if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) cfg.autocov_times = std::pair{a[0].get<double>(), a[1].get<double>()};
    else err("autocov_times", "expected [t, s]");
  }

  // Cross-field checks need the scalar fields above to be sane.
  if (q && mu && mu->size() != q->rows()) err("mu", "has " + std::to_string(mu->size()) + " entries, Q has dimension " + std::to_string(q->rows()));
  if (q && sigma && sigma->size() != q->rows()) err("sigma", "has " + std::to_string(sigma->size()) + " entries, Q has dimension " + std::to_string(q->rows()));
  if (sigma) {
    for (Eigen::Index i = 0; i < sigma->size(); ++i) {
      if (!((*sigma)(i) > 0.0)) err("sigma", "entry " + std::to_string(i + 1) + " must be > 0");
    }
  }
  if (sigma0 && !(*sigma0 > 0.0)) err("sigma0", "must be > 0");
  if (q && horizon > 0.0 && steps >= 1 && errors.empty()) {
    const double c = horizon / static_cast<double>(steps) * (-q->diagonal()).maxCoeff();
    if (!(c < 1.0)) err("n", "stability requires dt * max(-Q_ii) < 1, got " + std::to_string(c));
    const double cf = horizon / static_cast<double>(cfg.fine_n) * (-q->diagonal()).maxCoeff();
    if (!(cf < 1.0)) err("fine_n", "stability requires dt * max(-Q_ii) < 1 on the fine grid, got " + std::to_string(cf));
  }

  if (!errors.empty()) {
    std::string msg = "invalid config: " + errors.front();
    for (std::size_t i = 1; i < errors.size(); ++i) msg += "; " + errors[i];
    fail(ErrorKind::Config, msg);
  }

  cfg.params = RegimeParams(RateMatrix(*q), *mu, *sigma, sigma0);
  cfg.grid = Grid(horizon, static_cast<int>(steps));
  cfg.canonical = kv;
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  return build_config(parse_key_values(text, origin));
}

/// Reads a config file and applies `overrides` (each `key = value`) on top.
inline ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file `" + path + "`");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json kv = parse_key_values(buf.str(), path);
  for (std::size_t i = 0; i < overrides.size(); ++i) kv = parse_key_values(overrides[i], "--set#" + std::to_string(i + 1), kv);
  return build_config(kv);
}

/// 64-bit FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Fully resolved configuration including defaults, as JSON.
inline nlohmann::json resolved_config(const ExperimentConfig& cfg) {
  nlohmann::json j;
  const Matrix& q = cfg.params.q().matrix();
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < q.cols(); ++k) row.push_back(q(i, k));
    rows.push_back(row);
  }
  auto vec = [](const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  j["model"] = to_string(cfg.model);
  j["Q"] = rows;
  j["mu"] = vec(cfg.params.mu());
  j["sigma"] = vec(cfg.params.sigma());
  j["sigma0"] = cfg.params.hmm_volatility();
  j["T"] = cfg.grid.horizon();
  j["n"] = cfg.grid.steps();
  j["seed"] = cfg.seed;
  j["replications"] = cfg.replications;
  j["initial_state"] = cfg.initial_state ? nlohmann::json(*cfg.initial_state + 1) : nlohmann::json("stationary");
  j["prior"] = "stationary";
  j["window"] = cfg.effective_window();
  j["bins"] = cfg.bins;
  j["max_lag"] = cfg.max_lag;
  j["transform"] = to_string(cfg.transform);
  j["leverage_window"] = cfg.leverage_window;
  j["n_values"] = cfg.n_values;
  j["fine_n"] = cfg.fine_n;
  j["clamp"] = cfg.clamp ? nlohmann::json::array({cfg.clamp->lo, cfg.clamp->hi}) : nlohmann::json("none");
  j["x0"] = cfg.x0;
  if (cfg.mse_time) j["mse_time"] = *cfg.mse_time;
  if (cfg.autocov_times) j["autocov_times"] = {cfg.autocov_times->first, cfg.autocov_times->second};
  return j;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << std::hex << fnv1a64(resolved_config(cfg).dump());
  return os.str();
}

}  // namespace fbvol
