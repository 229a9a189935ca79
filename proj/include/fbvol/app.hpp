#pragma once

// Subcommand drivers behind the `fbvol` command-line tool. Each writes its
// CSV/JSON outputs plus manifest.json into an output directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbvol/compare.hpp"
#include "fbvol/config.hpp"
#include "fbvol/convergence.hpp"
#include "fbvol/filters.hpp"
#include "fbvol/models.hpp"
#include "fbvol/portfolio.hpp"
#include "fbvol/stylized.hpp"

namespace fbvol {

inline constexpr const char* kVersion = "1.0.0";

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Range: return kExitConfig;
    case ErrorKind::Numerical: return kExitNumerical;
    case ErrorKind::Io: return kExitIo;
  }
  return 1;
}

/// Shortest round-trip decimal form; identical inputs give identical text.
inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) fail(ErrorKind::Io, "cannot write `" + path.string() + "`");
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    if (!out_) fail(ErrorKind::Io, "write failed");
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write `" + path.string() + "`");
  out << j.dump(2) << '\n';
}

inline std::vector<std::string> bundle_header(int d) {
  std::vector<std::string> h{"t", "state", "dW", "R"};
  for (int i = 1; i <= d; ++i) h.push_back("Yhat_" + std::to_string(i));
  h.push_back("vol");
  return h;
}

/// PathBundle as CSV: t, state (1-based), dW (0 at t = 0), R, Yhat_1..d, vol.
inline void write_bundle_csv(const std::filesystem::path& path, const PathBundle& b) {
  const int d = static_cast<int>(b.filter.front().size());
  CsvWriter csv(path, bundle_header(d));
  for (std::size_t k = 0; k < b.returns.size(); ++k) {
    std::vector<std::string> cells{fmt_num(b.grid.time(static_cast<int>(k))), std::to_string(b.chain_states[k] + 1),
                                   fmt_num(k == 0 ? 0.0 : b.dW[k - 1]), fmt_num(b.returns[k])};
    for (int i = 0; i < d; ++i) cells.push_back(fmt_num(b.filter[k](i)));
    cells.push_back(fmt_num(b.vol[k]));
    csv.row(cells);
  }
}

/// Rows of a bundle CSV read back: (t, state 0-based, dW, R) per grid point.
struct ReturnSeries {
  std::vector<double> t;
  std::vector<int> states;
  std::vector<double> dW;
  std::vector<double> returns;
};

inline ReturnSeries read_bundle_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open `" + path.string() + "`");
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,state,dW,R", 0) != 0) fail(ErrorKind::Config, path.string() + ": expected a header starting with t,state,dW,R");
  ReturnSeries s;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string c[4];
    for (auto& cell : c) {
      if (!std::getline(cells, cell, ',')) fail(ErrorKind::Config, path.string() + ":" + std::to_string(line_no) + ": too few columns");
    }
    try {
      s.t.push_back(std::stod(c[0]));
      s.states.push_back(std::stoi(c[1]) - 1);
      s.dW.push_back(std::stod(c[2]));
      s.returns.push_back(std::stod(c[3]));
    } catch (const std::exception&) {
      fail(ErrorKind::Config, path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  if (s.returns.size() < 2) fail(ErrorKind::Config, path.string() + ": need at least two rows");
  return s;
}

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::filesystem::path input;        ///< `filter`: bundle CSV to filter instead of simulating
  std::string filter_kind = "auto";   ///< `filter`: hmm | fb | wonham | auto
};

namespace detail {

inline Drivers drivers_for(const ExperimentConfig& cfg, std::uint64_t stream) {
  Rng rng = substream(cfg.seed, stream);
  return simulate_driving_noise(cfg.grid, cfg.params.q(), rng, cfg.initial_state);
}

inline nlohmann::json acf_json(const AcfReport& r) {
  return {{"transform", to_string(r.transform)}, {"lags", r.lags}, {"values", r.values}, {"std_error", r.std_error}};
}

}  // namespace detail

inline std::vector<std::string> run_simulate(const ExperimentConfig& cfg, const RunOptions& opt) {
  const PathBundle b = simulate(cfg.model, cfg.params, cfg.grid, detail::drivers_for(cfg, 0));
  write_bundle_csv(opt.out_dir / "simulate.csv", b);
  return {"simulate.csv"};
}

inline std::vector<std::string> run_filter(const ExperimentConfig& cfg, const RunOptions& opt) {
  PathBundle b;
  if (!opt.input.empty()) {
    const ReturnSeries s = read_bundle_csv(opt.input);
    const int n = static_cast<int>(s.returns.size()) - 1;
    b.grid = Grid(s.t.back(), n);
    b.model = cfg.model;
    b.returns = s.returns;
    b.chain_states = s.states;
    b.dW.assign(s.dW.begin() + 1, s.dW.end());
    for (int st : b.chain_states) {
      if (st < 0 || st >= cfg.params.dim()) fail(ErrorKind::Config, opt.input.string() + ": state column out of range");
    }
  } else {
    b = simulate(cfg.model, cfg.params, cfg.grid, detail::drivers_for(cfg, 0));
  }
  std::string kind = opt.filter_kind;
  if (kind == "auto") kind = cfg.model == ModelKind::Hmm ? "hmm" : "fb";
  const auto incr = b.increments();
  if (kind == "hmm") {
    b.filter = run_hmm_filter(incr, cfg.params, b.grid);
    b.vol.assign(b.returns.size(), cfg.params.hmm_volatility());
  } else if (kind == "wonham") {
    b.filter = run_wonham_filter(incr, cfg.params, b.grid);
    b.vol.assign(b.returns.size(), cfg.params.hmm_volatility());
  } else if (kind == "fb") {
    auto trace = run_fb_filter(incr, cfg.params, b.grid);
    b.filter = std::move(trace.filter);
    b.vol = std::move(trace.vol);
  } else {
    fail(ErrorKind::Config, "unknown filter `" + kind + "` (expected hmm, fb, wonham)");
  }
  write_bundle_csv(opt.out_dir / "filter.csv", b);
  return {"filter.csv"};
}

inline std::vector<std::string> run_detect(const ExperimentConfig& cfg, const RunOptions& opt) {
  const PathBundle b = simulate(cfg.model, cfg.params, cfg.grid, detail::drivers_for(cfg, 0));
  const auto det = qv_state_detector(b.increments(), cfg.params.sigma(), cfg.effective_window(), cfg.grid.dt());
  CsvWriter csv(opt.out_dir / "detect.csv", {"t", "detected_state", "true_state", "realized_vol"});
  for (std::size_t k = 0; k < det.states.size(); ++k) {
    csv.row({fmt_num(cfg.grid.time(static_cast<int>(k + 1))), std::to_string(det.states[k] + 1), std::to_string(b.chain_states[k] + 1),
             fmt_num(det.realized_vol[k])});
  }
  return {"detect.csv"};
}

inline std::vector<std::string> run_portfolio(const ExperimentConfig& cfg, const RunOptions& opt) {
  PortfolioSettings settings{cfg.model, cfg.replications, cfg.x0, cfg.clamp, cfg.seed};
  if (settings.replications < 2) fail(ErrorKind::Config, "field `replications`: portfolio needs at least 2");
  const auto results = expected_log_utility(cfg.params, cfg.grid, standard_rules(cfg.params), settings);
  CsvWriter csv(opt.out_dir / "portfolio.csv", {"strategy", "mean_logX_T", "stderr", "bankrupt_count"});
  for (const auto& r : results) csv.row({r.name, fmt_num(r.mean_log_wealth), fmt_num(r.std_error), std::to_string(r.bankrupt_count)});
  return {"portfolio.csv"};
}

inline std::vector<std::string> run_stylized(const ExperimentConfig& cfg, const RunOptions& opt) {
  const PathBundle b = simulate(cfg.model, cfg.params, cfg.grid, detail::drivers_for(cfg, 0));
  const auto incr = b.increments();

  nlohmann::json report;
  report["model"] = to_string(cfg.model);
  CsvWriter acf_csv(opt.out_dir / "stylized_acf.csv", {"transform", "lag", "acf", "stderr"});
  nlohmann::json acfs = nlohmann::json::array();
  for (AcfTransform t : {AcfTransform::Identity, AcfTransform::Abs, AcfTransform::Square, AcfTransform::Sign}) {
    const AcfReport r = empirical_acf(incr, cfg.max_lag, t);
    for (std::size_t i = 0; i < r.lags.size(); ++i) acf_csv.row({to_string(t), std::to_string(r.lags[i]), fmt_num(r.values[i]), fmt_num(r.std_error[i])});
    if (t == cfg.transform) report["acf"] = detail::acf_json(r);
    acfs.push_back(detail::acf_json(r));
  }
  report["acf_all"] = acfs;

  const DistributionReport dist = distribution_report(incr, cfg.bins);
  report["distribution"] = {{"mean", dist.mean}, {"variance", dist.variance}, {"skewness", dist.skewness}, {"excess_kurtosis", dist.excess_kurtosis}};
  CsvWriter hist_csv(opt.out_dir / "stylized_hist.csv", {"bin_lo", "bin_hi", "count"});
  for (std::size_t i = 0; i < dist.histogram.counts.size(); ++i) {
    hist_csv.row({fmt_num(dist.histogram.edges[i]), fmt_num(dist.histogram.edges[i + 1]), std::to_string(dist.histogram.counts[i])});
  }

  const LeverageReport lev = leverage_proxy(incr, cfg.leverage_window);
  report["leverage"] = {{"window", cfg.leverage_window}, {"correlation", lev.correlation}, {"std_error", lev.std_error}};

  if (cfg.mse_time) {
    const MseReport m = mse_optimality_check(cfg.params, cfg.grid, *cfg.mse_time, cfg.replications, cfg.seed);
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : m.candidates) cands.push_back({{"label", c.label}, {"value", c.value}, {"mse", c.mse}, {"std_error", c.std_error}});
    report["mse_check"] = {{"t", *cfg.mse_time}, {"filter_mse", m.filter_mse}, {"filter_std_error", m.filter_std_error}, {"candidates", cands}, {"holds", m.holds}};
  }
  if (cfg.autocov_times) {
    const auto a = linear_autocovariance(cfg.params, cfg.autocov_times->first, cfg.autocov_times->second, cfg.grid.dt(), cfg.replications, cfg.seed);
    report["autocovariance"] = {{"t", cfg.autocov_times->first}, {"s", cfg.autocov_times->second}, {"drift_term", a.drift_term},
                                {"cross_term", a.cross_term}, {"cross_std_error", a.cross_std_error}, {"mean_term", a.mean_term}, {"total", a.total}};
  }
  write_json(opt.out_dir / "stylized.json", report);
  return {"stylized_acf.csv", "stylized_hist.csv", "stylized.json"};
}

inline std::vector<std::string> run_converge(const ExperimentConfig& cfg, const RunOptions& opt) {
  const ConvergenceReport rep = euler_error_experiment(cfg.params, cfg.n_values, cfg.fine_n, cfg.replications, cfg.grid.horizon(), cfg.seed);
  CsvWriter csv(opt.out_dir / "converge.csv", {"n", "mse", "stderr", "drift_mse", "diff_mse"});
  for (const auto& r : rep.rows) csv.row({std::to_string(r.n), fmt_num(r.mse), fmt_num(r.std_error), fmt_num(r.drift_mse), fmt_num(r.diff_mse)});
  return {"converge.csv"};
}

inline std::vector<std::string> run_compare(const ExperimentConfig& cfg, const RunOptions& opt) {
  CsvWriter summary(opt.out_dir / "compare_summary.csv", {"replication", "hmm_filter_accuracy", "msm_detector_accuracy", "fb_filter_accuracy"});
  for (int r = 0; r < cfg.replications; ++r) {
    const ModelComparison c = compare_models(cfg.params, cfg.grid, detail::drivers_for(cfg, static_cast<std::uint64_t>(r)), cfg.effective_window());
    summary.row({std::to_string(r), fmt_num(c.hmm_filter_accuracy), fmt_num(c.msm_detector_accuracy), fmt_num(c.fb_filter_accuracy)});
    if (r != 0) continue;
    CsvWriter paths(opt.out_dir / "compare_paths.csv", {"t", "state", "dW", "R_hmm", "R_msm", "R_fb", "vol_msm", "vol_fb", "hmm_map_state",
                                                        "msm_detected_state", "fb_map_state"});
    for (std::size_t k = 0; k < c.hmm.returns.size(); ++k) {
      paths.row({fmt_num(cfg.grid.time(static_cast<int>(k))), std::to_string(c.hmm.chain_states[k] + 1), fmt_num(k == 0 ? 0.0 : c.hmm.dW[k - 1]),
                 fmt_num(c.hmm.returns[k]), fmt_num(c.msm.returns[k]), fmt_num(c.fb.returns[k]), fmt_num(c.msm.vol[k]), fmt_num(c.fb.vol[k]),
                 std::to_string(map_state(c.hmm.filter[k]) + 1), k == 0 ? std::string() : std::to_string(c.detector.states[k - 1] + 1),
                 std::to_string(map_state(c.fb.filter[k]) + 1)});
    }
  }
  return {"compare_summary.csv", "compare_paths.csv"};
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate", "filter", "detect", "portfolio", "stylized", "converge", "compare"};
  return names;
}

/// Runs one subcommand and writes manifest.json next to its outputs.
inline void run(const std::string& subcommand, const ExperimentConfig& cfg, const RunOptions& opt) {
  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory `" + opt.out_dir.string() + "`: " + ec.message());

  std::vector<std::string> files;
  if (subcommand == "simulate") files = run_simulate(cfg, opt);
  else if (subcommand == "filter") files = run_filter(cfg, opt);
  else if (subcommand == "detect") files = run_detect(cfg, opt);
  else if (subcommand == "portfolio") files = run_portfolio(cfg, opt);
  else if (subcommand == "stylized") files = run_stylized(cfg, opt);
  else if (subcommand == "converge") files = run_converge(cfg, opt);
  else if (subcommand == "compare") files = run_compare(cfg, opt);
  else fail(ErrorKind::Config, "unknown subcommand `" + subcommand + "`");

  nlohmann::json manifest;
  manifest["subcommand"] = subcommand;
  manifest["config_hash"] = config_hash(cfg);
  manifest["seed"] = cfg.seed;
  manifest["version"] = kVersion;
  manifest["config"] = resolved_config(cfg);
  manifest["files"] = files;
  write_json(opt.out_dir / "manifest.json", manifest);
}

}  // namespace fbvol
