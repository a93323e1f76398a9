#include "wbary/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wbary/area_convex.hpp"
#include "wbary/errors.hpp"
#include "wbary/ibp.hpp"
#include "wbary/io.hpp"
#include "wbary/mirror_prox.hpp"
#include "wbary/numerics.hpp"
#include "wbary/oracles_1d.hpp"

namespace wbary {

namespace {

namespace fs = std::filesystem;

struct SolveArgs {
  std::string algo = "mp";
  double eps = 0.05;
  std::optional<std::size_t> max_iters;
  std::string input;
  bool gaussian = false;
  std::uint64_t seed = 0;
  std::string cost = "sqdist";
  bool normalize_cost = false;
  bool normalize_rows = false;
  double reg = 1e-2;
  bool stabilized = false;
  std::string scaling = "derived";
  std::string theta = "exact";
  std::string out_dir = ".";
  std::size_t log_stride = 0;
  bool no_early_exit = false;
  bool no_timing = false;
};

struct Instance {
  BarycenterProblem prob;
  std::optional<Grid1D> grid;
  double cost_scale = 1.0;  // factor applied to raw grid costs
  bool grid_cost = false;   // cost is the squared grid distance
};

Instance build_instance(const SolveArgs& a) {
  std::vector<Histogram> measures;
  std::optional<Grid1D> grid;
  if (a.gaussian) {
    GaussianSuiteSpec spec;
    spec.seed = a.seed;
    GaussianSuite suite = gaussian_suite(spec);
    measures = std::move(suite.measures);
    grid = std::move(suite.grid);
  } else {
    HistogramSet set = load_histograms(a.input, a.normalize_rows);
    const std::size_t n = set.measures.front().size();
    if (set.grid) {
      grid = Grid1D(*set.grid, 2.0);
    } else {
      Vector idx(n);
      for (std::size_t j = 0; j < n; ++j) idx[j] = static_cast<double>(j);
      grid = Grid1D(std::move(idx), 2.0);
    }
    measures = std::move(set.measures);
  }

  // The Gaussian suite is always posed with a unit-sup cost.
  const bool normalize = a.normalize_cost || a.gaussian;
  if (a.cost == "sqdist") {
    CostData raw = grid_cost(*grid, false);
    const double scale = normalize && raw.d_inf > 0.0 ? 1.0 / raw.d_inf : 1.0;
    CostData cost = normalize ? grid_cost(*grid, true) : std::move(raw);
    return Instance{BarycenterProblem(std::move(measures), std::move(cost)), std::move(grid),
                    scale, true};
  }
  if (a.cost.rfind("csv:", 0) == 0) {
    CostData cost = load_cost_csv(a.cost.substr(4));
    if (normalize && cost.d_inf > 0.0) {
      const double inv = 1.0 / cost.d_inf;
      for (double& c : cost.d) c *= inv;
      cost.d_inf = 1.0;
    }
    return Instance{BarycenterProblem(std::move(measures), std::move(cost)), std::nullopt, 1.0,
                    false};
  }
  throw ConfigError("unknown cost specification '" + a.cost + "' (use sqdist or csv:<path>)");
}

RunOptions run_options(const SolveArgs& a, const Instance& inst) {
  RunOptions opts;
  opts.log_stride = a.log_stride;
  opts.early_exit = !a.no_early_exit;
  opts.max_iters = a.max_iters;
  opts.record_time = !a.no_timing;
  if (inst.grid && inst.grid_cost) {
    const Histogram p_star = barycenter_1d_quantile(inst.prob.measures, *inst.grid);
    const auto& measures = inst.prob.measures;
    const Grid1D grid = *inst.grid;
    const double scale = inst.cost_scale;
    opts.bary_observer = [p_star, &measures, grid, scale](std::span<const double> p) {
      return std::optional<double>(optimality_gap(p, p_star.span(), measures, grid, scale));
    };
  }
  return opts;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  body(f);
}

void write_outputs(const fs::path& dir, const RunReport& report) {
  fs::create_directories(dir);
  write_file(dir / "report.csv", [&](std::ostream& o) { write_report_csv(o, report); });
  write_file(dir / "barycenter.csv",
             [&](std::ostream& o) { write_barycenter_csv(o, report.barycenter); });
}

void write_saddle(const fs::path& dir, const Instance& inst, const SaddleResult& res) {
  write_outputs(dir, res.report);
  write_file(dir / "iterates.csv",
             [&](std::ostream& o) { write_iterates(o, inst.prob, res.x, res.y); });
}

int solve_one(const std::string& algo, const SolveArgs& a, const Instance& inst,
              const fs::path& dir, std::ostream& out, std::ostream& err) {
  const RunOptions opts = run_options(a, inst);
  if (algo == "mp") {
    const auto variant = a.scaling == "printed" ? ScalingVariant::printed : ScalingVariant::derived;
    const SaddleResult res = run_mirror_prox(inst.prob, a.eps, variant, opts);
    write_saddle(dir, inst, res);
    out << "mp: iterations " << res.report.iterations_run << ", duality gap "
        << format_double(duality_gap(res.x, res.y, inst.prob)) << '\n';
    return kExitOk;
  }
  if (algo == "de") {
    const auto variant = a.theta == "paper" ? ThetaVariant::paper : ThetaVariant::exact;
    const DEResult res = run_dual_extrapolation(inst.prob, a.eps, variant, opts);
    write_saddle(dir, inst, res.saddle);
    out << "de: outer iterations " << res.saddle.report.iterations_run << ", duality gap "
        << format_double(duality_gap(res.saddle.x, res.saddle.y, inst.prob)) << '\n';
    return kExitOk;
  }
  IBPConfig cfg;
  cfg.reg = a.reg;
  cfg.stabilized = a.stabilized;
  if (a.max_iters) cfg.iters = *a.max_iters;
  RunOptions ibp_opts = opts;
  ibp_opts.max_iters.reset();
  const IBPResult res = ibp_barycenter(inst.prob, cfg, ibp_opts);
  if (res.status == IBPStatus::underflow_degenerate) {
    err << "ibp: status underflow-degenerate at sweep " << res.failed_at << '\n';
    return kExitUnderflow;
  }
  write_outputs(dir, res.report);
  out << "ibp: status " << to_string(res.status) << ", sweeps " << res.report.iterations_run
      << '\n';
  return kExitOk;
}

void add_common(CLI::App* cmd, SolveArgs& a) {
  cmd->add_option("--eps", a.eps, "Target duality gap")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", a.max_iters, "Iteration cap (outer iterations for de)");
  cmd->add_option("--seed", a.seed, "Seed of the Gaussian suite");
  cmd->add_option("--reg", a.reg, "IBP entropic regularization")->check(CLI::PositiveNumber);
  cmd->add_flag("--stabilized", a.stabilized, "Run IBP in the log domain");
  cmd->add_option("--scaling", a.scaling, "Mirror prox step scaling")
      ->check(CLI::IsMember({"printed", "derived"}));
  cmd->add_option("--theta", a.theta, "Regularizer range bound for de")
      ->check(CLI::IsMember({"paper", "exact"}));
  cmd->add_option("--out", a.out_dir, "Output directory");
  cmd->add_option("--log-stride", a.log_stride, "Record every k iterations (0 = N/200)");
  cmd->add_flag("--no-early-exit", a.no_early_exit, "Run the full iteration count");
  cmd->add_flag("--no-timing", a.no_timing, "Write zero elapsed times (byte-reproducible reports)");
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wasserstein barycenters by mirror prox and area-convex dual extrapolation"};
  app.name("wbary");
  app.require_subcommand(1);

  SolveArgs bary;
  auto* cmd_bary = app.add_subcommand("barycenter", "Compute a barycenter with one algorithm");
  cmd_bary->add_option("--algo", bary.algo, "Algorithm")->check(CLI::IsMember({"mp", "de", "ibp"}));
  auto* opt_input = cmd_bary->add_option("--input", bary.input, "CSV with one histogram per row");
  auto* opt_gauss = cmd_bary->add_flag("--gaussian", bary.gaussian, "Use the Gaussian suite");
  opt_input->excludes(opt_gauss);
  cmd_bary->add_option("--cost", bary.cost, "sqdist or csv:<path>");
  cmd_bary->add_flag("--normalize-cost", bary.normalize_cost, "Divide the cost by its maximum");
  cmd_bary->add_flag("--normalize", bary.normalize_rows, "Rescale input rows to sum to one");
  add_common(cmd_bary, bary);

  std::string iterates_path;
  auto* cmd_gap = app.add_subcommand("gap", "Exact duality gap of a saved saddle pair");
  cmd_gap->add_option("--iterates", iterates_path, "iterates.csv written by barycenter")
      ->required();

  SolveArgs bench;
  bench.normalize_cost = true;
  bench.gaussian = true;
  bench.reg = 1e-3;
  bench.out_dir = "bench";
  auto* cmd_bench = app.add_subcommand("gaussian-bench", "Run mp, de and ibp on the Gaussian suite");
  add_common(cmd_bench, bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (cmd_gap->parsed()) {
    std::ifstream in(iterates_path);
    if (!in) throw ConfigError("cannot open '" + iterates_path + "'");
    const SavedIterates saved = read_iterates(in);
    out << format_double(duality_gap(saved.x, saved.y, saved.problem)) << '\n';
    return kExitOk;
  }

  if (cmd_bary->parsed()) {
    if (bary.input.empty() && !bary.gaussian) throw ConfigError("need --input <csv> or --gaussian");
    const Instance inst = build_instance(bary);
    return solve_one(bary.algo, bary, inst, bary.out_dir, out, err);
  }

  const Instance inst = build_instance(bench);
  int worst = kExitOk;
  for (const char* algo : {"mp", "de", "ibp"}) {
    const int code = solve_one(algo, bench, inst, fs::path(bench.out_dir) / algo, out, err);
    if (code == kExitUnderflow) continue;  // reported, the comparison still stands
    worst = std::max(worst, code);
  }
  return worst;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(argc, argv, out, err);
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace wbary
