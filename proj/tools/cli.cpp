#include "cli.hpp"

#include "subbfgs/analytic.hpp"
#include "subbfgs/hinge.hpp"
#include "subbfgs/libsvm.hpp"
#include "subbfgs/logistic.hpp"
#include "subbfgs/segmentation.hpp"
#include "subbfgs/solver.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

namespace subbfgs::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::map<std::string, LabelKind> kLossKinds{
    {"binary-hinge", LabelKind::binary},
    {"multiclass-hinge", LabelKind::multiclass},
    {"multilabel-hinge", LabelKind::multilabel},
    {"l1-logistic", LabelKind::binary},
};

const std::vector<std::string> kSolvers{"sublbfgs", "subbfgs", "gd", "subgd"};

struct SolverFlags {
  std::string solver = "sublbfgs";
  double eps = 1e-5;
  int k_max = 50;
  double h = 1e-8;
  double c1 = 1e-4;
  double c2 = 0.9;
  Index buffer = 15;
  int max_iters = 1000;
  double max_seconds = 0.0;
  double tol = 1e-8;
  int window = 5;
  std::uint64_t seed = 0;
  bool exact = false;
  bool backtracking = false;
  std::optional<double> eps_origin;

  void add_to(CLI::App& app) {
    app.add_option("--solver", solver, "sublbfgs, subbfgs, gd or subgd")
        ->check(CLI::IsMember(kSolvers))
        ->capture_default_str();
    app.add_option("--eps", eps, "direction-finding tolerance")->capture_default_str();
    app.add_option("--kmax", k_max, "direction-finding iteration limit")->capture_default_str();
    app.add_option("--h", h, "lower bound on s'y / y'y")->capture_default_str();
    app.add_option("--c1", c1, "sufficient decrease constant")->capture_default_str();
    app.add_option("--c2", c2, "curvature constant")->capture_default_str();
    app.add_option("--buffer", buffer, "LBFGS memory")->capture_default_str();
    app.add_option("--max-iters", max_iters, "iteration budget")->capture_default_str();
    app.add_option("--max-seconds", max_seconds, "CPU-time budget, 0 for none")
        ->capture_default_str();
    app.add_option("--tol", tol, "relative improvement tolerance")->capture_default_str();
    app.add_option("--window", window, "iterations averaged by the stopping rule")
        ->capture_default_str();
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--eps-origin", eps_origin,
                   "direction tolerance at w = 0 (default 1 for multiclass/multilabel)");
    auto* ex = app.add_flag("--exact", exact, "exact line search (default)");
    auto* bt = app.add_flag("--backtracking", backtracking, "backtracking Wolfe line search");
    ex->excludes(bt);
  }

  SolverConfig config() const {
    SolverConfig c;
    c.eps = eps;
    c.k_max = k_max;
    c.h = h;
    c.wolfe = {c1, c2};
    c.buffer = buffer;
    c.dense = solver == "subbfgs";
    c.max_iterations = max_iters;
    c.max_seconds = max_seconds;
    c.rel_tol = tol;
    c.window = window;
    c.seed = seed;
    c.line_search = backtracking ? LineSearchMode::backtracking : LineSearchMode::exact;
    c.eps_at_origin = eps_origin;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

struct DataFlags {
  std::string data;
  std::string loss = "binary-hinge";
  int threads = 1;
  std::optional<Index> dim_override;

  void add_to(CLI::App& app) {
    app.add_option("--data", data, "dataset in LIBSVM format")->required();
    app.add_option("--loss", loss,
                   "binary-hinge, multiclass-hinge, multilabel-hinge or l1-logistic")
        ->check(CLI::IsMember(kLossKinds))
        ->capture_default_str();
    app.add_option("--threads", threads, "worker threads for objective evaluation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--dim-override", dim_override, "force the feature dimension");
  }
};

std::unique_ptr<Objective> make_objective(const std::string& loss, const Dataset& data,
                                          double lambda, int threads) {
  if (loss == "binary-hinge") {
    return std::make_unique<BinaryHinge>(data.x, data.binary, lambda, threads);
  }
  if (loss == "l1-logistic") {
    return std::make_unique<L1Logistic>(data.x, data.binary, lambda, threads);
  }
  if (loss == "multiclass-hinge") {
    return std::make_unique<MulticlassHinge>(data.x, data.classes, data.num_classes, lambda,
                                             Matrix{}, threads);
  }
  return std::make_unique<MultilabelHinge>(data.x, data.label_sets, data.num_classes, lambda,
                                           Matrix{}, threads);
}

Dataset load(const DataFlags& flags) {
  try {
    return load_libsvm(flags.data, kLossKinds.at(flags.loss), flags.dim_override);
  } catch (const LabelKindError& e) {
    throw UsageError(std::string(e.what()) + " (loss " + flags.loss + ")");
  }
}

SolverResult run_solver(const std::string& solver, const Objective& obj,
                        const SolverConfig& config, const Vector& w0) {
  if (solver == "gd") return solve_gd(obj, config, w0);
  if (solver == "subgd") return solve_subgd(obj, config, w0);
  return solve(obj, config, w0);
}

SolverConfig with_loss_defaults(SolverConfig c, const std::string& loss) {
  if (!c.eps_at_origin && (loss == "multiclass-hinge" || loss == "multilabel-hinge")) {
    c.eps_at_origin = 1.0;
  }
  return c;
}

void write_trace(std::ostream& out, const SolverTrace& trace, bool zero_time) {
  out << "iter,cpu_seconds,objective,step_size,dir_iters,gbar_norm\n";
  for (const auto& r : trace.records) {
    out << r.iter << ',' << format_double(zero_time ? 0.0 : r.cpu_seconds) << ','
        << format_double(r.objective) << ',' << format_double(r.step_size) << ',' << r.dir_iters
        << ',' << format_double(r.gbar_norm) << '\n';
  }
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << contents;
  if (!f) throw std::runtime_error("failed writing " + path);
}

// ---------------------------------------------------------------- train

struct TrainCommand {
  DataFlags data;
  SolverFlags solver;
  double lambda = 1e-4;
  std::string trace;
  std::string weights;
  bool zero_time = false;

  void add_to(CLI::App& app) {
    data.add_to(app);
    solver.add_to(app);
    app.add_option("--lambda", lambda, "regularization constant")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--trace", trace, "write the per-iteration trace as CSV");
    app.add_option("--weights", weights, "write the final weights, one per line");
    app.add_flag("--zero-time", zero_time, "write 0 in the cpu_seconds column");
  }

  int run(std::ostream& out) const {
    const SolverConfig config = with_loss_defaults(solver.config(), data.loss);
    const Dataset ds = load(data);
    const auto obj = make_objective(data.loss, ds, lambda, data.threads);
    const SolverResult result =
        run_solver(solver.solver, *obj, config, Vector::Zero(obj->dim()));

    if (!trace.empty()) {
      std::ostringstream csv;
      write_trace(csv, result.trace, zero_time);
      write_file(trace, csv.str());
    }
    if (!weights.empty()) {
      std::ostringstream w;
      for (Index k = 0; k < result.w.size(); ++k) w << format_double(result.w[k]) << '\n';
      write_file(weights, w.str());
    }
    const auto stats = ds.stats();
    out << "data: n=" << stats.n << " d=" << stats.d << " nnz=" << stats.nnz
        << " sparsity=" << format_double(stats.sparsity_percent) << "%\n";
    out << "iterations: " << result.trace.records.size() - 1 << '\n';
    out << "final objective: " << format_double(result.trace.records.back().objective) << '\n';
    out << "termination: " << to_string(result.trace.reason) << '\n';
    if (result.trace.reason == Termination::line_search_failure) {
      out << "line search failed: " << result.trace.message << '\n';
      return 1;
    }
    return 0;
  }
};

// ---------------------------------------------------------------- counterexample

struct CounterexampleCommand {
  std::string name;
  int max_iters = 50;
  std::string trace;
  bool zero_time = false;

  void add_to(CLI::App& app) {
    app.add_option("name", name, "toy, wolfe, hul or lo")
        ->required()
        ->check(CLI::IsMember(counterexample_names()));
    app.add_option("--max-iters", max_iters, "iteration budget")->capture_default_str();
    app.add_option("--trace", trace, "write the per-iteration trace as CSV");
    app.add_flag("--zero-time", zero_time, "write 0 in the cpu_seconds column");
  }

  int run(std::ostream& out) const {
    const Counterexample ce = make_counterexample(name);
    SolverConfig config;
    config.dense = true;
    config.h = 1e-8;
    config.eps = 1e-5;
    config.max_iterations = max_iters;
    config.record_iterates = true;
    const SolverResult result = solve(*ce.objective, config, ce.start);

    out << "iter x y objective step\n";
    for (std::size_t k = 0; k < result.trace.records.size(); ++k) {
      const auto& r = result.trace.records[k];
      const Vector& wk = result.iterates[k];
      out << r.iter << ' ' << format_double(wk[0]) << ' ' << format_double(wk[1]) << ' '
          << format_double(r.objective) << ' ' << format_double(r.step_size) << '\n';
    }
    const Vector& w = result.w;
    const double f = result.trace.records.back().objective;
    out << "final point: " << format_double(w[0]) << ' ' << format_double(w[1]) << '\n';
    out << "termination: " << to_string(result.trace.reason) << '\n';

    bool ok = false;
    std::string verdict;
    if (name == "toy") {
      ok = w.norm() <= 1e-9;
      verdict = ok ? "reached the optimum (0, 0)" : "did not reach the optimum";
    } else if (name == "wolfe") {
      ok = f < -1e3;
      verdict = ok ? "moved into x < 0; objective unbounded below" : "stalled";
    } else if (name == "hul") {
      ok = std::abs(f + 100.0) <= 1e-9;
      verdict = ok ? "reached the minimal value -100" : "did not reach -100";
    } else {
      ok = f < -1e6 && result.trace.records.size() <= 6;
      verdict = ok ? "unbounded descent detected" : "no unbounded descent";
    }
    out << "verdict: " << verdict << '\n';

    if (!trace.empty()) {
      std::ostringstream csv;
      write_trace(csv, result.trace, zero_time);
      write_file(trace, csv.str());
    }
    return ok ? 0 : 1;
  }
};

// ---------------------------------------------------------------- segment-demo

struct SegmentCommand {
  std::string lines;
  double lower = 0.0;
  std::string upper = "inf";
  bool verify = false;

  void add_to(CLI::App& app) {
    app.add_option("--lines", lines, "file with one 'slope offset' pair per line")->required();
    app.add_option("--lower", lower, "left end L of the interval")->capture_default_str();
    app.add_option("--upper", upper, "right end U of the interval, or inf")
        ->capture_default_str();
    app.add_flag("--verify", verify, "compare against a direct maximum over all lines");
  }

  int run(std::ostream& out) const {
    double u;
    {
      std::istringstream in(upper);
      if (upper == "inf") {
        u = std::numeric_limits<double>::infinity();
      } else if (!(in >> u) || !in.eof()) {
        throw UsageError("invalid --upper value '" + upper + "'");
      }
    }
    std::ifstream in(lines);
    if (!in) throw std::runtime_error("cannot open " + lines);
    LineSet<double> set;
    std::string row;
    std::size_t line_no = 0;
    while (std::getline(in, row)) {
      ++line_no;
      if (const auto hash = row.find('#'); hash != std::string::npos) row.resize(hash);
      std::istringstream fields(row);
      double a, b;
      if (!(fields >> a)) continue;
      std::string rest;
      if (!(fields >> b) || (fields >> rest)) {
        throw ParseError("expected 'slope offset'", line_no);
      }
      set.a.push_back(a);
      set.b.push_back(b);
    }
    if (set.size() == 0) throw ParseError("no lines in " + lines, 0);
    if (!(lower < u)) throw UsageError("--lower must be below --upper");

    const SegmentStack<double> stack = segment_max_lines(set, lower, u);
    out << "breakpoint line slope offset\n";
    for (Index j = 0; j < stack.size(); ++j) {
      const Index k = stack.line[j];
      out << format_double(stack.eta[j]) << ' ' << k << ' ' << format_double(set.a[k]) << ' '
          << format_double(set.b[k]) << '\n';
    }
    if (!verify) return 0;

    // Check the envelope at every breakpoint and inside every segment.
    std::vector<double> probes;
    for (Index j = 0; j < stack.size(); ++j) {
      const double left = stack.eta[j];
      const double right = j + 1 < stack.size() ? stack.eta[j + 1] : (std::isfinite(u) ? u : left + 1.0);
      probes.push_back(left);
      probes.push_back(0.5 * (left + right));
    }
    if (std::isfinite(u)) probes.push_back(u);
    for (double eta : probes) {
      double direct = -std::numeric_limits<double>::infinity();
      for (Index k = 0; k < set.size(); ++k) direct = std::max(direct, set.value(k, eta));
      const double env = envelope_value(stack, set, eta).value;
      if (std::abs(env - direct) > 1e-12 * std::max(1.0, std::abs(direct))) {
        out << "verification failed at eta=" << format_double(eta) << '\n';
        return 1;
      }
    }
    out << "verified at " << probes.size() << " points\n";
    return 0;
  }
};

// ---------------------------------------------------------------- sweep

struct SweepCommand {
  DataFlags data;
  SolverFlags solver;
  std::vector<double> lambdas;
  int reference_iters = 2000;
  std::string out_path;

  void add_to(CLI::App& app) {
    data.add_to(app);
    solver.add_to(app);
    app.add_option("--lambdas", lambdas, "comma-separated regularization constants")
        ->required()
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    app.add_option("--reference-iters", reference_iters,
                   "iteration cap for the reference subLBFGS run")
        ->capture_default_str();
    app.add_option("--out", out_path, "write the summary CSV here instead of stdout");
  }

  int run(std::ostream& out) const {
    const SolverConfig config = with_loss_defaults(solver.config(), data.loss);
    const Dataset ds = load(data);
    std::ostringstream csv;
    csv << "lambda,reference_objective,initial_objective,seconds_to_2pct,iters_to_2pct,status\n";
    for (double lambda : lambdas) {
      const auto obj = make_objective(data.loss, ds, lambda, data.threads);
      const Vector w0 = Vector::Zero(obj->dim());

      SolverConfig ref_config = config;
      ref_config.dense = false;
      ref_config.max_iterations = reference_iters;
      ref_config.max_seconds = 0.0;
      const SolverResult ref = solve(*obj, ref_config, w0);
      const double j_star = ref.trace.records.back().objective;
      const double j0 = ref.trace.records.front().objective;
      const double target = j_star + 0.02 * std::abs(j_star);

      csv << format_double(lambda) << ',' << format_double(j_star) << ',' << format_double(j0)
          << ',';
      if (j0 <= target) {
        csv << "0,0,initial point optimal\n";
        continue;
      }
      const SolverResult run = run_solver(solver.solver, *obj, config, w0);
      const TraceRecord* hit = nullptr;
      for (const auto& r : run.trace.records) {
        if (r.objective <= target) {
          hit = &r;
          break;
        }
      }
      if (hit) {
        csv << format_double(hit->cpu_seconds) << ',' << hit->iter << ",reached\n";
      } else {
        csv << ",,not reached (" << to_string(run.trace.reason) << ")\n";
      }
    }
    if (out_path.empty()) {
      out << csv.str();
    } else {
      write_file(out_path, csv.str());
    }
    return 0;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quasi-Newton solvers for nonsmooth convex risk minimization", "subbfgs"};
  // -h would clash with the --h curvature bound.
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);

  TrainCommand train;
  CounterexampleCommand counter;
  SegmentCommand segment;
  SweepCommand sweep;
  auto* train_app = app.add_subcommand("train", "train a model on a LIBSVM dataset");
  train.add_to(*train_app);
  auto* counter_app =
      app.add_subcommand("counterexample", "run subBFGS on a built-in nonsmooth test function");
  counter.add_to(*counter_app);
  auto* segment_app =
      app.add_subcommand("segment-demo", "print the upper envelope of a set of lines");
  segment.add_to(*segment_app);
  auto* sweep_app =
      app.add_subcommand("sweep", "time to reach 2% of the optimum for several lambdas");
  sweep.add_to(*sweep_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (train_app->parsed()) return train.run(out);
    if (counter_app->parsed()) return counter.run(out);
    if (segment_app->parsed()) return segment.run(out);
    return sweep.run(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace subbfgs::cli
