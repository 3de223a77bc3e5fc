#include "blurgp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "blurgp/basis_selection.hpp"
#include "blurgp/benchmark_runner.hpp"
#include "blurgp/data.hpp"
#include "blurgp/ep.hpp"
#include "blurgp/error.hpp"
#include "blurgp/evaluation.hpp"
#include "blurgp/model_io.hpp"
#include "blurgp/oracles.hpp"

namespace blurgp::cli {
namespace {

using Json = nlohmann::json;

// Writes to a file, or to `out` when the path is "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out) {
    if (path == "-") {
      stream_ = &out;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw DataError("cannot write '" + path + "'");
    stream_ = file_.get();
  }
  std::ostream& operator*() { return *stream_; }
  void close(const std::string& path) {
    if (file_) {
      file_->close();
      if (!*file_) throw DataError("failed while writing '" + path + "'");
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidConfig("cannot parse number '" + item + "' in '" + text +
                          "'");
    }
  }
  if (out.empty()) throw InvalidConfig("empty number list");
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix to_square(const std::vector<double>& v, Eigen::Index d) {
  if (static_cast<Eigen::Index>(v.size()) != d * d) {
    throw InvalidConfig("covariance needs d*d comma-separated entries");
  }
  Matrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = v[r * d + c];
  }
  return m;
}

// ---------------------------------------------------------------- synth

struct SynthCircleArgs {
  int n = 100;
  std::uint64_t seed = 0;
  double noise_xy = kCircleNoiseXy;
  double noise_y = kCircleNoiseY;
  double radius = 1.0;
  std::string out = "circle.csv";
};

struct SynthClassesArgs {
  int train = 200;
  int test = 2000;
  std::uint64_t seed = 0;
  std::string train_out = "classes_train.csv";
  std::string test_out = "classes_test.csv";
};

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string task = "reg";
  std::string data;
  int m = 4;
  std::string cov = "full";
  double ridge = 1e-6;
  double sigma = 0.5;
  double vy = 0.1;
  double eps = 0.0;
  double tol = 1e-6;
  int max_sweeps = 100;
  std::optional<double> damping;
  bool shuffle = false;
  double min_cavity_var = 1e-10;
  double precision = kDefaultVirtualPrecision;
  std::uint64_t seed = 0;
  std::string out = "model.json";
  std::string diagnostics = "-";
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const Task task = parse_task(a.task);
  const Dataset data = load_csv(a.data, task);
  const CovMode mode{parse_cov_kind(a.cov), a.ridge};
  if (!(a.sigma > 0.0)) throw InvalidConfig("--sigma must be positive");

  Likelihood lik = task == Task::Classification
                       ? Likelihood{LabelNoise{a.eps}}
                       : Likelihood{GaussianNoise{a.vy}};
  validate(lik);
  EpConfig cfg = EpConfig::defaults_for(lik);
  cfg.tol = a.tol;
  cfg.max_sweeps = a.max_sweeps;
  if (a.damping) cfg.damping = *a.damping;
  cfg.shuffle = a.shuffle;
  cfg.seed = a.seed;
  cfg.min_cavity_var = a.min_cavity_var;
  cfg.validate();

  const Clustering cl = kmeans(data.inputs, a.m, a.seed);
  const LocalCovariances lc =
      local_covariances(cl, data.inputs, mode, a.precision);
  const EpResult fit = ep_fit(data, RbfKernel(a.sigma, data.dim()), lc.basis,
                              lik, cfg);
  save_model(a.out, Model{fit.state, lik, cfg, a.seed});

  Json diag = Json::parse(fit.diagnostics.to_json());
  diag["model"] = a.out;
  diag["M"] = a.m;
  diag["sphere_fallbacks"] = lc.sphere_fallbacks;
  Sink sink(a.diagnostics, out);
  *sink << diag.dump(2) << '\n';
  sink.close(a.diagnostics);
  return kExitOk;
}

// ---------------------------------------------------------------- predict / eval

struct ModelDataArgs {
  std::string model = "model.json";
  std::string data;
  std::string out = "-";
};

void check_dim(const Model& model, const Dataset& data) {
  if (data.dim() != model.state.prior->kernel.dim()) {
    throw ShapeError("data has " + std::to_string(data.dim()) +
                     " input columns but the model expects " +
                     std::to_string(model.state.prior->kernel.dim()));
  }
}

int cmd_predict(const ModelDataArgs& a, std::ostream& out) {
  const Model model = load_model(a.model);
  const Dataset data = load_inputs_csv(a.data);
  check_dim(model, data);
  Sink sink(a.out, out);
  if (const auto* ln = std::get_if<LabelNoise>(&model.likelihood)) {
    const Vector p = predict_probability(model.state, data.inputs, *ln);
    *sink << "prob\n";
    for (double v : p) *sink << format_double(v) << '\n';
  } else {
    const double vy = std::get<GaussianNoise>(model.likelihood).v_y;
    const RegressionPrediction p =
        predict_regression(model.state, data.inputs, vy);
    *sink << "mean,var\n";
    for (Eigen::Index i = 0; i < p.mean.size(); ++i) {
      *sink << format_double(p.mean[i]) << ',' << format_double(p.var[i])
            << '\n';
    }
  }
  sink.close(a.out);
  return kExitOk;
}

int cmd_eval(const ModelDataArgs& a, std::ostream& out) {
  const Model model = load_model(a.model);
  const bool classification = is_classification(model.likelihood);
  const Dataset data = load_csv(
      a.data, classification ? Task::Classification : Task::Regression);
  check_dim(model, data);
  Json j;
  j["n"] = data.size();
  if (classification) {
    const Vector p = predict_probability(
        model.state, data.inputs, std::get<LabelNoise>(model.likelihood));
    j["task"] = "class";
    j["metric"] = "error_rate";
    j["value"] = error_rate(p, data.targets);
  } else {
    const RegressionPrediction p = predict_regression(model.state, data.inputs);
    j["task"] = "reg";
    j["metric"] = "rmse";
    j["value"] = rmse(p.mean, data.targets);
  }
  Sink sink(a.out, out);
  *sink << j.dump(2) << '\n';
  sink.close(a.out);
  return kExitOk;
}

// ---------------------------------------------------------------- grid

struct GridArgs {
  std::string model = "model.json";
  double x0_min = -2.5;
  double x0_max = 2.5;
  double x1_min = -2.5;
  double x1_max = 2.5;
  int nx = 101;
  int ny = 101;
  std::string out = "grid.csv";
  std::string pgm;
};

void write_pgm(const std::string& path, const Vector& values, int nx, int ny) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write '" + path + "'");
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  f << "P2\n" << nx << ' ' << ny << "\n255\n";
  // Image rows run top to bottom, so the largest x1 comes first.
  for (int iy = ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double v = values[static_cast<Eigen::Index>(iy) * nx + ix];
      const long level = std::lround(255.0 * (v - lo) / span);
      f << level << (ix + 1 == nx ? '\n' : ' ');
    }
  }
  if (!f) throw DataError("failed while writing '" + path + "'");
}

int cmd_grid(const GridArgs& a, std::ostream& out) {
  if (a.nx < 2 || a.ny < 2) throw InvalidConfig("--nx and --ny must be >= 2");
  if (!(a.x0_max > a.x0_min) || !(a.x1_max > a.x1_min)) {
    throw InvalidConfig("grid bounds must satisfy min < max");
  }
  const Model model = load_model(a.model);
  if (model.state.prior->kernel.dim() != 2) {
    throw ShapeError("grid needs a model with 2 input dimensions");
  }
  Matrix pts(static_cast<Eigen::Index>(a.nx) * a.ny, 2);
  for (int iy = 0; iy < a.ny; ++iy) {
    const double x1 = a.x1_min + (a.x1_max - a.x1_min) * iy / (a.ny - 1);
    for (int ix = 0; ix < a.nx; ++ix) {
      const double x0 = a.x0_min + (a.x0_max - a.x0_min) * ix / (a.nx - 1);
      pts.row(static_cast<Eigen::Index>(iy) * a.nx + ix) << x0, x1;
    }
  }
  Sink sink(a.out, out);
  Vector shade;
  if (const auto* ln = std::get_if<LabelNoise>(&model.likelihood)) {
    shade = predict_probability(model.state, pts, *ln);
    *sink << "x0,x1,prob\n";
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      *sink << format_double(pts(i, 0)) << ',' << format_double(pts(i, 1))
            << ',' << format_double(shade[i]) << '\n';
    }
  } else {
    const RegressionPrediction p = predict_regression(model.state, pts);
    shade = p.mean;
    *sink << "x0,x1,mean,var\n";
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      *sink << format_double(pts(i, 0)) << ',' << format_double(pts(i, 1))
            << ',' << format_double(p.mean[i]) << ','
            << format_double(p.var[i]) << '\n';
    }
  }
  sink.close(a.out);
  if (!a.pgm.empty()) write_pgm(a.pgm, shade, a.nx, a.ny);
  return kExitOk;
}

// ---------------------------------------------------------------- benchmark

struct BenchArgs {
  std::string dataset = "synth-classes";
  std::string data;
  std::string task = "class";
  double train_fraction = 0.5;
  std::string m = "3";
  std::string modes = "zero,sphere,full";
  int repeats = 10;
  std::uint64_t seed = 1;
  double sigma = 0.5;
  double vy = 0.01;
  double eps = 0.0;
  double ridge = 1e-6;
  int n_train = 0;
  int n_test = 0;
  bool no_reference = false;
  std::string out = "-";
};

int cmd_benchmark(const BenchArgs& a, std::ostream& out) {
  BenchmarkConfig cfg;
  cfg.dataset = a.dataset;
  if (a.dataset == "csv") {
    if (a.data.empty()) throw InvalidConfig("--dataset csv needs --data");
    cfg.csv_path = a.data;
    cfg.csv_task = parse_task(a.task);
  }
  cfg.train_fraction = a.train_fraction;
  cfg.ms.clear();
  for (double v : parse_list(a.m)) {
    if (v != std::floor(v)) throw InvalidConfig("--m values must be integers");
    cfg.ms.push_back(static_cast<int>(v));
  }
  cfg.modes.clear();
  std::stringstream ss(a.modes);
  std::string item;
  while (std::getline(ss, item, ',')) cfg.modes.push_back(parse_cov_kind(item));
  cfg.repeats = a.repeats;
  cfg.base_seed = a.seed;
  cfg.sigma = a.sigma;
  cfg.vy = a.vy;
  cfg.epsilon = a.eps;
  cfg.ridge = a.ridge;
  cfg.n_train = a.n_train;
  cfg.n_test = a.n_test;
  cfg.reference = !a.no_reference;

  const auto rows = run_benchmark(cfg);
  Sink sink(a.out, out);
  write_benchmark_csv(*sink, rows);
  sink.close(a.out);
  return kExitOk;
}

// ---------------------------------------------------------------- oracle

struct ExactGpArgs {
  std::string data;
  std::string query;
  double sigma = 0.5;
  double vy = 0.1;
  std::string out = "-";
};

int cmd_oracle_exact_gp(const ExactGpArgs& a, std::ostream& out) {
  const Dataset train = load_csv(a.data, Task::Regression);
  const Dataset query = load_inputs_csv(a.query);
  if (query.dim() != train.dim()) {
    throw ShapeError("query and training inputs have different dimensions");
  }
  if (!(a.sigma > 0.0)) throw InvalidConfig("--sigma must be positive");
  const oracle::ExactGp gp = oracle::exact_gp_regression(
      a.sigma, train.inputs, train.targets, a.vy, query.inputs);
  Sink sink(a.out, out);
  *sink << "mean,var\n";
  for (Eigen::Index i = 0; i < gp.mean.size(); ++i) {
    *sink << format_double(gp.mean[i]) << ','
          << format_double(gp.var[i] + a.vy) << '\n';
  }
  sink.close(a.out);
  return kExitOk;
}

struct QuadArgs {
  std::string kind = "cross";
  double sigma = 1.0;
  std::string x = "0";
  std::string b = "0";
  std::string c = "1";
  std::string bj = "0";
  std::string cj = "1";
  double y = 1.0;
  double mean = 0.0;
  double var = 1.0;
  std::string lik = "step";
  double eps = 0.0;
  double vy = 0.1;
  int nodes = 16;
  double abs_tol = 1e-10;
};

int cmd_oracle_quadrature(const QuadArgs& a, std::ostream& out) {
  if (a.nodes < 1 || !(a.abs_tol > 0.0)) {
    throw InvalidConfig("--nodes must be >= 1 and --abs-tol positive");
  }
  Json j;
  j["kind"] = a.kind;
  if (a.kind == "cross" || a.kind == "khat") {
    if (!(a.sigma > 0.0)) throw InvalidConfig("--sigma must be positive");
    const Vector b = to_vector(parse_list(a.b));
    const Matrix c = to_square(parse_list(a.c), b.size());
    const RbfKernel kernel(a.sigma, static_cast<int>(b.size()));
    const BlurredBasis bi{b, c};
    oracle::QuadratureRule rule;
    rule.nodes = a.nodes;
    rule.abs_tol = a.abs_tol;
    double quad = 0.0;
    double closed = 0.0;
    if (a.kind == "cross") {
      const Vector x = to_vector(parse_list(a.x));
      if (x.size() != b.size()) throw ShapeError("--x and --b lengths differ");
      quad = oracle::quad_blurred_cross(a.sigma, x, b, c, rule);
      closed = blurred_cross(kernel, x, bi);
    } else {
      const Vector bj = to_vector(parse_list(a.bj));
      const Matrix cj = to_square(parse_list(a.cj), bj.size());
      if (bj.size() != b.size()) throw ShapeError("--b and --bj lengths differ");
      quad = oracle::quad_doubly_blurred(a.sigma, b, c, bj, cj, rule);
      closed = doubly_blurred(kernel, bi, BlurredBasis{bj, cj});
    }
    j["quadrature"] = quad;
    j["closed_form"] = closed;
    j["abs_diff"] = std::abs(quad - closed);
  } else if (a.kind == "tilted") {
    Likelihood lik = a.lik == "gaussian" ? Likelihood{GaussianNoise{a.vy}}
                                         : Likelihood{LabelNoise{a.eps}};
    if (a.lik != "gaussian" && a.lik != "step") {
      throw InvalidConfig("--lik must be step or gaussian");
    }
    validate(lik);
    const CavityMarginal cav{a.mean, a.var};
    oracle::QuadratureRule rule{oracle::RuleKind::GaussHermite, a.nodes,
                                a.abs_tol};
    const oracle::TiltedMoments t =
        oracle::tilted_moments_quadrature(a.y, cav, lik, rule);
    const SiteDerivatives d = site_derivatives(a.y, cav, lik);
    j["Z"] = t.Z;
    j["logZ"] = t.logZ;
    j["mean"] = t.mean;
    j["var"] = t.var;
    j["dlogZ"] = t.dlogZ;
    j["d2logZ"] = t.d2logZ;
    j["closed_form"] = {{"logZ", d.logZ}, {"dlogZ", d.dlogZ},
                        {"d2logZ", d.d2logZ}};
  } else {
    throw InvalidConfig("--kind must be cross, khat or tilted");
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const InvalidConfig& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Sparse Gaussian processes with blurred basis points, trained "
               "by expectation propagation.",
               "blurgp"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  int code = kExitOk;
  std::function<int()> action;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic datasets");
  synth->require_subcommand(1);
  SynthCircleArgs circle;
  auto* sc = synth->add_subcommand("circle", "Noisy points on a circle, target by quadrant");
  sc->add_option("--n", circle.n, "Number of points");
  sc->add_option("--seed", circle.seed, "Random seed");
  sc->add_option("--noise-xy", circle.noise_xy, "Input jitter sd");
  sc->add_option("--noise-y", circle.noise_y, "Target noise sd");
  sc->add_option("--radius", circle.radius, "Circle radius");
  sc->add_option("--out", circle.out, "Output CSV");
  sc->callback([&] {
    action = [&] {
      CircleOptions opts;
      opts.radius = circle.radius;
      write_csv(circle.out, synth_circle(circle.n, circle.noise_xy,
                                         circle.noise_y, circle.seed, opts));
      return kExitOk;
    };
  });
  SynthClassesArgs classes;
  auto* scl = synth->add_subcommand("classes", "Two nested Gaussian classes in 2-D");
  scl->add_option("--train", classes.train, "Training points");
  scl->add_option("--test", classes.test, "Test points");
  scl->add_option("--seed", classes.seed, "Random seed");
  scl->add_option("--train-out", classes.train_out, "Training CSV");
  scl->add_option("--test-out", classes.test_out, "Test CSV");
  scl->callback([&] {
    action = [&] {
      auto [tr, te] = synth_gaussian_classes(classes.train, classes.test,
                                             classes.seed,
                                             GaussianClasses::nested_default());
      write_csv(classes.train_out, tr);
      write_csv(classes.test_out, te);
      return kExitOk;
    };
  });

  // fit
  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Cluster, build blurred bases and run EP");
  f->add_option("--task", fit.task, "reg or class")->check(CLI::IsMember({"reg", "class"}));
  f->add_option("--data", fit.data, "Training CSV")->required();
  f->add_option("--m", fit.m, "Number of basis points");
  f->add_option("--cov", fit.cov, "Local covariance: full, sphere or zero")
      ->check(CLI::IsMember({"full", "sphere", "zero"}));
  f->add_option("--ridge", fit.ridge, "Full-mode ridge, relative to trace/d");
  f->add_option("--sigma", fit.sigma, "Kernel length-scale");
  f->add_option("--vy", fit.vy, "Regression noise variance");
  f->add_option("--eps", fit.eps, "Label-flip rate for classification");
  f->add_option("--tol", fit.tol, "Convergence threshold on site changes");
  f->add_option("--max-sweeps", fit.max_sweeps, "Sweep limit");
  f->add_option("--damping", fit.damping,
                "Damping in (0, 1] [default: 1 for reg, 0.5 for class]");
  f->add_flag("--shuffle", fit.shuffle, "Shuffle the sweep order each sweep");
  f->add_option("--min-cavity-var", fit.min_cavity_var, "Cavity variance floor");
  f->add_option("--precision", fit.precision, "Virtual-target precision stored with each basis");
  f->add_option("--seed", fit.seed, "Seed for K-means and shuffling");
  f->add_option("--out", fit.out, "Model file");
  f->add_option("--diagnostics", fit.diagnostics, "Diagnostics JSON (- for stdout)");
  f->callback([&] { action = [&] { return cmd_fit(fit, out); }; });

  // predict / eval
  ModelDataArgs pred;
  auto* p = app.add_subcommand("predict", "Predict mean and variance, or class probability");
  p->add_option("--model", pred.model, "Model file");
  p->add_option("--data", pred.data, "Input CSV (a y column is ignored)")->required();
  p->add_option("--out", pred.out, "Output CSV (- for stdout)");
  p->callback([&] { action = [&] { return cmd_predict(pred, out); }; });

  ModelDataArgs ev;
  auto* e = app.add_subcommand("eval", "RMSE or error rate on a labelled CSV");
  e->add_option("--model", ev.model, "Model file");
  e->add_option("--data", ev.data, "Labelled CSV")->required();
  e->add_option("--out", ev.out, "Metrics JSON (- for stdout)");
  e->callback([&] { action = [&] { return cmd_eval(ev, out); }; });

  // grid
  GridArgs grid;
  auto* g = app.add_subcommand("grid", "Evaluate a 2-D model on a lattice");
  g->add_option("--model", grid.model, "Model file");
  g->add_option("--x0-min", grid.x0_min, "Lower x0 bound");
  g->add_option("--x0-max", grid.x0_max, "Upper x0 bound");
  g->add_option("--x1-min", grid.x1_min, "Lower x1 bound");
  g->add_option("--x1-max", grid.x1_max, "Upper x1 bound");
  g->add_option("--nx", grid.nx, "Points along x0");
  g->add_option("--ny", grid.ny, "Points along x1");
  g->add_option("--out", grid.out, "Grid CSV (- for stdout)");
  g->add_option("--pgm", grid.pgm, "Optional P2 grayscale image");
  g->callback([&] { action = [&] { return cmd_grid(grid, out); }; });

  // benchmark
  BenchArgs bench;
  auto* b = app.add_subcommand("benchmark", "Compare covariance modes over repeats");
  b->add_option("--dataset", bench.dataset, "circle, synth-classes or csv")
      ->check(CLI::IsMember({"circle", "synth-classes", "csv"}));
  b->add_option("--data", bench.data, "CSV file for --dataset csv");
  b->add_option("--task", bench.task, "Task of the CSV file: reg or class")
      ->check(CLI::IsMember({"reg", "class"}));
  b->add_option("--train-fraction", bench.train_fraction, "CSV training fraction");
  b->add_option("--m", bench.m, "Comma-separated basis sizes");
  b->add_option("--modes", bench.modes, "Comma-separated covariance modes");
  b->add_option("--repeats", bench.repeats, "Repeats per setting");
  b->add_option("--seed", bench.seed, "Base seed");
  b->add_option("--sigma", bench.sigma, "Kernel length-scale");
  b->add_option("--vy", bench.vy, "Regression noise variance");
  b->add_option("--eps", bench.eps, "Label-flip rate");
  b->add_option("--ridge", bench.ridge, "Full-mode ridge, relative to trace/d");
  b->add_option("--n-train", bench.n_train, "Training size (0: dataset default)");
  b->add_option("--n-test", bench.n_test, "Test size (0: dataset default)");
  b->add_flag("--no-reference", bench.no_reference, "Skip the full-GP reference rows");
  b->add_option("--out", bench.out, "Results CSV (- for stdout)");
  b->callback([&] { action = [&] { return cmd_benchmark(bench, out); }; });

  // oracle
  auto* o = app.add_subcommand("oracle", "Reference computations");
  o->require_subcommand(1);
  ExactGpArgs egp;
  auto* oe = o->add_subcommand("exact-gp", "Dense GP regression predictions");
  oe->add_option("--data", egp.data, "Training CSV")->required();
  oe->add_option("--query", egp.query, "Query CSV")->required();
  oe->add_option("--sigma", egp.sigma, "Kernel length-scale");
  oe->add_option("--vy", egp.vy, "Noise variance");
  oe->add_option("--out", egp.out, "Output CSV (- for stdout)");
  oe->callback([&] { action = [&] { return cmd_oracle_exact_gp(egp, out); }; });
  QuadArgs quad;
  auto* oq = o->add_subcommand("quadrature", "Quadrature check of a closed form");
  oq->add_option("--kind", quad.kind, "cross, khat or tilted")
      ->check(CLI::IsMember({"cross", "khat", "tilted"}));
  oq->add_option("--sigma", quad.sigma, "Kernel length-scale");
  oq->add_option("--x", quad.x, "Input point (comma-separated)");
  oq->add_option("--b", quad.b, "Basis center");
  oq->add_option("--c", quad.c, "Basis covariance, row-major");
  oq->add_option("--bj", quad.bj, "Second basis center (khat)");
  oq->add_option("--cj", quad.cj, "Second basis covariance (khat)");
  oq->add_option("--y", quad.y, "Target (tilted)");
  oq->add_option("--mean", quad.mean, "Cavity mean (tilted)");
  oq->add_option("--var", quad.var, "Cavity variance (tilted)");
  oq->add_option("--lik", quad.lik, "step or gaussian (tilted)");
  oq->add_option("--eps", quad.eps, "Label-flip rate (tilted)");
  oq->add_option("--vy", quad.vy, "Noise variance (tilted, gaussian)");
  oq->add_option("--nodes", quad.nodes, "Nodes per panel or Gauss-Hermite nodes");
  oq->add_option("--abs-tol", quad.abs_tol, "Dual-rule agreement tolerance");
  oq->callback([&] { action = [&] { return cmd_oracle_quadrature(quad, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int rc = app.exit(ex, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (!action) return kExitUsage;
  try {
    code = action();
  } catch (...) {
    code = exit_code_for_current_exception(err);
  }
  return code;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  std::vector<const char*> argv{"blurgp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace blurgp::cli
