#include "blurgp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "blurgp/error.hpp"

namespace blurgp {

std::string to_string(Task task) {
  return task == Task::Regression ? "reg" : "class";
}

Task parse_task(const std::string& name) {
  if (name == "reg" || name == "regression") return Task::Regression;
  if (name == "class" || name == "classification") return Task::Classification;
  throw InvalidConfig("unknown task '" + name + "' (expected reg or class)");
}

void Dataset::validate() const {
  if (inputs.rows() < 1) {
    throw DataError("dataset is empty");
  }
  if (inputs.cols() < 1) {
    throw DataError("dataset has no input columns");
  }
  if (targets.size() != inputs.rows()) {
    throw DataError("number of targets does not match number of inputs");
  }
  if (!inputs.allFinite() || !targets.allFinite()) {
    throw DataError("dataset contains non-finite values");
  }
  if (task == Task::Classification) {
    for (Eigen::Index i = 0; i < targets.size(); ++i) {
      if (targets[i] != 1.0 && targets[i] != -1.0) {
        throw DataError("classification label on row " + std::to_string(i) +
                        " is not -1 or +1");
      }
    }
  }
}

double circle_level(double angle, const CircleOptions& opts) {
  if (opts.levels.size() != 4) {
    throw InvalidConfig("circle generator needs exactly four quadrant levels");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a < 0.0) a += two_pi;
  const int q = std::min(3, static_cast<int>(a / (0.5 * std::numbers::pi)));
  return opts.levels[static_cast<std::size_t>(q)];
}

namespace {

Dataset circle_points(const std::vector<double>& angles, double noise_xy,
                      double noise_y, std::mt19937_64& rng,
                      const CircleOptions& opts) {
  if (noise_xy < 0.0 || noise_y < 0.0) {
    throw InvalidConfig("circle noise levels must be non-negative");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(angles.size());
  Dataset out{Matrix(n, 2), Vector(n), Task::Regression};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = angles[static_cast<std::size_t>(i)];
    const double ex = normal(rng);
    const double ey = normal(rng);
    const double et = normal(rng);
    out.inputs(i, 0) = opts.radius * std::cos(a) + noise_xy * ex;
    out.inputs(i, 1) = opts.radius * std::sin(a) + noise_xy * ey;
    out.targets[i] = circle_level(a, opts) + noise_y * et;
  }
  return out;
}

}  // namespace

Dataset synth_circle(int n, double noise_xy, double noise_y,
                     std::uint64_t seed, const CircleOptions& opts) {
  if (n < 4) {
    throw InvalidConfig("circle generator needs n >= 4");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (auto& a : angles) a = angle(rng);
  return circle_points(angles, noise_xy, noise_y, rng, opts);
}

Dataset circle_from_angles(const std::vector<double>& angles, double noise_xy,
                           double noise_y, std::uint64_t seed,
                           const CircleOptions& opts) {
  std::mt19937_64 rng(seed);
  return circle_points(angles, noise_xy, noise_y, rng, opts);
}

Dataset circle_grid(int n, const CircleOptions& opts) {
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    angles[static_cast<std::size_t>(k)] =
        2.0 * std::numbers::pi * (k + 0.5) / n;
  }
  return circle_from_angles(angles, 0.0, 0.0, 0, opts);
}

GaussianClasses GaussianClasses::nested_default() {
  return {Vector::Zero(2), 0.25 * Matrix::Identity(2, 2), Vector::Zero(2),
          2.0 * Matrix::Identity(2, 2)};
}

namespace {

Matrix class_factor(const Vector& mean, const Matrix& cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw InvalidConfig("class covariance must be d x d");
  }
  if (!cov.isApprox(cov.transpose())) {
    throw InvalidConfig("class covariance must be symmetric");
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw InvalidConfig("class covariance must be positive definite");
  }
  return llt.matrixL();
}

Dataset sample_classes(int n, const GaussianClasses& classes,
                       const Matrix& l_pos, const Matrix& l_neg,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = classes.mean_pos.size();
  const int n_pos = (n + 1) / 2;
  Dataset out{Matrix(n, d), Vector(n), Task::Classification};
  for (int i = 0; i < n; ++i) {
    const bool pos = i < n_pos;
    Vector e(d);
    for (Eigen::Index k = 0; k < d; ++k) e[k] = normal(rng);
    out.inputs.row(i) =
        (pos ? Vector(classes.mean_pos + l_pos * e) : Vector(classes.mean_neg + l_neg * e))
            .transpose();
    out.targets[i] = pos ? 1.0 : -1.0;
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> synth_gaussian_classes(int n_train, int n_test,
                                                   std::uint64_t seed,
                                                   const GaussianClasses& classes) {
  if (n_train < 2 || n_test < 2) {
    throw InvalidConfig("class generator needs at least 2 train and 2 test points");
  }
  if (classes.mean_pos.size() != classes.mean_neg.size() || classes.mean_pos.size() < 1) {
    throw InvalidConfig("class means must share a positive dimension");
  }
  const Matrix l_pos = class_factor(classes.mean_pos, classes.cov_pos);
  const Matrix l_neg = class_factor(classes.mean_neg, classes.cov_neg);
  std::mt19937_64 rng(seed);
  Dataset train = sample_classes(n_train, classes, l_pos, l_neg, rng);
  Dataset test = sample_classes(n_test, classes, l_pos, l_neg, rng);
  return {std::move(train), std::move(test)};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last) {
    throw DataError("line " + std::to_string(line_no) + ": '" + s +
                    "' is not a number");
  }
  if (!std::isfinite(v)) {
    throw DataError("line " + std::to_string(line_no) + ": non-finite value");
  }
  return v;
}

struct CsvTable {
  int dim = 0;
  bool has_target = false;
  std::vector<std::vector<double>> rows;
};

CsvTable read_table(const std::filesystem::path& path, bool target_required) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw DataError("'" + path.string() + "' is empty");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  const auto header = split_fields(trim(line));
  CsvTable table;
  for (const auto& name : header) {
    if (name == "x" + std::to_string(table.dim) && !table.has_target) {
      ++table.dim;
    } else if (name == "y" && !table.has_target) {
      table.has_target = true;
    } else {
      throw DataError("unexpected header column '" + name +
                      "' (expected x0,...,x{d-1},y)");
    }
  }
  if (table.dim < 1) {
    throw DataError("header has no input columns");
  }
  if (target_required && !table.has_target) {
    throw DataError("header lacks the target column y");
  }
  const std::size_t width = header.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_fields(t);
    if (fields.size() != width) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(width);
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) {
    throw DataError("'" + path.string() + "' has no data rows");
  }
  return table;
}

Dataset to_dataset(const CsvTable& table, Task task) {
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Dataset out{Matrix(n, table.dim), table.has_target ? Vector(n) : Vector(),
              task};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (int k = 0; k < table.dim; ++k) out.inputs(i, k) = row[static_cast<std::size_t>(k)];
    if (table.has_target) out.targets[i] = row.back();
  }
  return out;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, Task task) {
  Dataset out = to_dataset(read_table(path, true), task);
  out.validate();
  return out;
}

Dataset load_inputs_csv(const std::filesystem::path& path) {
  return to_dataset(read_table(path, false), Task::Regression);
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write '" + path.string() + "'");
  }
  const bool with_y = data.targets.size() == data.inputs.rows();
  for (int k = 0; k < data.dim(); ++k) {
    out << (k ? "," : "") << 'x' << k;
  }
  out << (with_y ? ",y\n" : "\n");
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int k = 0; k < data.dim(); ++k) {
      out << (k ? "," : "") << format_double(data.inputs(i, k));
    }
    if (with_y) out << ',' << format_double(data.targets[i]);
    out << '\n';
  }
  if (!out) {
    throw DataError("failed while writing '" + path.string() + "'");
  }
}

Standardized standardize(const Dataset& train, const Dataset& test) {
  if (train.size() < 1) {
    throw DataError("cannot standardize with an empty training set");
  }
  if (test.size() > 0 && test.dim() != train.dim()) {
    throw ShapeError("train and test input dimensions differ");
  }
  const Vector mean = train.inputs.colwise().mean().transpose();
  const Matrix centered = train.inputs.rowwise() - mean.transpose();
  Vector sd = (centered.colwise().squaredNorm() /
               static_cast<double>(train.size()))
                  .cwiseSqrt()
                  .transpose();
  for (Eigen::Index k = 0; k < sd.size(); ++k) {
    if (!(sd[k] > 1e-12 * std::max(1.0, std::abs(mean[k])))) sd[k] = 1.0;
  }
  auto apply = [&](const Dataset& d) {
    Dataset out = d;
    if (d.size() > 0) {
      out.inputs = (d.inputs.rowwise() - mean.transpose()).array().rowwise() /
                   sd.transpose().array();
    }
    return out;
  };
  return {apply(train), apply(test), {mean, sd}};
}

Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Dataset out{Matrix(n, data.dim()), Vector(n), data.task};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = rows[static_cast<std::size_t>(i)];
    out.inputs.row(i) = data.inputs.row(r);
    out.targets[i] = data.targets[r];
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction,
                                  std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw InvalidConfig("split fraction must lie in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Eigen::Index>> groups;
  if (data.task == Task::Classification) {
    groups.resize(2);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      groups[data.targets[i] > 0 ? 0 : 1].push_back(i);
    }
  } else {
    groups.resize(1);
    for (Eigen::Index i = 0; i < data.size(); ++i) groups[0].push_back(i);
  }
  std::vector<Eigen::Index> a;
  std::vector<Eigen::Index> b;
  for (auto& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    const auto take = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(g.size())));
    a.insert(a.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(take));
    b.insert(b.end(), g.begin() + static_cast<std::ptrdiff_t>(take), g.end());
  }
  if (a.empty() || b.empty()) {
    throw DataError("split fraction leaves one side empty");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {subset(data, a), subset(data, b)};
}

}  // namespace blurgp
