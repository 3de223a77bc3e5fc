#include "blurgp/model_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "blurgp/error.hpp"

namespace blurgp {
namespace {

using nlohmann::json;

json to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(to_json(Vector(m.row(i).transpose())));
  }
  return rows;
}

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) throw DataError(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols,
                   const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw DataError(std::string(what) + " has the wrong number of rows");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector r = vector_from(j[static_cast<std::size_t>(i)], what);
    if (r.size() != cols) {
      throw DataError(std::string(what) + " has the wrong number of columns");
    }
    m.row(i) = r.transpose();
  }
  return m;
}

}  // namespace

std::string model_to_json(const Model& model) {
  const auto& prior = *model.state.prior;
  json j;
  j["version"] = kModelFormatVersion;
  j["kernel"] = {{"sigma", prior.kernel.sigma()}, {"dim", prior.kernel.dim()}};
  json basis = json::array();
  for (const auto& b : prior.basis) {
    basis.push_back({{"center", to_json(b.center)},
                     {"cov", to_json(b.cov)},
                     {"precision", b.precision},
                     {"virtual_target", b.virtual_target}});
  }
  j["basis"] = std::move(basis);
  j["khat_jitter"] = prior.khat.jitter;
  j["alpha"] = to_json(model.state.alpha);
  j["beta"] = to_json(model.state.beta);
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          j["likelihood"] = {{"type", "gaussian"}, {"v_y", l.v_y}};
        } else {
          j["likelihood"] = {{"type", "label-noise"}, {"epsilon", l.epsilon}};
        }
      },
      model.likelihood);
  const auto& c = model.ep_config;
  j["ep_config"] = {{"tol", c.tol},
                    {"max_sweeps", c.max_sweeps},
                    {"damping", c.damping},
                    {"shuffle", c.shuffle},
                    {"seed", c.seed},
                    {"min_cavity_var", c.min_cavity_var}};
  j["seed"] = model.seed;
  return j.dump(2);
}

Model model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw DataError("unsupported model format version");
    }
    const RbfKernel kernel(j.at("kernel").at("sigma").get<double>(),
                           j.at("kernel").at("dim").get<int>());
    const int d = kernel.dim();
    std::vector<BlurredBasis> bases;
    for (const auto& b : j.at("basis")) {
      bases.push_back({vector_from(b.at("center"), "basis center"),
                       matrix_from(b.at("cov"), d, d, "basis cov"),
                       b.at("precision").get<double>(),
                       b.at("virtual_target").get<double>()});
    }
    BasisSet basis(std::move(bases));
    KhatGram khat =
        gram_khat_fixed(kernel, basis, j.at("khat_jitter").get<double>());
    auto prior = std::make_shared<const SparsePrior>(kernel, std::move(basis),
                                                     std::move(khat));
    const auto m = static_cast<Eigen::Index>(prior->size());

    Model model;
    model.state.prior = prior;
    model.state.alpha = vector_from(j.at("alpha"), "alpha");
    if (model.state.alpha.size() != m) {
      throw DataError("alpha length does not match the basis");
    }
    model.state.beta = matrix_from(j.at("beta"), m, m, "beta");

    const auto& lik = j.at("likelihood");
    const auto type = lik.at("type").get<std::string>();
    if (type == "gaussian") {
      model.likelihood = GaussianNoise{lik.at("v_y").get<double>()};
    } else if (type == "label-noise") {
      model.likelihood = LabelNoise{lik.at("epsilon").get<double>()};
    } else {
      throw DataError("unknown likelihood type '" + type + "'");
    }
    validate(model.likelihood);

    const auto& c = j.at("ep_config");
    model.ep_config.tol = c.at("tol").get<double>();
    model.ep_config.max_sweeps = c.at("max_sweeps").get<int>();
    model.ep_config.damping = c.at("damping").get<double>();
    model.ep_config.shuffle = c.at("shuffle").get<bool>();
    model.ep_config.seed = c.at("seed").get<std::uint64_t>();
    model.ep_config.min_cavity_var = c.at("min_cavity_var").get<double>();
    model.seed = j.at("seed").get<std::uint64_t>();
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << model_to_json(model) << '\n';
  if (!out) throw DataError("failed while writing '" + path.string() + "'");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace blurgp
