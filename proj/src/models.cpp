#include "engage/models.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "engage/error.hpp"
#include "engage/svr.hpp"

namespace engage {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

double resolved_gamma(const Hyperparameters& hp, Eigen::Index p) {
  return hp.gamma ? *hp.gamma : 1.0 / static_cast<double>(std::max<Eigen::Index>(p, 1));
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const char* what) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  // LDLT silently zeroes negligible pivots, so rcond alone misses exactly collinear inputs.
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  const bool tiny_pivot = d.size() > 0 && !(d.minCoeff() > 1e-13 * d.maxCoeff());
  if (ldlt.info() != Eigen::Success || tiny_pivot || !(ldlt.rcond() > 1e-13) || !ldlt.isPositive())
    throw SingularSystemError(std::string(what) +
                              ": system is singular or ill-conditioned; use a regularisation lambda > 0");
  Eigen::VectorXd x = ldlt.solve(b);
  if (!x.allFinite()) throw SingularSystemError(std::string(what) + ": solve produced non-finite values; use lambda > 0");
  return x;
}

}  // namespace

Family parse_family(std::string_view name) {
  std::string n = lower(name);
  if (n == "rr") return Family::RR;
  if (n == "svr") return Family::SVR;
  if (n == "krr") return Family::KRR;
  if (n == "ksvr") return Family::KSVR;
  if (n == "rf") return Family::RF;
  throw ValidationError("unknown model family '" + std::string(name) + "'");
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::RR: return "RR";
    case Family::SVR: return "SVR";
    case Family::KRR: return "KRR";
    case Family::KSVR: return "KSVR";
    case Family::RF: return "RF";
  }
  return "?";
}

void ModelSpec::validate() const {
  auto fail = [&](const std::string& what) {
    throw ValidationError(std::string(to_string(family)) + ": " + what);
  };
  switch (family) {
    case Family::RR:
    case Family::KRR:
      if (!(hp.lambda >= 0.0)) fail("lambda must be >= 0");
      break;
    case Family::SVR:
    case Family::KSVR:
      if (!(hp.C > 0.0)) fail("C must be > 0");
      if (!(hp.epsilon >= 0.0)) fail("epsilon must be >= 0");
      if (hp.max_epochs < 1) fail("max_epochs must be >= 1");
      break;
    case Family::RF:
      if (hp.trees < 1) fail("trees must be >= 1");
      if (hp.min_leaf < 1) fail("min_leaf must be >= 1");
      if (hp.max_features && *hp.max_features < 1) fail("max_features must be >= 1");
      if (hp.max_depth && *hp.max_depth < 0) fail("max_depth must be >= 0");
      break;
  }
  if ((family == Family::KRR || family == Family::KSVR) && hp.gamma && !(*hp.gamma > 0.0))
    fail("gamma must be > 0");
}

std::string ModelSpec::describe() const { return to_json(*this).dump(); }

Scaler Scaler::fit(const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw ValidationError("cannot fit a scaler on an empty matrix");
  Scaler s;
  s.mean = X.colwise().mean().transpose();
  s.std.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double var = (X.col(j).array() - s.mean[j]).square().mean();
    double sd = std::sqrt(var);
    s.std[j] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[j])) ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size()) throw SignatureMismatchError("scaler expects " + std::to_string(mean.size()) + " columns");
  Eigen::MatrixXd Z = X.rowwise() - mean.transpose();
  // Constant training columns map to exactly 0 on the training data.
  return Z.array().rowwise() / std.transpose().array();
}

Eigen::MatrixXd Scaler::invert(const Eigen::MatrixXd& Z) const {
  Eigen::MatrixXd X = Z.array().rowwise() * std.transpose().array();
  return X.rowwise() + mean.transpose();
}

TrainedModel train(const FeatureMatrix& X, const Eigen::VectorXd& y, const ModelSpec& spec) {
  spec.validate();
  if (X.rows() != y.size()) throw ValidationError("train: rows(X) != len(y)");
  if (X.rows() < 2) throw ValidationError("train: need at least 2 observations");
  if (!X.values.allFinite() || !y.allFinite()) throw ValidationError("train: non-finite input");

  TrainedModel m;
  m.spec = spec;
  m.features = X.columns;
  m.scaler = Scaler::fit(X.values);
  const Eigen::MatrixXd Z = m.scaler.apply(X.values);
  const Eigen::Index p = Z.cols();
  const auto& hp = spec.hp;

  switch (spec.family) {
    case Family::RR: {
      const double ybar = y.mean();
      Eigen::MatrixXd A = Z.transpose() * Z;
      A.diagonal().array() += hp.lambda;
      m.weights = solve_spd(A, Z.transpose() * (y.array() - ybar).matrix(), "ridge regression");
      // Scaled columns have zero mean, so the unpenalised intercept is mean(y).
      m.intercept = ybar;
      break;
    }
    case Family::KRR: {
      m.gamma = resolved_gamma(hp, p);
      Eigen::MatrixXd K = kernels::gram(Z, hp.kernel, m.gamma);
      K.diagonal().array() += hp.lambda;
      m.alpha = solve_spd(K, y, "kernel ridge regression");
      m.support = Z;
      break;
    }
    case Family::SVR: {
      SvrOptions o{hp.C, hp.epsilon, hp.max_epochs, hp.tolerance, 0.0};
      auto fit = fit_linear_svr(Z, y, o);
      m.weights = fit.coef;
      m.intercept = fit.bias;
      m.objective_trace = std::move(fit.objective_trace);
      break;
    }
    case Family::KSVR: {
      m.gamma = resolved_gamma(hp, p);
      Eigen::MatrixXd K = kernels::gram(Z, hp.kernel, m.gamma);
      SvrOptions o{hp.C, hp.epsilon, hp.max_epochs, hp.tolerance, 0.0};
      auto fit = fit_kernel_svr(K, y, o);
      m.alpha = fit.coef;
      m.intercept = fit.bias;
      m.support = Z;
      m.objective_trace = std::move(fit.objective_trace);
      break;
    }
    case Family::RF: {
      ForestParams fp;
      fp.trees = hp.trees;
      fp.max_features = hp.max_features ? *hp.max_features : static_cast<int>((p + 2) / 3);
      fp.min_leaf = hp.min_leaf;
      fp.bootstrap = hp.bootstrap;
      fp.max_depth = hp.max_depth;
      fp.seed = spec.seed;
      m.trees = grow_forest(Z, y, fp);
      break;
    }
  }
  return m;
}

Eigen::VectorXd predict_values(const TrainedModel& m, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd Z = m.scaler.apply(X);
  switch (m.family()) {
    case Family::RR:
    case Family::SVR:
      return (Z * m.weights).array() + m.intercept;
    case Family::KRR:
    case Family::KSVR: {
      Eigen::MatrixXd K = kernels::cross(Z, m.support, m.spec.hp.kernel, m.gamma);
      Eigen::VectorXd out = K * m.alpha;
      return out.array() + m.intercept;
    }
    case Family::RF: {
      Eigen::VectorXd out(Z.rows());
      for (Eigen::Index i = 0; i < Z.rows(); ++i) out[i] = predict_forest(m.trees, Z.row(i));
      return out;
    }
  }
  throw ValidationError("unknown model family");
}

Eigen::VectorXd predict(const TrainedModel& m, const FeatureMatrix& X) {
  if (X.columns != m.features) {
    std::ostringstream msg;
    msg << "feature signature mismatch: model has " << m.features.size() << " columns, input has "
        << X.columns.size();
    for (std::size_t i = 0; i < std::min(X.columns.size(), m.features.size()); ++i)
      if (X.columns[i] != m.features[i]) {
        msg << "; first difference at column " << i << " ('" << m.features[i] << "' vs '" << X.columns[i] << "')";
        break;
      }
    throw SignatureMismatchError(msg.str());
  }
  return predict_values(m, X.values);
}

namespace {

json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json node_to_json(const RegressionTree& t, int i) {
  const auto& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return json{{"value", n.value}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"value", n.value},
              {"left", node_to_json(t, n.left)},
              {"right", node_to_json(t, n.right)}};
}

int node_from_json(const json& j, RegressionTree& t) {
  int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  t.nodes.back().value = j.at("value").get<double>();
  if (j.contains("feature")) {
    t.nodes[id].feature = j.at("feature").get<int>();
    t.nodes[id].threshold = j.at("threshold").get<double>();
    int l = node_from_json(j.at("left"), t);
    int r = node_from_json(j.at("right"), t);
    t.nodes[id].left = l;
    t.nodes[id].right = r;
  }
  return id;
}

}  // namespace

json to_json(const ModelSpec& s) {
  const auto& h = s.hp;
  json hp = {{"lambda", h.lambda},
             {"C", h.C},
             {"epsilon", h.epsilon},
             {"gamma", h.gamma ? json(*h.gamma) : json(nullptr)},
             {"kernel", h.kernel == kernels::KernelKind::rbf ? "rbf" : "linear"},
             {"trees", h.trees},
             {"max_features", h.max_features ? json(*h.max_features) : json(nullptr)},
             {"min_leaf", h.min_leaf},
             {"bootstrap", h.bootstrap},
             {"max_depth", h.max_depth ? json(*h.max_depth) : json(nullptr)},
             {"max_epochs", h.max_epochs},
             {"tolerance", h.tolerance}};
  return json{{"family", std::string(to_string(s.family))}, {"hyperparameters", hp}, {"seed", s.seed}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.family = parse_family(j.at("family").get<std::string>());
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("hyperparameters")) {
    const auto& h = j["hyperparameters"];
    auto& hp = s.hp;
    hp.lambda = h.value("lambda", hp.lambda);
    hp.C = h.value("C", hp.C);
    hp.epsilon = h.value("epsilon", hp.epsilon);
    if (h.contains("gamma") && !h["gamma"].is_null()) hp.gamma = h["gamma"].get<double>();
    if (h.contains("kernel"))
      hp.kernel = h["kernel"].get<std::string>() == "linear" ? kernels::KernelKind::linear : kernels::KernelKind::rbf;
    hp.trees = h.value("trees", hp.trees);
    if (h.contains("max_features") && !h["max_features"].is_null()) hp.max_features = h["max_features"].get<int>();
    hp.min_leaf = h.value("min_leaf", hp.min_leaf);
    hp.bootstrap = h.value("bootstrap", hp.bootstrap);
    if (h.contains("max_depth") && !h["max_depth"].is_null()) hp.max_depth = h["max_depth"].get<int>();
    hp.max_epochs = h.value("max_epochs", hp.max_epochs);
    hp.tolerance = h.value("tolerance", hp.tolerance);
  }
  s.validate();
  return s;
}

json to_json(const TrainedModel& m) {
  json params;
  switch (m.family()) {
    case Family::RR:
    case Family::SVR:
      params = {{"weights", vec_to_json(m.weights)}, {"intercept", m.intercept}};
      break;
    case Family::KRR:
    case Family::KSVR: {
      json support = json::array();
      for (Eigen::Index i = 0; i < m.support.rows(); ++i) support.push_back(vec_to_json(m.support.row(i).transpose()));
      params = {{"alpha", vec_to_json(m.alpha)}, {"intercept", m.intercept}, {"gamma", m.gamma}, {"support", support}};
      break;
    }
    case Family::RF: {
      json trees = json::array();
      for (const auto& t : m.trees) trees.push_back(node_to_json(t, 0));
      params = {{"trees", trees}};
      break;
    }
  }
  return json{{"format", "engage-model"},
              {"version", kModelFormatVersion},
              {"spec", to_json(m.spec)},
              {"features", m.features},
              {"scaler", {{"mean", vec_to_json(m.scaler.mean)}, {"std", vec_to_json(m.scaler.std)}}},
              {"parameters", params}};
}

TrainedModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "engage-model") throw ValidationError("not an engage model file");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw ValidationError("unsupported model format version " + j.at("version").dump());
    TrainedModel m;
    m.spec = spec_from_json(j.at("spec"));
    m.features = j.at("features").get<std::vector<std::string>>();
    m.scaler.mean = vec_from_json(j.at("scaler").at("mean"));
    m.scaler.std = vec_from_json(j.at("scaler").at("std"));
    const auto& p = j.at("parameters");
    switch (m.family()) {
      case Family::RR:
      case Family::SVR:
        m.weights = vec_from_json(p.at("weights"));
        m.intercept = p.at("intercept").get<double>();
        break;
      case Family::KRR:
      case Family::KSVR: {
        m.alpha = vec_from_json(p.at("alpha"));
        m.intercept = p.at("intercept").get<double>();
        m.gamma = p.at("gamma").get<double>();
        const auto& s = p.at("support");
        m.support.resize(static_cast<Eigen::Index>(s.size()), m.scaler.mean.size());
        for (std::size_t i = 0; i < s.size(); ++i) m.support.row(static_cast<Eigen::Index>(i)) = vec_from_json(s[i]).transpose();
        break;
      }
      case Family::RF:
        for (const auto& t : p.at("trees")) {
          RegressionTree tree;
          node_from_json(t, tree);
          m.trees.push_back(std::move(tree));
        }
        break;
    }
    if (static_cast<std::size_t>(m.scaler.mean.size()) != m.features.size())
      throw ValidationError("scaler and feature list disagree");
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model JSON: ") + e.what());
  }
}

void save_model(const fs::path& path, const TrainedModel& model) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << to_json(model).dump() << '\n';
}

TrainedModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return model_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

std::vector<ModelSpec> default_grid(Family family, int p, std::uint64_t seed) {
  std::vector<ModelSpec> grid;
  auto add = [&](auto&& tweak) {
    ModelSpec s;
    s.family = family;
    s.seed = seed;
    tweak(s.hp);
    grid.push_back(s);
  };
  const double inv_p = 1.0 / static_cast<double>(std::max(p, 1));
  switch (family) {
    case Family::RR:
      for (double l : {0.01, 0.1, 1.0, 10.0}) add([&](Hyperparameters& h) { h.lambda = l; });
      break;
    case Family::KRR:
      for (double l : {0.01, 0.1, 1.0, 10.0})
        for (double g : {0.1, 1.0, 10.0})
          add([&](Hyperparameters& h) {
            h.lambda = l;
            h.gamma = g * inv_p;
          });
      break;
    case Family::SVR:
      for (double c : {0.1, 1.0, 10.0})
        for (double e : {0.01, 0.1})
          add([&](Hyperparameters& h) {
            h.C = c;
            h.epsilon = e;
          });
      break;
    case Family::KSVR:
      for (double c : {0.1, 1.0, 10.0})
        for (double e : {0.01, 0.1})
          for (double g : {0.1, 1.0, 10.0})
            add([&](Hyperparameters& h) {
              h.C = c;
              h.epsilon = e;
              h.gamma = g * inv_p;
            });
      break;
    case Family::RF:
      for (int leaf : {1, 5})
        add([&](Hyperparameters& h) {
          h.trees = 500;
          h.max_features = (p + 2) / 3;
          h.min_leaf = leaf;
        });
      break;
  }
  return grid;
}

std::vector<double> complexity_key(const ModelSpec& s) {
  const auto& h = s.hp;
  switch (s.family) {
    case Family::RR: return {-h.lambda};
    case Family::KRR: return {-h.lambda, h.gamma.value_or(0.0)};
    case Family::SVR: return {h.C, -h.epsilon};
    case Family::KSVR: return {h.C, -h.epsilon, h.gamma.value_or(0.0)};
    case Family::RF: return {static_cast<double>(h.trees), -static_cast<double>(h.min_leaf)};
  }
  return {};
}

}  // namespace engage
