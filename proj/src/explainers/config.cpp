#include "xaistudy/explainers/config.hpp"

#include <cmath>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/hash.hpp"
#include "xaistudy/common/rng.hpp"

namespace xaistudy::explainers {

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::grad: return "grad";
    case Method::grad_x_input: return "grad_x_input";
    case Method::smoothgrad: return "smoothgrad";
    case Method::integrated_gradients: return "integrated_gradients";
    case Method::lime: return "lime";
    case Method::kernel_shap: return "kernel_shap";
  }
  return "grad";
}

Method parse_method(const std::string& s) {
  for (auto m : {Method::grad, Method::grad_x_input, Method::smoothgrad, Method::integrated_gradients, Method::lime,
                 Method::kernel_shap})
    if (to_string(m) == s) return m;
  throw ValidationError("unknown explainer method '" + s + "'");
}

int ExplainerConfig::coalition_budget(std::size_t d) const {
  return shap_coalition_samples > 0 ? shap_coalition_samples : static_cast<int>(2 * d + 2048);
}

double ExplainerConfig::kernel_width(std::size_t d) const {
  return lime_kernel_width ? *lime_kernel_width : 0.75 * std::sqrt(static_cast<double>(d));
}

void ExplainerConfig::validate(std::size_t d) const {
  switch (method) {
    case Method::grad:
    case Method::grad_x_input:
      break;
    case Method::smoothgrad:
      if (sg_samples < 1) throw ValidationError("sg_samples must be >= 1");
      if (!(sg_sigma > 0.0)) throw ValidationError("sg_sigma must be > 0");
      if (sg_column_scale.size() != 0 && static_cast<std::size_t>(sg_column_scale.size()) != d)
        throw ValidationError("dimension_mismatch", "sg_column_scale length does not match the input");
      break;
    case Method::integrated_gradients:
      if (ig_steps < 2) throw ValidationError("ig_steps must be >= 2");
      if (static_cast<std::size_t>(baseline.size()) != d)
        throw ValidationError("dimension_mismatch", "baseline has dimension " + std::to_string(baseline.size()) +
                                                        ", input has " + std::to_string(d));
      break;
    case Method::lime:
      if (lime_samples < static_cast<int>(d) + 2)
        throw ValidationError("lime_samples must be >= dimension + 2 (" + std::to_string(d + 2) + ")");
      if (!(kernel_width(d) > 0.0)) throw ValidationError("lime_kernel_width must be > 0");
      if (!(lime_ridge >= 0.0)) throw ValidationError("lime_ridge must be >= 0");
      break;
    case Method::kernel_shap:
      if (shap_background.rows() == 0) throw ValidationError("empty_background", "SHAP background is empty");
      if (static_cast<std::size_t>(shap_background.cols()) != d)
        throw ValidationError("dimension_mismatch", "SHAP background width does not match the input");
      if (shap_exact && d > kMaxExactPlayers)
        throw ValidationError("too_many_players", "exact SHAP enumeration is capped at " +
                                                      std::to_string(kMaxExactPlayers) + " features, got " +
                                                      std::to_string(d));
      if (!shap_exact && coalition_budget(d) < static_cast<int>(2 * d + 2))
        throw ValidationError("shap_coalition_samples must be >= 2d + 2");
      break;
  }
}

Json ExplainerConfig::to_json() const {
  Json j{{"method", to_string(method)}, {"target", models::to_string(target)}, {"seed", seed}};
  switch (method) {
    case Method::grad:
    case Method::grad_x_input:
      break;
    case Method::smoothgrad:
      j["sg_sigma"] = sg_sigma;
      j["sg_samples"] = sg_samples;
      if (sg_column_scale.size()) j["sg_column_scale"] = to_vec(sg_column_scale);
      break;
    case Method::integrated_gradients:
      j["ig_steps"] = ig_steps;
      j["baseline"] = to_vec(baseline);
      break;
    case Method::lime:
      j["lime_samples"] = lime_samples;
      if (lime_kernel_width) j["lime_kernel_width"] = *lime_kernel_width;
      j["lime_ridge"] = lime_ridge;
      break;
    case Method::kernel_shap: {
      Json rows = Json::array();
      for (Eigen::Index r = 0; r < shap_background.rows(); ++r) rows.push_back(to_vec(shap_background.row(r)));
      j["shap_background"] = rows;
      j["shap_coalition_samples"] = shap_coalition_samples;
      j["shap_exact"] = shap_exact;
      break;
    }
  }
  return j;
}

ExplainerConfig ExplainerConfig::from_json(const Json& doc) {
  ExplainerConfig c;
  try {
    c.method = parse_method(doc.at("method").get<std::string>());
    c.target = models::parse_target(doc.value("target", std::string("logit")));
    c.seed = doc.value("seed", std::uint64_t{0});
    c.sg_sigma = doc.value("sg_sigma", c.sg_sigma);
    c.sg_samples = doc.value("sg_samples", c.sg_samples);
    if (doc.contains("sg_column_scale")) c.sg_column_scale = from_vec(doc["sg_column_scale"].get<std::vector<double>>());
    c.ig_steps = doc.value("ig_steps", c.ig_steps);
    if (doc.contains("baseline")) c.baseline = from_vec(doc["baseline"].get<std::vector<double>>());
    c.lime_samples = doc.value("lime_samples", c.lime_samples);
    if (doc.contains("lime_kernel_width")) c.lime_kernel_width = doc["lime_kernel_width"].get<double>();
    c.lime_ridge = doc.value("lime_ridge", c.lime_ridge);
    if (doc.contains("shap_background")) {
      const auto rows = doc["shap_background"].get<std::vector<std::vector<double>>>();
      if (!rows.empty()) {
        c.shap_background.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != rows[0].size()) throw SchemaError("ragged SHAP background");
          c.shap_background.row(static_cast<Eigen::Index>(r)) = from_vec(rows[r]).transpose();
        }
      }
    }
    c.shap_coalition_samples = doc.value("shap_coalition_samples", 0);
    c.shap_exact = doc.value("shap_exact", false);
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("explainer config: ") + e.what());
  }
  return c;
}

std::string ExplainerConfig::fingerprint() const { return xaistudy::fingerprint(to_json().dump()); }

ExplainerConfig default_config(Method method, const tabular::Encoder& encoder, const tabular::Dataset& dataset,
                               std::uint64_t seed) {
  const auto train = dataset.members(tabular::Split::train);
  if (train.empty()) throw ValidationError("default explainer config needs a non-empty train split");
  const Eigen::MatrixXd x = encoder.encode_rows(train);
  ExplainerConfig c;
  c.method = method;
  c.seed = seed;
  switch (method) {
    case Method::integrated_gradients:
      c.baseline = x.colwise().mean().transpose();
      break;
    case Method::smoothgrad: {
      Eigen::VectorXd range = (x.colwise().maxCoeff() - x.colwise().minCoeff()).transpose();
      for (Eigen::Index i = 0; i < range.size(); ++i)
        if (!(range[i] > 0.0)) range[i] = 1.0;
      c.sg_column_scale = range;
      break;
    }
    case Method::kernel_shap: {
      const std::size_t m = std::min<std::size_t>(100, train.size());
      std::vector<std::size_t> idx(train.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      Rng rng(derive_seed(seed, "shap-background"));
      rng.shuffle(idx);
      c.shap_background.resize(static_cast<Eigen::Index>(m), x.cols());
      for (std::size_t i = 0; i < m; ++i) c.shap_background.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
      break;
    }
    default:
      break;
  }
  return c;
}

}  // namespace xaistudy::explainers
