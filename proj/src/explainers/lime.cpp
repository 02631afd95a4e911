#include <cmath>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/rng.hpp"
#include "xaistudy/explainers/explainers.hpp"

namespace xaistudy::explainers {

RidgeFit weighted_ridge(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                        double ridge) {
  if (z.rows() != y.size() || y.size() != weights.size()) throw ValidationError("ridge inputs have mismatched lengths");
  if (z.rows() == 0) throw ValidationError("ridge fit needs at least one sample");
  if (!(ridge >= 0.0)) throw ValidationError("ridge must be >= 0");
  const double wsum = weights.sum();
  if (!(wsum > 0.0)) throw NumericError("singular_system", "all sample weights are zero");

  // Center with weighted means; the intercept then drops out of the penalty.
  const Eigen::RowVectorXd zbar = (weights.transpose() * z) / wsum;
  const double ybar = weights.dot(y) / wsum;
  const Eigen::MatrixXd zc = z.rowwise() - zbar;
  const Eigen::VectorXd yc = y.array() - ybar;

  Eigen::MatrixXd gram = zc.transpose() * weights.asDiagonal() * zc;
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd rhs = zc.transpose() * weights.asDiagonal() * yc;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-13 || ldlt.vectorD().minCoeff() <= 1e-13 * scale) {
    throw NumericError("singular_system",
                       "weighted surrogate system is singular; use lime_ridge > 0 (duplicate or constant columns)");
  }
  RidgeFit fit;
  fit.coefficients = ldlt.solve(rhs);
  fit.intercept = ybar - zbar.dot(fit.coefficients);
  if (!fit.coefficients.allFinite()) throw NumericError("singular_system", "surrogate fit is not finite; use lime_ridge > 0");
  return fit;
}

Attribution lime(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config) {
  const auto d = static_cast<std::size_t>(x.size());
  if (d != model.input_dim())
    throw ValidationError("dimension_mismatch", "input has dimension " + std::to_string(d) + ", model expects " +
                                                    std::to_string(model.input_dim()));
  config.validate(d);
  const int n = config.lime_samples;
  const double width = config.kernel_width(d);

  Rng rng(derive_seed(config.seed, "lime"));
  Eigen::MatrixXd z(n, x.size());
  for (int k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < x.size(); ++i) z(k, i) = x[i] + rng.normal();

  Eigen::VectorXd y = model.logits(z);
  if (config.target == models::Target::probability) y = y.unaryExpr([](double v) { return models::sigmoid(v); });
  Eigen::VectorXd w(n);
  for (int k = 0; k < n; ++k) w[k] = std::exp(-(z.row(k).transpose() - x).squaredNorm() / (width * width));

  const RidgeFit fit = weighted_ridge(z, y, w, config.lime_ridge);
  Attribution a;
  a.method = to_string(config.method);
  a.scores = fit.coefficients;
  const auto p = model.predict(x);
  a.predicted_label = p.label;
  a.predicted_probability = p.probability;
  a.config_fingerprint = config.fingerprint();
  return a;
}

}  // namespace xaistudy::explainers
