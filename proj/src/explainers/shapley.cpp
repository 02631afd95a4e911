#include <bit>
#include <cmath>
#include <numeric>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/rng.hpp"
#include "xaistudy/explainers/explainers.hpp"

namespace xaistudy::explainers {

namespace {

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Shapley kernel weight for a coalition of size s among d players.
double kernel_weight(std::size_t d, std::size_t s) {
  return static_cast<double>(d - 1) / (binomial(d, s) * static_cast<double>(s) * static_cast<double>(d - s));
}

Attribution finish(const models::TrainedModel& model, const Eigen::VectorXd& x, std::string method,
                   Eigen::VectorXd phi, double phi0) {
  Attribution a;
  a.method = std::move(method);
  a.scores = std::move(phi);
  a.base_value = phi0;
  const auto p = model.predict(x);
  a.predicted_label = p.label;
  a.predicted_probability = p.probability;
  return a;
}

// Solves min sum_k w_k (y_k - m_k . phi)^2 subject to sum(phi) = total, by
// substituting phi_d = total - sum_{i<d} phi_i.
Eigen::VectorXd constrained_wls(const Eigen::MatrixXd& masks, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                                double total) {
  const Eigen::Index d = masks.cols();
  Eigen::VectorXd phi(d);
  if (d == 1) {
    phi[0] = total;
    return phi;
  }
  const Eigen::VectorXd last = masks.col(d - 1);
  const Eigen::MatrixXd a = masks.leftCols(d - 1).colwise() - last;
  const Eigen::VectorXd b = y - last * total;
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd aw = sw.asDiagonal() * a;
  const Eigen::VectorXd bw = sw.cwiseProduct(b);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(aw);
  if (qr.rank() < d - 1)
    throw NumericError("singular_system", "coalition design is rank deficient; raise shap_coalition_samples");
  const Eigen::VectorXd head = qr.solve(bw);
  phi.head(d - 1) = head;
  phi[d - 1] = total - head.sum();
  return phi;
}

}  // namespace

CoalitionGame::CoalitionGame(const models::TrainedModel& model, const Eigen::VectorXd& x,
                             const Eigen::MatrixXd& background, models::Target target)
    : model_(model), x_(x), background_(background), target_(target) {
  if (background_.rows() == 0) throw ValidationError("empty_background", "SHAP background is empty");
  if (background_.cols() != x_.size() || static_cast<std::size_t>(x_.size()) != model.input_dim())
    throw ValidationError("dimension_mismatch", "background, input and model dimensions disagree");
}

Eigen::VectorXd CoalitionGame::values(const Eigen::MatrixXi& masks) const {
  const Eigen::Index m = background_.rows();
  const Eigen::Index d = x_.size();
  Eigen::VectorXd out(masks.rows());
  // Chunk coalitions so the hybrid batch stays modest in memory.
  const Eigen::Index chunk = std::max<Eigen::Index>(1, 65536 / std::max<Eigen::Index>(m, 1));
  for (Eigen::Index start = 0; start < masks.rows(); start += chunk) {
    const Eigen::Index count = std::min(chunk, masks.rows() - start);
    Eigen::MatrixXd hybrid(count * m, d);
    for (Eigen::Index c = 0; c < count; ++c) {
      for (Eigen::Index b = 0; b < m; ++b) {
        auto row = hybrid.row(c * m + b);
        for (Eigen::Index i = 0; i < d; ++i) row[i] = masks(start + c, i) ? x_[i] : background_(b, i);
      }
    }
    Eigen::VectorXd f = model_.logits(hybrid);
    if (target_ == models::Target::probability) f = f.unaryExpr([](double v) { return models::sigmoid(v); });
    for (Eigen::Index c = 0; c < count; ++c) out[start + c] = f.segment(c * m, m).mean();
  }
  return out;
}

double CoalitionGame::value(const std::vector<bool>& mask) const {
  Eigen::MatrixXi m(1, x_.size());
  for (Eigen::Index i = 0; i < x_.size(); ++i) m(0, i) = mask[static_cast<std::size_t>(i)] ? 1 : 0;
  return values(m)[0];
}

double CoalitionGame::full_value() const { return model_.output(x_, target_); }

double CoalitionGame::empty_value() const {
  return values(Eigen::MatrixXi::Zero(1, x_.size()))[0];
}

Attribution kernel_shap(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config) {
  const auto d = static_cast<std::size_t>(x.size());
  if (d != model.input_dim())
    throw ValidationError("dimension_mismatch", "input has dimension " + std::to_string(d) + ", model expects " +
                                                    std::to_string(model.input_dim()));
  config.validate(d);
  const CoalitionGame game(model, x, config.shap_background, config.target);
  const double phi0 = game.empty_value();
  const double fx = game.full_value();
  if (d == 1) {
    Eigen::VectorXd phi(1);
    phi[0] = fx - phi0;
    Attribution a = finish(model, x, to_string(config.method), phi, phi0);
    a.config_fingerprint = config.fingerprint();
    return a;
  }

  const double interior = std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(d, 62))) - 2.0;
  const bool enumerate = config.shap_exact || (d < 62 && interior <= static_cast<double>(config.coalition_budget(d)));

  Eigen::MatrixXi masks;
  Eigen::VectorXd weights;
  if (enumerate) {
    const std::size_t count = (std::size_t{1} << d) - 2;
    masks.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(d));
    weights.resize(static_cast<Eigen::Index>(count));
    for (std::size_t s = 1; s <= count; ++s) {
      const auto row = static_cast<Eigen::Index>(s - 1);
      std::size_t size = 0;
      for (std::size_t i = 0; i < d; ++i) {
        const int bit = static_cast<int>((s >> i) & 1U);
        masks(row, static_cast<Eigen::Index>(i)) = bit;
        size += static_cast<std::size_t>(bit);
      }
      weights[row] = kernel_weight(d, size);
    }
  } else {
    // Sizes drawn proportionally to the total kernel mass of each size class;
    // each draw is then weighted equally. Complements are added in pairs.
    std::vector<double> size_mass(d);
    for (std::size_t s = 1; s < d; ++s) size_mass[s] = static_cast<double>(d - 1) / (static_cast<double>(s) * static_cast<double>(d - s));
    const double total_mass = std::accumulate(size_mass.begin(), size_mass.end(), 0.0);
    const int pairs = (config.coalition_budget(d) + 1) / 2;
    masks.resize(2 * pairs, static_cast<Eigen::Index>(d));
    weights = Eigen::VectorXd::Ones(2 * pairs);
    Rng rng(derive_seed(config.seed, "kernel-shap"));
    std::vector<std::size_t> perm(d);
    for (int p = 0; p < pairs; ++p) {
      double u = rng.uniform() * total_mass;
      std::size_t size = 1;
      while (size + 1 < d && u >= size_mass[size]) {
        u -= size_mass[size];
        ++size;
      }
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      for (std::size_t i = 0; i < size; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.index(d - i));
        std::swap(perm[i], perm[j]);
      }
      masks.row(2 * p).setZero();
      for (std::size_t i = 0; i < size; ++i) masks(2 * p, static_cast<Eigen::Index>(perm[i])) = 1;
      masks.row(2 * p + 1) = Eigen::RowVectorXi::Ones(static_cast<Eigen::Index>(d)) - masks.row(2 * p);
    }
  }

  const Eigen::VectorXd v = game.values(masks);
  const Eigen::VectorXd phi =
      constrained_wls(masks.cast<double>(), v.array() - phi0, weights, fx - phi0);
  Attribution a = finish(model, x, to_string(config.method), phi, phi0);
  a.config_fingerprint = config.fingerprint();
  return a;
}

Attribution exact_shapley_oracle(const models::TrainedModel& model, const Eigen::VectorXd& x,
                                 const Eigen::MatrixXd& background, models::Target target) {
  const auto d = static_cast<std::size_t>(x.size());
  if (d > kMaxOraclePlayers)
    throw ValidationError("too_many_players", "exact Shapley oracle supports at most " +
                                                  std::to_string(kMaxOraclePlayers) + " features, got " +
                                                  std::to_string(d));
  const CoalitionGame game(model, x, background, target);
  const std::size_t count = std::size_t{1} << d;
  Eigen::MatrixXi masks(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(d));
  for (std::size_t s = 0; s < count; ++s)
    for (std::size_t i = 0; i < d; ++i)
      masks(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = static_cast<int>((s >> i) & 1U);
  const Eigen::VectorXd v = game.values(masks);

  std::vector<double> factorial(d + 1, 1.0);
  for (std::size_t i = 1; i <= d; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t s = 0; s < count; ++s) {
      if (s & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(s));
      const double w = factorial[size] * factorial[d - size - 1] / factorial[d];
      phi[static_cast<Eigen::Index>(i)] += w * (v[static_cast<Eigen::Index>(s | bit)] - v[static_cast<Eigen::Index>(s)]);
    }
  }
  return finish(model, x, "exact_shapley", phi, v[0]);
}

}  // namespace xaistudy::explainers
