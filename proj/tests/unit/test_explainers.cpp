#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "workspace.hpp"
#include "xaistudy/common/clock.hpp"
#include "xaistudy/common/error.hpp"
#include "xaistudy/explainers/explainers.hpp"
#include "xaistudy/explainers/precompute.hpp"
#include "xaistudy/models/training.hpp"

using namespace xaistudy;
using namespace xaistudy::explainers;
using models::Target;
using models::TrainedModel;

namespace {

struct Linear {
  Eigen::VectorXd w, x, x0, b;
  TrainedModel model;
  Linear() : w(5), x(5), x0(5), b(5), model(TrainedModel::logistic(Eigen::VectorXd::Zero(5), 0.0)) {
    w << 0.7, -1.3, 2.1, 0.0, 0.4;
    x << 1.0, -0.5, 0.25, 3.0, -2.0;
    x0 << 0.1, 0.2, -0.3, 0.5, 0.0;
    b << -1.0, 0.5, 0.5, 1.0, 2.0;
    model = TrainedModel::logistic(w, -0.3);
  }
};

ExplainerConfig base(Method m) {
  ExplainerConfig c;
  c.method = m;
  c.target = Target::logit;
  c.seed = 5;
  return c;
}

double max_abs(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Neural model over d standard-normal inputs with a nonlinear label rule.
TrainedModel neural_d(int d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n01;
  const int n = 300;
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXi y(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) x(r, c) = n01(gen);
    y[r] = (x(r, 0) * x(r, 1) + 0.5 * x(r, 2) - 0.3 * x(r, d - 1) > 0) ? 1 : 0;
  }
  auto spec = models::ModelSpec::neural_defaults();
  spec.hidden_sizes = {12, 6};
  spec.epochs = 200;
  spec.seed = seed;
  return models::train_on_matrix(x, y, spec, "fixture-" + std::to_string(seed));
}

}  // namespace

TEST_CASE("linear exactness of every gradient method and of KernelSHAP") {
  const Linear L;
  CHECK(max_abs(vanilla_gradient(L.model, L.x, base(Method::grad)).scores, L.w) <= 1e-8);
  CHECK(max_abs(gradient_x_input(L.model, L.x, base(Method::grad_x_input)).scores, L.w.cwiseProduct(L.x)) <= 1e-8);
  auto sg = base(Method::smoothgrad);
  sg.sg_samples = 50;
  CHECK(max_abs(smoothgrad(L.model, L.x, sg).scores, L.w) <= 1e-8);
  auto ig = base(Method::integrated_gradients);
  ig.baseline = L.x0;
  CHECK(max_abs(integrated_gradients(L.model, L.x, ig).scores, L.w.cwiseProduct(L.x - L.x0)) <= 1e-8);
  auto shap = base(Method::kernel_shap);
  shap.shap_background = L.b.transpose();
  const auto a = kernel_shap(L.model, L.x, shap);
  CHECK(max_abs(a.scores, L.w.cwiseProduct(L.x - L.b)) <= 1e-8);
  shap.shap_exact = true;
  CHECK(max_abs(kernel_shap(L.model, L.x, shap).scores, L.w.cwiseProduct(L.x - L.b)) <= 1e-8);
}

TEST_CASE("LIME recovers a linear logit") {
  const Linear L;
  auto c = base(Method::lime);
  c.lime_samples = 4000;
  const auto a = lime(L.model, L.x, c);
  CHECK(max_abs(a.scores, L.w) <= 1e-2);
}

TEST_CASE("weighted ridge") {
  Eigen::MatrixXd z(4, 1);
  z << 0, 1, 2, 3;
  Eigen::VectorXd y(4);
  y << 1, 3, 5, 7;
  const auto fit = weighted_ridge(z, y, Eigen::VectorXd::Ones(4), 0.0);
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.coefficients[0] == doctest::Approx(2.0));
  Eigen::MatrixXd singular(3, 2);
  singular << 1, 1, 2, 2, 3, 3;
  CHECK_THROWS_AS(weighted_ridge(singular, Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3), 0.0), NumericError);
}

TEST_CASE("integrated gradients on a neural model: finer grids close the gap") {
  const auto m = neural_d(6, 3);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n01;
  auto c = base(Method::integrated_gradients);
  c.baseline = Eigen::VectorXd::Zero(6);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(6);
    for (int k = 0; k < 6; ++k) x[k] = n01(gen);
    const double delta = m.logit(x) - m.logit(c.baseline);
    auto gap = [&](int steps) {
      auto cc = c;
      cc.ig_steps = steps;
      return std::abs(integrated_gradients(m, x, cc).scores.sum() - delta);
    };
    CHECK(gap(4096) <= gap(16));
    CHECK(gap(4096) <= 1e-3 * std::max(1.0, std::abs(delta)));
  }
}

TEST_CASE("SmoothGrad agrees with an independent Monte-Carlo estimate") {
  const auto m = neural_d(4, 8);
  Eigen::VectorXd x(4);
  x << 0.3, -0.2, 0.8, 0.1;
  auto c = base(Method::smoothgrad);
  c.sg_sigma = 0.3;
  c.sg_column_scale = Eigen::Vector4d(1.0, 2.0, 1.0, 0.5);
  c.sg_samples = 20000;
  const auto got = smoothgrad(m, x, c).scores;

  std::mt19937_64 gen(77);
  std::normal_distribution<double> n01;
  const int n = 20000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4), sq = Eigen::VectorXd::Zero(4);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd z = x;
    for (int i = 0; i < 4; ++i) z[i] += c.sg_sigma * c.sg_column_scale[i] * n01(gen);
    const Eigen::VectorXd g = m.input_gradient(z, Target::logit);
    mean += g;
    sq += g.cwiseProduct(g);
  }
  mean /= n;
  const Eigen::VectorXd var = sq / n - mean.cwiseProduct(mean);
  for (int i = 0; i < 4; ++i) {
    // Two independent estimates: their difference has sd sqrt(2) * se.
    const double se = std::sqrt(std::max(var[i], 0.0) / n);
    CHECK(std::abs(got[i] - mean[i]) <= 5.0 * std::sqrt(2.0) * se + 1e-12);
  }
  CHECK(smoothgrad(m, x, c).scores == got);
}

TEST_CASE("KernelSHAP with full enumeration matches the subset-sum oracle on d = 8") {
  const auto m = neural_d(8, 21);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd background(5, 8);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 8; ++c) background(r, c) = n01(gen);
  auto c = base(Method::kernel_shap);
  c.shap_background = background;
  c.shap_exact = true;
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd x(8);
    for (int k = 0; k < 8; ++k) x[k] = n01(gen);
    const auto a = kernel_shap(m, x, c);
    const auto oracle = xstest::shapley_by_subsets(m, x, background, Target::logit);
    CHECK(max_abs(a.scores, oracle) <= 1e-6);
    const double f0 = [&] {
      double s = 0;
      for (int r = 0; r < 5; ++r) s += m.logit(background.row(r).transpose());
      return s / 5;
    }();
    CHECK(std::abs(a.scores.sum() - (m.logit(x) - f0)) <= 1e-8);
    CHECK(max_abs(exact_shapley_oracle(m, x, background, Target::logit).scores, oracle) <= 1e-10);
  }
}

TEST_CASE("a feature the model ignores gets zero attribution") {
  const auto trained = neural_d(8, 4);
  auto layers = trained.layers();
  layers[0].weights.col(3).setZero();
  const TrainedModel m(trained.spec(), layers, "dummy");
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd background(3, 8);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 8; ++c) background(r, c) = n01(gen);
  Eigen::VectorXd x(8);
  for (int k = 0; k < 8; ++k) x[k] = 2.0 * n01(gen);
  auto c = base(Method::kernel_shap);
  c.shap_background = background;
  c.shap_exact = true;
  CHECK(std::abs(kernel_shap(m, x, c).scores[3]) <= 1e-10);
  c.shap_exact = false;
  c.shap_coalition_samples = 60;
  const auto sampled = kernel_shap(m, x, c);
  double f0 = 0;
  for (int r = 0; r < 3; ++r) f0 += m.logit(background.row(r).transpose()) / 3;
  CHECK(std::abs(sampled.scores.sum() - (m.logit(x) - f0)) <= 1e-8);
}

TEST_CASE("config validation and fingerprints") {
  auto c = base(Method::integrated_gradients);
  CHECK_THROWS_AS(c.validate(4), ValidationError);
  c.baseline = Eigen::VectorXd::Zero(4);
  c.validate(4);
  const auto back = ExplainerConfig::from_json(c.to_json());
  CHECK(back.fingerprint() == c.fingerprint());
  auto other = c;
  other.ig_steps = 64;
  CHECK(other.fingerprint() != c.fingerprint());
  auto shap = base(Method::kernel_shap);
  CHECK_THROWS_AS(shap.validate(3), ValidationError);
  shap.shap_background = Eigen::MatrixXd::Zero(1, 30);
  shap.shap_exact = true;
  CHECK_THROWS_AS(shap.validate(30), ValidationError);
  CHECK(parse_method(to_string(Method::grad_x_input)) == Method::grad_x_input);
}

TEST_CASE("precompute over a pool is thread-count invariant and round trips") {
  xstest::Workspace ws("explain", 300);
  const auto m = ws.model();
  const auto enc = models::model_encoder(m, ws.dataset.codebook);
  std::vector<tabular::Instance> targets;
  for (const auto* i : ws.dataset.members(tabular::Split::test)) targets.push_back(*i);
  for (Method method : {Method::smoothgrad, Method::kernel_shap, Method::lime}) {
    auto c = default_config(method, enc, ws.dataset, 3);
    if (method == Method::kernel_shap) c.shap_background.conservativeResize(10, Eigen::NoChange);
    ManualClock clock(1000);
    PrecomputeOptions one{1, &clock}, many{4, &clock};
    const auto a = precompute_pool(m, enc, targets, c, one);
    const auto b = precompute_pool(m, enc, targets, c, many);
    CHECK(a == b);
    CHECK(a.records.size() == targets.size());
    CHECK(a.model_fingerprint == m.fingerprint());
    CHECK(a.codebook_hash == ws.dataset.codebook.hash());
    const auto path = (ws.root / "set.json").string();
    save_explanation_set(a, path);
    CHECK(load_explanation_set(path) == a);
    const auto* rec = a.find(targets[0].id);
    REQUIRE(rec != nullptr);
    CHECK(rec->feature_scores.size() == ws.dataset.codebook.features.size());
  }
}
