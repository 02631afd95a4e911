#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "workspace.hpp"
#include "xaistudy/common/error.hpp"
#include "xaistudy/common/rng.hpp"
#include "xaistudy/models/checkpoint.hpp"
#include "xaistudy/models/training.hpp"
#include "xaistudy/tabular/synthetic.hpp"

using namespace xaistudy;
using namespace xaistudy::models;

namespace {

Eigen::VectorXd random_point(Rng& rng, std::size_t d) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 1.5 * rng.normal();
  return x;
}

tabular::Dataset small_data() {
  return tabular::split_dataset(tabular::generate_synthetic(400, 3, 1, {1.5, -1.0, 0.5, 0.4, 0.0, -0.4}, 5), 0.25, 1);
}

}  // namespace

TEST_CASE("logistic model gradients are analytic") {
  Eigen::VectorXd w(3);
  w << 0.5, -1.0, 2.0;
  const auto m = TrainedModel::logistic(w, 0.25);
  Eigen::VectorXd x(3);
  x << 1.0, 2.0, -0.5;
  const double z = w.dot(x) + 0.25;
  CHECK(m.logit(x) == doctest::Approx(z));
  CHECK((m.input_gradient(x, Target::logit) - w).cwiseAbs().maxCoeff() == 0.0);
  const double p = sigmoid(z);
  CHECK((m.input_gradient(x, Target::probability) - p * (1 - p) * w).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(m.predict(x).label == (p >= 0.5 ? 1 : 0));
}

TEST_CASE("neural input gradients match central differences") {
  const auto ds = small_data();
  ModelSpec spec = ModelSpec::neural_defaults();
  spec.hidden_sizes = {16, 8};
  spec.epochs = 200;
  const auto m = train_model(ds, spec);
  Rng rng(99);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto x = random_point(rng, m.input_dim());
    for (Target t : {Target::logit, Target::probability})
      worst = std::max(worst, xstest::relative_gradient_error(m.input_gradient(x, t),
                                                              xstest::finite_difference_gradient(m, x, t)));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("training lowers the loss and is deterministic") {
  const auto ds = small_data();
  ModelSpec spec = ModelSpec::neural_defaults();
  spec.hidden_sizes = {8};
  spec.epochs = 150;
  const auto a = train_model(ds, spec);
  const auto b = train_model(ds, spec);
  CHECK(a.record().final_loss < a.record().initial_loss);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.layers()[0].weights == b.layers()[0].weights);
  spec.seed = 1;
  CHECK(train_model(ds, spec).fingerprint() != a.fingerprint());
  const auto metrics = evaluate_model(a, ds, ds.codebook);
  CHECK(metrics.accuracy > 0.6);
  CHECK(metrics.protected_attribute.value() == "group");
}

TEST_CASE("zero epochs predicts the base rate") {
  const auto ds = small_data();
  ModelSpec spec = ModelSpec::logistic_defaults();
  spec.epochs = 0;
  const auto m = train_model(ds, spec);
  double base = 0;
  const auto train = ds.members(tabular::Split::train);
  for (const auto* i : train) base += i->label;
  base /= static_cast<double>(train.size());
  const auto enc = model_encoder(m, ds.codebook);
  CHECK(m.probability(enc.encode(*train[0])) == doctest::Approx(base).epsilon(1e-6));
}

TEST_CASE("checkpoint round trip reproduces outputs exactly") {
  const auto ds = small_data();
  ModelSpec spec = ModelSpec::neural_defaults();
  spec.hidden_sizes = {6};
  spec.epochs = 50;
  const auto m = train_model(ds, spec);
  const auto dir = xstest::temp_dir("models");
  const std::string path = (dir / "m.json").string();
  save_checkpoint(m, path);
  const auto back = load_checkpoint(path, ds.codebook);
  CHECK(back.fingerprint() == m.fingerprint());
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_point(rng, m.input_dim());
    CHECK(back.logit(x) == m.logit(x));
  }
  auto other = ds.codebook;
  other.features[0].description = "changed";
  CHECK_THROWS_AS(load_checkpoint(path, other), ConflictError);
  CHECK_THROWS_AS(model_encoder(back, other), ConflictError);
}

TEST_CASE("spec validation and input checks") {
  ModelSpec spec;
  spec.hidden_sizes = {0};
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = ModelSpec{};
  spec.learning_rate = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  const auto m = TrainedModel::logistic(Eigen::VectorXd::Ones(2), 0.0);
  CHECK_THROWS(m.logit(Eigen::VectorXd::Ones(3)));
  CHECK(model_spec_from_json(to_json(ModelSpec::neural_defaults())).hidden_sizes == ModelSpec::neural_defaults().hidden_sizes);
}

TEST_CASE("metrics of a constant predictor") {
  const std::vector<int> truth{1, 1, 1, 0, 0, 1, 0, 1, 1, 1};
  const std::vector<int> pred(10, 1);
  const std::vector<std::string> groups{"a", "b", "a", "b", "a", "b", "a", "b", "a", "b"};
  const auto m = metrics_from_predictions(pred, truth, groups, tabular::ProtectedAttribute{"g", "a", "b"});
  CHECK(m.accuracy == 0.7);
  CHECK(m.f1 == doctest::Approx(14.0 / 17.0));
  CHECK(*m.eod == 0.0);
  CHECK(*m.aaod == 0.0);
}
