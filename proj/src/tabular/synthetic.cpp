#include "xaistudy/tabular/synthetic.hpp"

#include <cmath>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/rng.hpp"

namespace xaistudy::tabular {

namespace {
constexpr const char* kCategories[] = {"a", "b", "c"};
}

Dataset generate_synthetic(std::size_t n, std::size_t d_numeric, std::size_t d_categorical,
                           const std::vector<double>& true_weights, std::uint64_t seed) {
  if (n < 1) throw ValidationError("synthetic dataset needs n >= 1");
  const std::size_t width = d_numeric + 3 * d_categorical;
  if (true_weights.size() != width)
    throw ValidationError("true_weights has length " + std::to_string(true_weights.size()) + ", expected " +
                          std::to_string(width) + " (numeric + 3 x categorical)");

  Codebook cb;
  cb.dataset_name = "synthetic";
  cb.label_name = "outcome";
  cb.positive_label_meaning = "positive outcome";
  cb.negative_label_meaning = "negative outcome";
  for (std::size_t j = 0; j < d_numeric; ++j) {
    FeatureSpec f;
    f.name = "num_" + std::to_string(j + 1);
    f.kind = FeatureKind::numeric;
    f.description = "standard normal draw";
    cb.features.push_back(f);
  }
  for (std::size_t j = 0; j < d_categorical; ++j) {
    FeatureSpec f;
    f.name = "cat_" + std::to_string(j + 1);
    f.kind = FeatureKind::categorical;
    f.categories = {"a", "b", "c"};
    f.description = "uniform over three levels";
    cb.features.push_back(f);
  }
  FeatureSpec group;
  group.name = "group";
  group.kind = FeatureKind::categorical;
  group.categories = {"minority", "majority"};
  group.description = "synthetic protected attribute, independent of the label";
  cb.features.push_back(group);
  cb.protected_attributes.push_back({"group", "minority", "majority"});
  for (const auto& f : cb.features) cb.display_order.push_back(f.name);

  Dataset ds;
  ds.codebook = cb;
  ds.instances.reserve(n);
  Rng rng(derive_seed(seed, "synthetic"));
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst;
    inst.id = "s" + std::to_string(i);
    double z = 0.0;
    for (std::size_t j = 0; j < d_numeric; ++j) {
      const double v = rng.normal();
      inst.raw_values["num_" + std::to_string(j + 1)] = v;
      z += true_weights[j] * v;
    }
    for (std::size_t j = 0; j < d_categorical; ++j) {
      const auto level = static_cast<std::size_t>(rng.index(3));
      inst.raw_values["cat_" + std::to_string(j + 1)] = std::string(kCategories[level]);
      z += true_weights[d_numeric + 3 * j + level];
    }
    inst.raw_values["group"] = std::string(rng.bernoulli(0.3) ? "minority" : "majority");
    const double p = 1.0 / (1.0 + std::exp(-z));
    inst.label = rng.bernoulli(p) ? 1 : 0;
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

}  // namespace xaistudy::tabular
