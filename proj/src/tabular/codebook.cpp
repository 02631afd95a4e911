#include "xaistudy/tabular/codebook.hpp"

#include <algorithm>
#include <set>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/hash.hpp"

namespace xaistudy::tabular {

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::numeric:
      return "numeric";
    case FeatureKind::categorical:
      return "categorical";
    case FeatureKind::binary:
      return "binary";
  }
  return "numeric";
}

FeatureKind parse_feature_kind(const std::string& text) {
  if (text == "numeric") return FeatureKind::numeric;
  if (text == "categorical") return FeatureKind::categorical;
  if (text == "binary") return FeatureKind::binary;
  throw SchemaError("unknown feature kind '" + text + "'");
}

const FeatureSpec& Codebook::feature(const std::string& name) const {
  for (const auto& f : features)
    if (f.name == name) return f;
  throw SchemaError("codebook '" + dataset_name + "' has no feature '" + name + "'");
}

std::optional<std::size_t> Codebook::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].name == name) return i;
  return std::nullopt;
}

const ProtectedAttribute& Codebook::protected_attribute(const std::string& name) const {
  for (const auto& p : protected_attributes)
    if (p.feature == name) return p;
  throw SchemaError("'" + name + "' is not a protected attribute of " + dataset_name);
}

void Codebook::validate() const {
  if (features.empty()) throw ValidationError("codebook has no features");
  std::set<std::string> names;
  for (const auto& f : features) {
    if (f.name.empty()) throw ValidationError("feature with empty name");
    if (!names.insert(f.name).second) throw ValidationError("duplicate feature name '" + f.name + "'");
    if (f.name == label_name) throw ValidationError("feature '" + f.name + "' collides with the label");
    if (f.kind == FeatureKind::categorical) {
      if (f.categories.size() < 2)
        throw ValidationError("categorical feature '" + f.name + "' needs at least 2 categories");
      std::set<std::string> cats(f.categories.begin(), f.categories.end());
      if (cats.size() != f.categories.size())
        throw ValidationError("categorical feature '" + f.name + "' repeats a category");
    }
    if (f.kind == FeatureKind::binary && !f.categories.empty() && f.categories.size() != 2)
      throw ValidationError("binary feature '" + f.name + "' must label exactly 2 values");
  }
  if (label_name.empty()) throw ValidationError("codebook has no label name");
  if (label_values[0] == label_values[1]) throw ValidationError("label values must differ");
  for (const auto& p : protected_attributes) {
    if (!names.count(p.feature))
      throw ValidationError("protected attribute references unknown feature '" + p.feature + "'");
    const auto& f = feature(p.feature);
    if (f.kind == FeatureKind::numeric)
      throw ValidationError("protected attribute '" + p.feature + "' must be categorical or binary");
    const auto& cats = f.categories;
    if (f.kind == FeatureKind::categorical || !cats.empty()) {
      for (const auto* v : {&p.minority, &p.majority})
        if (std::find(cats.begin(), cats.end(), *v) == cats.end())
          throw ValidationError("protected value '" + *v + "' not a category of '" + p.feature + "'");
    }
    if (p.minority == p.majority) throw ValidationError("protected groups must differ");
  }
  std::vector<std::string> order = display_order;
  std::vector<std::string> expected(names.begin(), names.end());
  std::sort(order.begin(), order.end());
  if (order != expected) throw ValidationError("display_order must be a permutation of the feature names");
}

std::string Codebook::hash() const { return fingerprint(to_json(*this).dump()); }

Codebook codebook_from_json(const Json& doc) {
  Codebook cb;
  try {
    cb.dataset_name = doc.at("dataset_name").get<std::string>();
    cb.label_name = doc.at("label_name").get<std::string>();
    if (doc.contains("label_values")) {
      const auto& lv = doc.at("label_values");
      if (!lv.is_array() || lv.size() != 2) throw SchemaError("label_values must list two tokens");
      cb.label_values = {lv[0].get<std::string>(), lv[1].get<std::string>()};
    }
    cb.positive_label_meaning = doc.value("positive_label_meaning", "");
    cb.negative_label_meaning = doc.value("negative_label_meaning", "");
    cb.id_column = doc.value("id_column", "id");
    for (const auto& f : doc.at("features")) {
      FeatureSpec spec;
      spec.name = f.at("name").get<std::string>();
      spec.kind = parse_feature_kind(f.at("kind").get<std::string>());
      spec.categories = f.value("categories", std::vector<std::string>{});
      if (f.contains("unit") && !f["unit"].is_null()) spec.unit = f["unit"].get<std::string>();
      spec.description = f.value("description", "");
      if (f.contains("long_explanation") && !f["long_explanation"].is_null())
        spec.long_explanation = f["long_explanation"].get<std::string>();
      spec.allow_missing = f.value("allow_missing", false);
      if (spec.allow_missing && spec.kind == FeatureKind::categorical &&
          std::find(spec.categories.begin(), spec.categories.end(), kMissingCategory) ==
              spec.categories.end()) {
        spec.categories.emplace_back(kMissingCategory);
      }
      cb.features.push_back(std::move(spec));
    }
    for (const auto& p : doc.value("protected_attributes", Json::array())) {
      cb.protected_attributes.push_back({p.at("feature").get<std::string>(),
                                         p.at("minority").get<std::string>(),
                                         p.at("majority").get<std::string>()});
    }
    if (doc.contains("display_order")) {
      cb.display_order = doc.at("display_order").get<std::vector<std::string>>();
    } else {
      for (const auto& f : cb.features) cb.display_order.push_back(f.name);
    }
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("codebook: ") + e.what());
  }
  cb.validate();
  return cb;
}

Json to_json(const Codebook& cb) {
  Json features = Json::array();
  for (const auto& f : cb.features) {
    Json j{{"name", f.name}, {"kind", to_string(f.kind)}, {"description", f.description}};
    if (!f.categories.empty()) j["categories"] = f.categories;
    if (f.unit) j["unit"] = *f.unit;
    if (f.long_explanation) j["long_explanation"] = *f.long_explanation;
    if (f.allow_missing) j["allow_missing"] = true;
    features.push_back(std::move(j));
  }
  Json prot = Json::array();
  for (const auto& p : cb.protected_attributes)
    prot.push_back({{"feature", p.feature}, {"minority", p.minority}, {"majority", p.majority}});
  return Json{{"dataset_name", cb.dataset_name},
              {"features", std::move(features)},
              {"label_name", cb.label_name},
              {"label_values", {cb.label_values[0], cb.label_values[1]}},
              {"positive_label_meaning", cb.positive_label_meaning},
              {"negative_label_meaning", cb.negative_label_meaning},
              {"protected_attributes", std::move(prot)},
              {"display_order", cb.display_order},
              {"id_column", cb.id_column}};
}

Codebook load_codebook(const std::string& path) {
  try {
    return codebook_from_json(read_json_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void save_codebook(const Codebook& codebook, const std::string& path) {
  write_json_file(path, to_json(codebook));
}

}  // namespace xaistudy::tabular
