#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xaistudy/common/json_io.hpp"

namespace xaistudy::tabular {

enum class FeatureKind { numeric, categorical, binary };

std::string to_string(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& text);

// Category name used when a categorical feature allows missing values.
inline constexpr const char* kMissingCategory = "missing";

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  // Categorical: the allowed values, in one-hot column order.
  // Binary: optional display labels for 0 and 1 (exactly two when present).
  std::vector<std::string> categories;
  std::optional<std::string> unit;
  std::string description;
  std::optional<std::string> long_explanation;
  // Numeric: missing cells are imputed with the train median.
  // Categorical: missing cells map to the explicit kMissingCategory.
  bool allow_missing = false;

  std::size_t encoded_width() const {
    return kind == FeatureKind::categorical ? categories.size() : 1;
  }
};

struct ProtectedAttribute {
  std::string feature;
  std::string minority;
  std::string majority;
};

struct Codebook {
  std::string dataset_name;
  std::vector<FeatureSpec> features;
  std::string label_name;
  // Raw tokens for label 0 and label 1 in the data file.
  std::array<std::string, 2> label_values{"0", "1"};
  std::string positive_label_meaning;
  std::string negative_label_meaning;
  std::vector<ProtectedAttribute> protected_attributes;
  std::vector<std::string> display_order;
  // Optional id column in the data file; row numbers are used when absent.
  std::string id_column = "id";

  const FeatureSpec& feature(const std::string& name) const;
  std::optional<std::size_t> index_of(const std::string& name) const;
  const ProtectedAttribute& protected_attribute(const std::string& feature) const;

  // Throws ValidationError on the first broken invariant.
  void validate() const;
  // Stable content hash; checkpoints and studies bind to it.
  std::string hash() const;
};

Codebook codebook_from_json(const Json& doc);
Json to_json(const Codebook& codebook);
Codebook load_codebook(const std::string& path);
void save_codebook(const Codebook& codebook, const std::string& path);

}  // namespace xaistudy::tabular
