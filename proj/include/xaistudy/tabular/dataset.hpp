#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "xaistudy/tabular/codebook.hpp"

namespace xaistudy::tabular {

// numeric and binary cells hold a double (binary is 0 or 1); categorical
// cells hold the category name; monostate marks a missing cell.
using RawValue = std::variant<std::monostate, double, std::string>;

struct Instance {
  std::string id;
  std::map<std::string, RawValue> raw_values;
  int label = 0;

  const RawValue& value(const std::string& feature) const;
  bool operator==(const Instance&) const = default;
};

enum class Split { train, test };

struct SplitParams {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  bool operator==(const SplitParams&) const = default;
};

struct Dataset {
  Codebook codebook;
  std::vector<Instance> instances;
  std::optional<std::map<std::string, Split>> split_assignment;
  // Set by split_dataset; lets downstream artifacts regenerate the split.
  std::optional<SplitParams> split_params;

  const Instance& find(const std::string& id) const;
  bool has_split() const { return split_assignment.has_value(); }
  // Instances of one split, in dataset order. Throws if no split exists.
  std::vector<const Instance*> members(Split which) const;
  std::vector<std::string> ids(Split which) const;
};

struct RowRejection {
  std::size_t row = 0;  // 1-based data row, header excluded
  std::string reason;
};

struct LoadReport {
  std::vector<RowRejection> rejected;
};

// Validates every row against the codebook. Rows with a missing label are
// rejected (recorded in `report` when given); any other violation throws.
Dataset load_dataset(const std::string& data_path, const Codebook& codebook,
                     LoadReport* report = nullptr);
Dataset load_dataset(const std::string& data_path, const std::string& codebook_path,
                     LoadReport* report = nullptr);
Dataset parse_dataset(const std::string& csv_text, const Codebook& codebook,
                      LoadReport* report = nullptr);

// Writes the canonical delimited file (id column, features in codebook order,
// label). load_dataset(write_dataset(d)) reproduces d.
void write_dataset(const Dataset& dataset, const std::string& path);
std::string format_dataset(const Dataset& dataset);

// Label-stratified split; test size is round(test_fraction * N).
Dataset split_dataset(const Dataset& dataset, double test_fraction, std::uint64_t seed);

// Human-readable rendering of a cell ("4,500 DM", "female", "missing").
std::string display_value(const FeatureSpec& spec, const RawValue& value);
// Group membership string for a protected attribute (category name, or the
// binary label / "0"/"1").
std::string group_value(const FeatureSpec& spec, const RawValue& value);

std::string format_number(double v);

}  // namespace xaistudy::tabular
