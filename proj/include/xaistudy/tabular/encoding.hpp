#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xaistudy/tabular/dataset.hpp"

namespace xaistudy::tabular {

using EncodedVector = Eigen::VectorXd;

// Encoded columns owned by one codebook feature.
struct ColumnGroup {
  std::string feature;
  std::size_t offset = 0;
  std::size_t width = 0;
};

struct EncodingSchema {
  std::vector<ColumnGroup> groups;        // codebook feature order
  std::vector<std::string> column_names;  // "age", "purpose=car", ...
  std::size_t dimension() const { return column_names.size(); }
  const ColumnGroup& group(const std::string& feature) const;
};

EncodingSchema build_schema(const Codebook& codebook);

struct ColumnScale {
  double mean = 0.0;
  double std = 1.0;
  bool operator==(const ColumnScale&) const = default;
};

// Per-column standardization for numeric columns (identity for one-hot and
// binary columns) plus train medians for numeric imputation.
struct Scaler {
  std::vector<ColumnScale> columns;
  std::map<std::string, double> medians;
  bool fitted = false;

  bool operator==(const Scaler&) const = default;
};

Json to_json(const Scaler& scaler);
Scaler scaler_from_json(const Json& doc);

// Fits on the train split only. Throws when the dataset has no split.
Scaler fit_scaler(const Dataset& dataset);
// Fits on an explicit instance set (used by the leakage check).
Scaler fit_scaler(const Codebook& codebook, std::span<const Instance* const> instances);

EncodedVector encode_instance(const Instance& instance, const Codebook& codebook, const Scaler& scaler);

// Bundles codebook, schema and fitted scaler.
class Encoder {
 public:
  Encoder(Codebook codebook, Scaler scaler);
  static Encoder fit(const Dataset& dataset) { return Encoder(dataset.codebook, fit_scaler(dataset)); }

  EncodedVector encode(const Instance& instance) const;
  // One row per instance.
  Eigen::MatrixXd encode_rows(std::span<const Instance* const> instances) const;
  Eigen::MatrixXd encode_rows(const std::vector<Instance>& instances) const;

  // Argmax of the feature's one-hot group.
  std::string decode_category(const EncodedVector& x, const std::string& feature) const;
  // Sums encoded-column scores over each feature's group.
  Eigen::VectorXd aggregate(const Eigen::VectorXd& column_scores) const;

  const Codebook& codebook() const { return codebook_; }
  const EncodingSchema& schema() const { return schema_; }
  const Scaler& scaler() const { return scaler_; }
  std::size_t dimension() const { return schema_.dimension(); }

 private:
  Codebook codebook_;
  EncodingSchema schema_;
  Scaler scaler_;
};

}  // namespace xaistudy::tabular
