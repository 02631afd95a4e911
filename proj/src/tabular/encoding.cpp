#include "xaistudy/tabular/encoding.hpp"

#include <algorithm>
#include <cmath>

#include "xaistudy/common/error.hpp"

namespace xaistudy::tabular {

const ColumnGroup& EncodingSchema::group(const std::string& feature) const {
  for (const auto& g : groups)
    if (g.feature == feature) return g;
  throw SchemaError("encoding schema has no feature '" + feature + "'");
}

EncodingSchema build_schema(const Codebook& codebook) {
  EncodingSchema schema;
  std::size_t offset = 0;
  for (const auto& f : codebook.features) {
    const std::size_t width = f.encoded_width();
    schema.groups.push_back({f.name, offset, width});
    if (f.kind == FeatureKind::categorical) {
      for (const auto& c : f.categories) schema.column_names.push_back(f.name + "=" + c);
    } else {
      schema.column_names.push_back(f.name);
    }
    offset += width;
  }
  return schema;
}

Json to_json(const Scaler& scaler) {
  Json cols = Json::array();
  for (const auto& c : scaler.columns) cols.push_back({c.mean, c.std});
  return Json{{"fitted", scaler.fitted}, {"columns", cols}, {"medians", scaler.medians}};
}

Scaler scaler_from_json(const Json& doc) {
  Scaler s;
  s.fitted = doc.at("fitted").get<bool>();
  for (const auto& c : doc.at("columns")) s.columns.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  s.medians = doc.at("medians").get<std::map<std::string, double>>();
  return s;
}

Scaler fit_scaler(const Codebook& codebook, std::span<const Instance* const> instances) {
  if (instances.empty()) throw ValidationError("cannot fit a scaler on zero instances");
  const auto schema = build_schema(codebook);
  Scaler scaler;
  scaler.columns.assign(schema.dimension(), ColumnScale{});
  for (const auto& g : schema.groups) {
    const auto& spec = codebook.feature(g.feature);
    if (spec.kind != FeatureKind::numeric) continue;
    std::vector<double> values;
    for (const auto* inst : instances) {
      if (const auto* v = std::get_if<double>(&inst->value(g.feature))) values.push_back(*v);
    }
    if (values.empty()) throw ValidationError("numeric feature '" + g.feature + "' has no observed values");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    const double median = m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
    scaler.medians[g.feature] = median;

    // Missing cells are imputed before standardizing, so they count at the median.
    const std::size_t missing = instances.size() - m;
    double sum = median * static_cast<double>(missing);
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(instances.size());
    double ss = static_cast<double>(missing) * (median - mean) * (median - mean);
    for (double v : values) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(instances.size()));
    if (!(sd > 1e-12)) sd = 1.0;
    scaler.columns[g.offset] = {mean, sd};
  }
  scaler.fitted = true;
  return scaler;
}

Scaler fit_scaler(const Dataset& dataset) {
  const auto train = dataset.members(Split::train);
  return fit_scaler(dataset.codebook, train);
}

EncodedVector encode_instance(const Instance& instance, const Codebook& codebook, const Scaler& scaler) {
  if (!scaler.fitted) throw StateError("unfitted_scaler", "scaler has not been fitted on a train split");
  const auto schema = build_schema(codebook);
  if (scaler.columns.size() != schema.dimension())
    throw SchemaError("scaler width " + std::to_string(scaler.columns.size()) + " does not match schema width " +
                      std::to_string(schema.dimension()));
  EncodedVector x = EncodedVector::Zero(static_cast<Eigen::Index>(schema.dimension()));
  for (std::size_t gi = 0; gi < schema.groups.size(); ++gi) {
    const auto& g = schema.groups[gi];
    const auto& spec = codebook.features[gi];
    const RawValue& raw = instance.value(spec.name);
    const auto col = static_cast<Eigen::Index>(g.offset);
    switch (spec.kind) {
      case FeatureKind::numeric: {
        double v;
        if (const auto* d = std::get_if<double>(&raw)) {
          v = *d;
        } else {
          auto it = scaler.medians.find(spec.name);
          if (it == scaler.medians.end()) throw SchemaError("no median for numeric feature '" + spec.name + "'");
          v = it->second;
        }
        const auto& s = scaler.columns[g.offset];
        x[col] = (v - s.mean) / s.std;
        break;
      }
      case FeatureKind::binary: {
        const auto* d = std::get_if<double>(&raw);
        if (!d) throw ValidationError("instance " + instance.id + ": binary feature '" + spec.name + "' is missing");
        x[col] = *d != 0.0 ? 1.0 : 0.0;
        break;
      }
      case FeatureKind::categorical: {
        const auto* s = std::get_if<std::string>(&raw);
        if (!s) throw ValidationError("instance " + instance.id + ": categorical feature '" + spec.name + "' is missing");
        auto it = std::find(spec.categories.begin(), spec.categories.end(), *s);
        if (it == spec.categories.end())
          throw ValidationError("unknown_category",
                                "instance " + instance.id + ": unknown category '" + *s + "' for '" + spec.name + "'");
        x[col + (it - spec.categories.begin())] = 1.0;
        break;
      }
    }
  }
  return x;
}

Encoder::Encoder(Codebook codebook, Scaler scaler)
    : codebook_(std::move(codebook)), schema_(build_schema(codebook_)), scaler_(std::move(scaler)) {
  if (!scaler_.fitted) throw StateError("unfitted_scaler", "scaler has not been fitted on a train split");
  if (scaler_.columns.size() != schema_.dimension()) throw SchemaError("scaler does not match codebook encoding");
}

EncodedVector Encoder::encode(const Instance& instance) const { return encode_instance(instance, codebook_, scaler_); }

Eigen::MatrixXd Encoder::encode_rows(std::span<const Instance* const> instances) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(instances.size()), static_cast<Eigen::Index>(dimension()));
  for (std::size_t i = 0; i < instances.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = encode(*instances[i]).transpose();
  return out;
}

Eigen::MatrixXd Encoder::encode_rows(const std::vector<Instance>& instances) const {
  std::vector<const Instance*> ptrs;
  ptrs.reserve(instances.size());
  for (const auto& inst : instances) ptrs.push_back(&inst);
  return encode_rows(ptrs);
}

std::string Encoder::decode_category(const EncodedVector& x, const std::string& feature) const {
  const auto& spec = codebook_.feature(feature);
  if (spec.kind != FeatureKind::categorical) throw SchemaError("'" + feature + "' is not categorical");
  const auto& g = schema_.group(feature);
  Eigen::Index best = 0;
  x.segment(static_cast<Eigen::Index>(g.offset), static_cast<Eigen::Index>(g.width)).maxCoeff(&best);
  return spec.categories[static_cast<std::size_t>(best)];
}

Eigen::VectorXd Encoder::aggregate(const Eigen::VectorXd& column_scores) const {
  if (static_cast<std::size_t>(column_scores.size()) != dimension())
    throw SchemaError("score vector has " + std::to_string(column_scores.size()) + " entries, encoding has " +
                      std::to_string(dimension()));
  Eigen::VectorXd out(static_cast<Eigen::Index>(schema_.groups.size()));
  for (std::size_t i = 0; i < schema_.groups.size(); ++i) {
    const auto& g = schema_.groups[i];
    out[static_cast<Eigen::Index>(i)] =
        column_scores.segment(static_cast<Eigen::Index>(g.offset), static_cast<Eigen::Index>(g.width)).sum();
  }
  return out;
}

}  // namespace xaistudy::tabular
