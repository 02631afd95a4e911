#include "xaistudy/tabular/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "xaistudy/common/csv.hpp"
#include "xaistudy/common/error.hpp"
#include "xaistudy/common/rng.hpp"

namespace xaistudy::tabular {

namespace {

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "?" || s == "nan" || s == "NaN";
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string row_context(std::size_t row, const std::string& feature) {
  return "row " + std::to_string(row) + ", feature '" + feature + "'";
}

RawValue parse_cell(const FeatureSpec& spec, const std::string& cell, std::size_t row) {
  if (is_missing_token(cell)) {
    if (!spec.allow_missing)
      throw ValidationError("missing_value", row_context(row, spec.name) + ": missing value not allowed");
    if (spec.kind == FeatureKind::categorical) return std::string(kMissingCategory);
    return std::monostate{};
  }
  switch (spec.kind) {
    case FeatureKind::numeric: {
      auto v = parse_double(cell);
      if (!v) throw ValidationError("bad_number", row_context(row, spec.name) + ": '" + cell + "' is not a number");
      return *v;
    }
    case FeatureKind::categorical: {
      if (std::find(spec.categories.begin(), spec.categories.end(), cell) == spec.categories.end())
        throw ValidationError("unknown_category", row_context(row, spec.name) + ": unknown category '" + cell + "'");
      return cell;
    }
    case FeatureKind::binary: {
      if (!spec.categories.empty()) {
        if (cell == spec.categories[0]) return 0.0;
        if (cell == spec.categories[1]) return 1.0;
      }
      if (cell == "0") return 0.0;
      if (cell == "1") return 1.0;
      throw ValidationError("unknown_category", row_context(row, spec.name) + ": '" + cell + "' is not a binary value");
    }
  }
  return std::monostate{};
}

std::string format_cell(const FeatureSpec& spec, const RawValue& value) {
  if (std::holds_alternative<std::monostate>(value)) return "";
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  const double v = std::get<double>(value);
  if (spec.kind == FeatureKind::binary) return v != 0.0 ? "1" : "0";
  return format_number(v);
}

}  // namespace

std::string format_number(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int prec = 6; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

const RawValue& Instance::value(const std::string& feature) const {
  auto it = raw_values.find(feature);
  if (it == raw_values.end()) throw SchemaError("instance " + id + " has no feature '" + feature + "'");
  return it->second;
}

const Instance& Dataset::find(const std::string& id) const {
  for (const auto& inst : instances)
    if (inst.id == id) return inst;
  throw NotFoundError("no instance with id '" + id + "'");
}

std::vector<const Instance*> Dataset::members(Split which) const {
  if (!split_assignment) throw StateError("dataset has no train/test split");
  std::vector<const Instance*> out;
  for (const auto& inst : instances) {
    auto it = split_assignment->find(inst.id);
    if (it != split_assignment->end() && it->second == which) out.push_back(&inst);
  }
  return out;
}

std::vector<std::string> Dataset::ids(Split which) const {
  std::vector<std::string> out;
  for (const auto* inst : members(which)) out.push_back(inst->id);
  return out;
}

Dataset parse_dataset(const std::string& csv_text, const Codebook& codebook, LoadReport* report) {
  codebook.validate();
  const auto rows = csv::parse(csv_text);
  if (rows.empty()) throw SchemaError("data file is empty");
  const auto& header = rows.front();

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!column.emplace(header[i], i).second) throw SchemaError("duplicate column '" + header[i] + "'");
  }
  std::set<std::string> expected{codebook.label_name};
  for (const auto& f : codebook.features) {
    expected.insert(f.name);
    if (!column.count(f.name)) throw SchemaError("data file is missing column '" + f.name + "'");
  }
  if (!column.count(codebook.label_name))
    throw SchemaError("data file is missing label column '" + codebook.label_name + "'");
  for (const auto& name : header) {
    if (!expected.count(name) && name != codebook.id_column)
      throw SchemaError("column '" + name + "' is not in the codebook");
  }
  const bool has_ids = column.count(codebook.id_column) > 0;

  Dataset ds;
  ds.codebook = codebook;
  std::set<std::string> seen_ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size())
      throw SchemaError("row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                        " fields, header has " + std::to_string(header.size()));
    const std::string& label_cell = row[column.at(codebook.label_name)];
    if (is_missing_token(label_cell)) {
      if (report) report->rejected.push_back({r, "missing label"});
      continue;
    }
    Instance inst;
    if (label_cell == codebook.label_values[0]) {
      inst.label = 0;
    } else if (label_cell == codebook.label_values[1]) {
      inst.label = 1;
    } else {
      throw ValidationError("bad_label", "row " + std::to_string(r) + ": label '" + label_cell +
                                             "' is neither '" + codebook.label_values[0] + "' nor '" +
                                             codebook.label_values[1] + "'");
    }
    inst.id = has_ids ? row[column.at(codebook.id_column)] : "row-" + std::to_string(r);
    if (inst.id.empty()) throw ValidationError("row " + std::to_string(r) + ": empty id");
    if (!seen_ids.insert(inst.id).second) throw ValidationError("duplicate instance id '" + inst.id + "'");
    for (const auto& f : codebook.features) inst.raw_values[f.name] = parse_cell(f, row[column.at(f.name)], r);
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

Dataset load_dataset(const std::string& data_path, const Codebook& codebook, LoadReport* report) {
  return parse_dataset(read_text_file(data_path), codebook, report);
}

Dataset load_dataset(const std::string& data_path, const std::string& codebook_path, LoadReport* report) {
  return load_dataset(data_path, load_codebook(codebook_path), report);
}

std::string format_dataset(const Dataset& dataset) {
  const auto& cb = dataset.codebook;
  std::ostringstream out;
  csv::Row header{cb.id_column};
  for (const auto& f : cb.features) header.push_back(f.name);
  header.push_back(cb.label_name);
  csv::write_row(out, header);
  for (const auto& inst : dataset.instances) {
    csv::Row row{inst.id};
    for (const auto& f : cb.features) row.push_back(format_cell(f, inst.value(f.name)));
    row.push_back(cb.label_values[inst.label]);
    csv::write_row(out, row);
  }
  return out.str();
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  write_text_file(path, format_dataset(dataset));
}

Dataset split_dataset(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ValidationError("test_fraction must lie in (0, 1), got " + format_number(test_fraction));
  const std::size_t n = dataset.instances.size();
  if (n < 10) throw ValidationError("split needs at least 10 instances, got " + std::to_string(n));

  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < n; ++i) by_label[dataset.instances[i].label].push_back(i);

  // Largest-remainder allocation keeps the total at round(f * N).
  const auto total = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = test_fraction * static_cast<double>(by_label[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
    assigned += quota[c];
  }
  while (assigned < total) {
    const int c = remainder[0] >= remainder[1] ? 0 : 1;
    if (quota[c] < by_label[c].size()) {
      ++quota[c];
      ++assigned;
    }
    remainder[c] = -1.0;
    if (remainder[0] < 0 && remainder[1] < 0) remainder = {0.0, 0.0};
  }

  Dataset out = dataset;
  out.split_assignment.emplace();
  out.split_params = SplitParams{test_fraction, seed};
  Rng rng(derive_seed(seed, "split"));
  for (int c = 0; c < 2; ++c) {
    auto members = by_label[c];
    rng.shuffle(members);
    for (std::size_t j = 0; j < members.size(); ++j) {
      (*out.split_assignment)[dataset.instances[members[j]].id] = j < quota[c] ? Split::test : Split::train;
    }
  }
  return out;
}

std::string display_value(const FeatureSpec& spec, const RawValue& value) {
  if (std::holds_alternative<std::monostate>(value)) return kMissingCategory;
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  const double v = std::get<double>(value);
  if (spec.kind == FeatureKind::binary) {
    if (spec.categories.size() == 2) return spec.categories[v != 0.0 ? 1 : 0];
    return v != 0.0 ? "yes" : "no";
  }
  std::string text = format_number(v);
  if (spec.unit && !spec.unit->empty()) text += " " + *spec.unit;
  return text;
}

std::string group_value(const FeatureSpec& spec, const RawValue& value) {
  if (std::holds_alternative<std::monostate>(value)) return kMissingCategory;
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  const double v = std::get<double>(value);
  if (spec.kind == FeatureKind::binary && spec.categories.size() == 2) return spec.categories[v != 0.0 ? 1 : 0];
  return v != 0.0 ? "1" : "0";
}

}  // namespace xaistudy::tabular
