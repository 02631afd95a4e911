#include "xaistudy/models/checkpoint.hpp"

#include "xaistudy/common/error.hpp"

namespace xaistudy::models {

Json to_json(const TrainedModel& model) {
  Json layers = Json::array();
  for (const auto& l : model.layers()) {
    std::vector<double> w(static_cast<std::size_t>(l.weights.size()));
    // Row-major so the file reads naturally.
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
        w[static_cast<std::size_t>(r * l.weights.cols() + c)] = l.weights(r, c);
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"rows", l.weights.rows()}, {"cols", l.weights.cols()}, {"weights", w}, {"bias", b}});
  }
  const auto& rec = model.record();
  return Json{{"format", "xaistudy-model"},
              {"version", kCheckpointVersion},
              {"spec", to_json(model.spec())},
              {"input_dim", model.input_dim()},
              {"fingerprint", model.fingerprint()},
              {"layers", layers},
              {"training",
               {{"codebook_hash", rec.codebook_hash},
                {"scaler", rec.scaler},
                {"test_fraction", rec.test_fraction},
                {"split_seed", rec.split_seed},
                {"initial_loss", rec.initial_loss},
                {"final_loss", rec.final_loss}}}};
}

TrainedModel model_from_json(const Json& doc) {
  try {
    if (doc.at("format") != "xaistudy-model") throw SchemaError("not a model checkpoint");
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw SchemaError("unsupported checkpoint version " + std::to_string(version));
    const ModelSpec spec = model_spec_from_json(doc.at("spec"));
    std::vector<DenseLayer> layers;
    for (const auto& l : doc.at("layers")) {
      const auto rows = l.at("rows").get<Eigen::Index>();
      const auto cols = l.at("cols").get<Eigen::Index>();
      const auto w = l.at("weights").get<std::vector<double>>();
      const auto b = l.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows)
        throw SchemaError("layer parameter arrays have the wrong length");
      DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = b[static_cast<std::size_t>(r)];
      layers.push_back(std::move(layer));
    }
    TrainingRecord rec;
    if (doc.contains("training")) {
      const auto& t = doc["training"];
      rec.codebook_hash = t.value("codebook_hash", "");
      rec.scaler = t.value("scaler", Json());
      rec.test_fraction = t.value("test_fraction", 0.2);
      rec.split_seed = t.value("split_seed", std::uint64_t{0});
      rec.initial_loss = t.value("initial_loss", 0.0);
      rec.final_loss = t.value("final_loss", 0.0);
    }
    TrainedModel model(spec, std::move(layers), doc.at("fingerprint").get<std::string>(), std::move(rec));
    if (model.input_dim() != doc.at("input_dim").get<std::size_t>())
      throw SchemaError("checkpoint input_dim disagrees with its parameters");
    return model;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const TrainedModel& model, const std::string& path) {
  // nlohmann serializes doubles with round-trip precision.
  write_json_file(path, to_json(model), -1);
}

TrainedModel load_checkpoint(const std::string& path) { return model_from_json(read_json_file(path)); }

TrainedModel load_checkpoint(const std::string& path, const tabular::Codebook& codebook) {
  TrainedModel model = load_checkpoint(path);
  if (model.record().codebook_hash != codebook.hash())
    throw ConflictError(path + ": checkpoint was trained on codebook " + model.record().codebook_hash +
                        ", got " + codebook.hash());
  return model;
}

}  // namespace xaistudy::models
