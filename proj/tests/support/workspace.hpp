#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "xaistudy/common/condition.hpp"
#include "xaistudy/explainers/precompute.hpp"
#include "xaistudy/models/checkpoint.hpp"
#include "xaistudy/models/training.hpp"
#include "xaistudy/study/config.hpp"
#include "xaistudy/tabular/dataset.hpp"

namespace xstest {

std::string data_dir();
std::filesystem::path temp_dir(const std::string& tag);

// A synthetic dataset with a trained model and, on demand, precomputed
// explanation sets, all written under one temporary directory.
struct Workspace {
  std::filesystem::path root;
  xaistudy::tabular::Dataset dataset;  // split applied
  std::string data_path, codebook_path, checkpoint_path;
  std::map<std::string, std::string> explanation_paths;  // method -> file

  explicit Workspace(const std::string& tag, std::size_t n = 1000, std::uint64_t seed = 7);

  xaistudy::models::TrainedModel model() const;
  // Computes (once) the explanation set of a method over the test split.
  std::string explanations(const std::string& method);
  xaistudy::study::StudyConfig config(xaistudy::Condition c, std::size_t pool_size = 200, std::size_t tasks = 20);
};

}  // namespace xstest
