#include "xaistudy/study/store.hpp"

#include <algorithm>
#include <filesystem>

#include "xaistudy/common/error.hpp"

namespace fs = std::filesystem;

namespace xaistudy::study {

namespace {

void check_key(const std::string& key) {
  if (key.empty() || key.find_first_of("/\\") != std::string::npos || key == "." || key == "..")
    throw ValidationError("bad store key '" + key + "'");
}

}  // namespace

FileStore::FileStore(std::string root) : root_(std::move(root)) { fs::create_directories(root_); }

std::string FileStore::path_for(const std::string& collection, const std::string& id) const {
  check_key(collection);
  check_key(id);
  return (fs::path(root_) / collection / (id + ".json")).string();
}

void FileStore::put(const std::string& collection, const std::string& id, const Json& doc) {
  const std::string path = path_for(collection, id);
  fs::create_directories(fs::path(path).parent_path());
  write_json_file(path, doc, -1);
}

std::optional<Json> FileStore::get(const std::string& collection, const std::string& id) const {
  const std::string path = path_for(collection, id);
  if (!fs::exists(path)) return std::nullopt;
  return read_json_file(path);
}

std::vector<std::string> FileStore::list(const std::string& collection) const {
  check_key(collection);
  std::vector<std::string> ids;
  const fs::path dir = fs::path(root_) / collection;
  if (!fs::exists(dir)) return ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void MemoryStore::put(const std::string& collection, const std::string& id, const Json& doc) {
  check_key(collection);
  check_key(id);
  std::string text = doc.dump();
  std::lock_guard lock(mutex_);
  data_[collection][id] = std::move(text);
}

std::optional<Json> MemoryStore::get(const std::string& collection, const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto c = data_.find(collection);
  if (c == data_.end()) return std::nullopt;
  auto it = c->second.find(id);
  if (it == c->second.end()) return std::nullopt;
  return Json::parse(it->second);
}

std::vector<std::string> MemoryStore::list(const std::string& collection) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  auto c = data_.find(collection);
  if (c == data_.end()) return ids;
  for (const auto& [id, _] : c->second) ids.push_back(id);
  return ids;
}

std::shared_ptr<DocumentStore> open_store(const std::string& spec) {
  if (spec == "memory:" || spec == "memory") return std::make_shared<MemoryStore>();
  if (spec.rfind("file:", 0) == 0) return std::make_shared<FileStore>(spec.substr(5));
  throw ValidationError("unsupported store '" + spec + "' (bundled: memory:, file:<dir>)");
}

}  // namespace xaistudy::study
