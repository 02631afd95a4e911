#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "xaistudy/common/json_io.hpp"

namespace xaistudy::study {

// Keyed JSON documents grouped in collections. put() replaces a record
// atomically: a concurrent or later reader sees either the old or the new
// document, never a mix.
class DocumentStore {
 public:
  virtual ~DocumentStore() = default;
  virtual void put(const std::string& collection, const std::string& id, const Json& doc) = 0;
  virtual std::optional<Json> get(const std::string& collection, const std::string& id) const = 0;
  // Sorted ids.
  virtual std::vector<std::string> list(const std::string& collection) const = 0;
};

// One file per record under <root>/<collection>/<id>.json, written via
// temporary file and rename.
class FileStore final : public DocumentStore {
 public:
  explicit FileStore(std::string root);
  void put(const std::string& collection, const std::string& id, const Json& doc) override;
  std::optional<Json> get(const std::string& collection, const std::string& id) const override;
  std::vector<std::string> list(const std::string& collection) const override;
  const std::string& root() const { return root_; }

 private:
  std::string path_for(const std::string& collection, const std::string& id) const;
  std::string root_;
};

class MemoryStore final : public DocumentStore {
 public:
  void put(const std::string& collection, const std::string& id, const Json& doc) override;
  std::optional<Json> get(const std::string& collection, const std::string& id) const override;
  std::vector<std::string> list(const std::string& collection) const override;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::map<std::string, std::string>> data_;
};

// "memory:" or "file:<dir>". Other schemes name external backends that are
// not bundled and raise a ValidationError.
std::shared_ptr<DocumentStore> open_store(const std::string& spec);

}  // namespace xaistudy::study
