#include "xaistudy/common/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xaistudy/common/error.hpp"

namespace xaistudy {

namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error("io", "short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

Json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& doc, int indent) {
  write_text_file(path, doc.dump(indent) + "\n");
}

std::string resolve_relative(const std::string& base_file, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || base_file.empty()) return path;
  return (fs::path(base_file).parent_path() / p).lexically_normal().string();
}

}  // namespace xaistudy
