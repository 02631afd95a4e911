#pragma once

#include <string>

#include "json.hpp"

namespace xaistudy {

using Json = nlohmann::json;

Json read_json_file(const std::string& path);
// Writes via a temporary file and rename, so readers never observe a
// partially written document.
void write_json_file(const std::string& path, const Json& doc, int indent = 2);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Resolves `path` relative to the directory containing `base_file` unless it
// is already absolute.
std::string resolve_relative(const std::string& base_file, const std::string& path);

}  // namespace xaistudy
