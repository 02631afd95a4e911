#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace xaistudy::csv {

using Row = std::vector<std::string>;

// RFC 4180 style: comma separated, double-quote escaping, CRLF or LF line
// endings. Quoted fields may span lines.
std::vector<Row> parse(std::string_view text);
std::vector<Row> read_file(const std::string& path);

std::string escape(std::string_view field);
std::string format_row(const Row& row);
void write_row(std::ostream& out, const Row& row);
void write_file(const std::string& path, const std::vector<Row>& rows);

}  // namespace xaistudy::csv
