#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace srde::io {

/// Fixed-format rendering used for every table cell, so repeated runs emit
/// byte-identical files.
std::string format_double(double v);

/// Row-oriented table: one JSON object per row plus the column order used by
/// the delimited form. Missing keys render as empty cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<nlohmann::json> rows;
};

std::string render_csv(const Table& table);
std::string render_jsonl(const Table& table);

void write_text(const std::string& path, const std::string& content);

/// Create the directory (recursively) and prove it is writable; throws
/// ConfigError otherwise. Called before any compute starts.
void prepare_out_dir(const std::string& dir);

/// table written as <dir>/<stem>.<format>; format is "csv" or "jsonl"
std::string write_table(const Table& table, const std::string& dir, const std::string& stem,
                        const std::string& format);

}  // namespace srde::io
