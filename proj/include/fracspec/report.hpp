#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fracspec/config.hpp"

namespace fracspec {

/// Column-ordered CSV table. Cells are preformatted text.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  void add(std::vector<std::string> row);
};

/// Round-trip decimal form of a double; "inf", "-inf" and "nan" for non-finite values.
std::string cell(double x);
std::string cell(long long x);
std::string cell(bool x);

struct Provenance {
  std::string version = kToolVersion;
  std::string config_hash;
  nlohmann::json config;
};
Provenance provenance(const RunConfig& config);
nlohmann::json to_json(const Provenance& p);

/// CSV with two leading comment lines carrying tool, version and config hash.
std::string render_csv(const Table& table, const Provenance& p);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
/// Pretty-printed JSON with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& doc);

}  // namespace fracspec
