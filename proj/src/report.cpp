#include "fracspec/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fracspec/error.hpp"

namespace fracspec {

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw ArgumentError("table row width does not match the header");
  rows.push_back(std::move(row));
}

std::string cell(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string cell(long long x) { return std::to_string(x); }

std::string cell(bool x) { return x ? "1" : "0"; }

Provenance provenance(const RunConfig& config) {
  Provenance p;
  p.config_hash = config_hash(config);
  p.config = to_json(config);
  p.config.erase("workers");
  p.config.erase("out");
  return p;
}

nlohmann::json to_json(const Provenance& p) {
  return {{"tool", "fracspec"}, {"version", p.version}, {"config_hash", p.config_hash}, {"config", p.config}};
}

std::string render_csv(const Table& table, const Provenance& p) {
  std::string out = "# tool=fracspec version=" + p.version + " config_hash=" + p.config_hash + "\n";
  out += "# config=" + p.config.dump() + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.columns);
  for (const auto& r : table.rows) line(r);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IntegrityError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_json(const std::string& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

}  // namespace fracspec
