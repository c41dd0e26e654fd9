#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "optocool/cli.hpp"
#include "optocool/error.hpp"

namespace optocool::cli {

namespace {

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

struct CellWriter {
  std::ostream& out;
  void operator()(std::monostate) const {}
  void operator()(double v) const { out << format_number(v); }
  void operator()(long long v) const { out << v; }
  void operator()(bool v) const { out << (v ? "true" : "false"); }
  void operator()(const std::string& s) const { out << quoted(s); }
};

}  // namespace

std::string format_number(double value) {
  if (value == 0.0) return "0";  // drops the sign of -0
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void emit_csv(const ResultTable& table, std::ostream& out) {
  for (const auto& [key, value] : table.metadata) out << "# " << key << " = " << value << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << table.columns[i].name << '[' << table.columns[i].unit << ']';
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(CellWriter{out}, row[i]);
    }
    out << '\n';
  }
}

void emit_csv(const ResultTable& table, const std::string& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::IoError, "emit_csv: cannot open " + path + " for writing");
  emit_csv(table, file);
  file.flush();
  if (!file) throw Error(ErrorKind::IoError, "emit_csv: write to " + path + " failed");
}

}  // namespace optocool::cli
