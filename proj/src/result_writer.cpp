#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "tpslab/experiment.hpp"

namespace tpslab::experiment {

using nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string scalar_text(const ordered_json& j) {
  if (j.is_number_float()) return format_double(j.get<double>());
  return j.dump();
}

void write_json(std::ostringstream& os, const ordered_json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      if (!first) os << ",\n";
      first = false;
      os << pad << ordered_json(key).dump() << ": ";
      write_json(os, value, indent + 2);
    }
    os << '\n' << close << '}';
  } else if (j.is_array()) {
    if (j.empty()) {
      os << "[]";
      return;
    }
    const bool flat = std::all_of(j.begin(), j.end(), [](const ordered_json& e) { return e.is_primitive(); });
    if (flat) {
      os << '[';
      for (std::size_t i = 0; i < j.size(); ++i) os << (i ? ", " : "") << scalar_text(j[i]);
      os << ']';
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      os << (i ? ",\n" : "") << pad;
      write_json(os, j[i], indent + 2);
    }
    os << '\n' << close << ']';
  } else {
    os << scalar_text(j);
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string csv_value(const ordered_json& j) {
  if (j.is_string()) return csv_field(j.get<std::string>());
  if (j.is_primitive()) return csv_field(scalar_text(j));
  return csv_field(j.dump());
}

void csv_row(std::ostringstream& os, const std::string& section, const std::string& name, const std::string& index,
             const std::string& field, const ordered_json& value) {
  os << section << ',' << csv_field(name) << ',' << index << ',' << csv_field(field) << ',' << csv_value(value) << '\n';
}

// Array-valued fields expand to one row per element with a dotted index.
void csv_record(std::ostringstream& os, const std::string& section, const std::string& name, const std::string& index,
                const ordered_json& record) {
  for (const auto& [field, value] : record.items()) {
    if (value.is_array()) {
      for (std::size_t k = 0; k < value.size(); ++k)
        csv_row(os, section, name, index.empty() ? std::to_string(k) : index + "." + std::to_string(k), field, value[k]);
    } else {
      csv_row(os, section, name, index, field, value);
    }
  }
}

}  // namespace

std::string render_json(const ordered_json& doc) {
  std::ostringstream os;
  write_json(os, doc, 0);
  os << '\n';
  return os.str();
}

std::string render_csv(const ordered_json& doc) {
  std::ostringstream os;
  os << "section,name,index,field,value\n";
  for (const char* key : {"schema_version", "library_version", "suite", "passed"})
    if (doc.contains(key)) csv_row(os, "meta", "", "", key, doc.at(key));
  if (doc.contains("config")) {
    for (const auto& [block, value] : doc.at("config").items()) {
      if (value.is_object()) {
        for (const auto& [field, v] : value.items()) csv_row(os, "config", block, "", field, v);
      } else {
        csv_row(os, "config", "", "", block, value);
      }
    }
  }
  if (doc.contains("checks"))
    for (const auto& c : doc.at("checks")) {
      ordered_json rest = c;
      const std::string name = rest.at("name").get<std::string>();
      rest.erase("name");
      csv_record(os, "check", name, "", rest);
    }
  if (doc.contains("summary")) csv_record(os, "summary", "", "", doc.at("summary"));
  if (doc.contains("tables"))
    for (const auto& [name, rows] : doc.at("tables").items())
      for (std::size_t i = 0; i < rows.size(); ++i) csv_record(os, "table", name, std::to_string(i), rows[i]);
  if (doc.contains("series"))
    for (const auto& [name, columns] : doc.at("series").items())
      for (const auto& [field, values] : columns.items())
        for (std::size_t i = 0; i < values.size(); ++i) csv_row(os, "series", name, std::to_string(i), field, values[i]);
  if (doc.contains("warnings"))
    for (std::size_t i = 0; i < doc.at("warnings").size(); ++i)
      csv_row(os, "warning", "", std::to_string(i), "message", doc.at("warnings")[i]);
  return os.str();
}

std::string render(const ordered_json& doc, OutputFormat format) {
  return format == OutputFormat::Json ? render_json(doc) : render_csv(doc);
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  auto tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot create '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorKind::Io, "failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move result into '" + path.string() + "'");
  }
}

}  // namespace tpslab::experiment
