#pragma once

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fundusq/errors.hpp"
#include "fundusq/features.hpp"
#include "fundusq/ml/dataset.hpp"

namespace fundusq::cli {

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> parse_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  if (quoted) throw SchemaError("csv: unterminated quoted field");
  out.push_back(std::move(field));
  return out;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += (ch == '\n' || ch == '\r') ? ' ' : ch;
  }
  return out + '"';
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::optional<int> parse_label(const std::string& s) {
  if (s == "good") return 1;
  if (s == "bad") return 0;
  if (s.empty()) return std::nullopt;
  throw SchemaError("label must be good, bad or empty, got '" + s + "'");
}

inline std::string label_text(std::optional<int> label) {
  if (!label) return "";
  return *label == 1 ? "good" : "bad";
}

struct FeatureRow {
  std::string id;
  std::string subject;
  std::optional<int> label;
  std::vector<double> values;  // empty when extraction failed
  std::string error;
};

struct FeatureTable {
  std::vector<std::string> names;
  std::vector<FeatureRow> rows;
};

inline std::string schema_line() { return "# schema=" + std::string(kFeatureSchemaVersion); }

inline void write_feature_csv(std::ostream& os, const FeatureTable& t) {
  os << schema_line() << '\n' << "id,subject,label";
  for (const auto& n : t.names) os << ',' << n;
  os << ",error\n";
  for (const auto& r : t.rows) {
    os << csv_field(r.id) << ',' << csv_field(r.subject) << ',' << label_text(r.label);
    for (std::size_t j = 0; j < t.names.size(); ++j)
      os << ',' << (r.values.empty() ? std::string() : format_double(r.values[j]));
    os << ',' << csv_field(r.error) << '\n';
  }
}

/// Parses a features CSV. When `expected` is given the header must list
/// exactly those feature columns in that order.
inline FeatureTable read_feature_csv(std::istream& is,
                                     const std::vector<std::string>* expected = nullptr) {
  std::string line;
  if (!std::getline(is, line) || parse_csv_line(line).front() != schema_line())
    throw SchemaError("features csv: missing or unsupported schema line (want '" + schema_line() + "')");
  if (!std::getline(is, line)) throw SchemaError("features csv: missing header");
  const auto header = parse_csv_line(line);
  if (header.size() < 4 || header[0] != "id" || header[1] != "subject" || header[2] != "label" ||
      header.back() != "error")
    throw SchemaError("features csv: header must be id,subject,label,<features...>,error");
  FeatureTable t;
  t.names.assign(header.begin() + 3, header.end() - 1);
  if (expected != nullptr && t.names != *expected)
    throw SchemaError("features csv: feature columns differ from the configured extractor "
                      "(reordered, renamed or missing columns)");

  std::size_t lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = parse_csv_line(line);
    if (f.size() != header.size())
      throw SchemaError("features csv line " + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    FeatureRow r{f[0], f[1], parse_label(f[2]), {}, f.back()};
    if (r.error.empty()) {
      for (std::size_t j = 3; j + 1 < f.size(); ++j) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(f[j], &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != f[j].size())
          throw SchemaError("features csv line " + std::to_string(lineno) + ": bad value '" + f[j] + "'");
        r.values.push_back(v);
      }
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

/// Rows without an extraction error. With `require_labels`, an unlabeled row
/// is an error.
inline ml::FeatureMatrix to_feature_matrix(const FeatureTable& t, bool require_labels) {
  ml::FeatureMatrix m;
  m.names = t.names;
  std::vector<const FeatureRow*> ok;
  for (const auto& r : t.rows) {
    if (!r.error.empty()) continue;
    if (require_labels && !r.label) throw SchemaError("row '" + r.id + "' is unlabeled");
    ok.push_back(&r);
  }
  m.x.resize(static_cast<Eigen::Index>(ok.size()), static_cast<Eigen::Index>(t.names.size()));
  for (std::size_t i = 0; i < ok.size(); ++i) {
    for (std::size_t j = 0; j < t.names.size(); ++j)
      m.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ok[i]->values[j];
    m.labels.push_back(ok[i]->label.value_or(0));
    m.ids.push_back(ok[i]->id);
    m.subjects.push_back(ok[i]->subject);
  }
  return m;
}

}  // namespace fundusq::cli
