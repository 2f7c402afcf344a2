#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fundusq/cli/csv.hpp"
#include "fundusq/errors.hpp"

namespace fundusq::cli {

struct ManifestEntry {
  std::string path;  // as written in the manifest; also the row id
  std::string subject;
  std::optional<int> label;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;  // relative paths resolve against this

  [[nodiscard]] std::filesystem::path resolve(const ManifestEntry& e) const {
    const std::filesystem::path p(e.path);
    return p.is_absolute() ? p : base_dir / p;
  }
};

namespace detail {

inline void check_entries(const Manifest& m) {
  std::set<std::string> seen;
  for (const auto& e : m.entries) {
    if (e.path.empty()) throw SchemaError("manifest: empty path");
    if (e.subject.empty()) throw SchemaError("manifest: empty subject for " + e.path);
    if (!seen.insert(e.path).second) throw SchemaError("manifest: duplicate path " + e.path);
  }
}

inline Manifest parse_json_manifest(std::istream& is) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("manifest: invalid JSON: ") + e.what());
  }
  const nlohmann::json& list = doc.is_object() && doc.contains("entries") ? doc["entries"] : doc;
  if (!list.is_array()) throw SchemaError("manifest: expected an array of entries");
  Manifest m;
  for (const auto& item : list) {
    if (!item.is_object() || !item.contains("path") || !item["path"].is_string())
      throw SchemaError("manifest: every entry needs a string 'path'");
    ManifestEntry e;
    e.path = item["path"].get<std::string>();
    if (item.contains("subject")) {
      const auto& s = item["subject"];
      e.subject = s.is_string() ? s.get<std::string>() : s.dump();
    }
    if (item.contains("label") && !item["label"].is_null()) {
      if (!item["label"].is_string()) throw SchemaError("manifest: label must be a string");
      e.label = parse_label(item["label"].get<std::string>());
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline Manifest parse_csv_manifest(std::istream& is) {
  std::string line;
  Manifest m;
  if (!std::getline(is, line)) return m;
  const auto header = parse_csv_line(line);
  int ip = -1, is_ = -1, il = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "path") ip = static_cast<int>(i);
    else if (header[i] == "subject") is_ = static_cast<int>(i);
    else if (header[i] == "label") il = static_cast<int>(i);
  }
  if (ip < 0 || is_ < 0) throw SchemaError("manifest: CSV header needs path and subject columns");
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = parse_csv_line(line);
    if (f.size() != header.size()) throw SchemaError("manifest: ragged CSV row: " + line);
    ManifestEntry e{f[static_cast<std::size_t>(ip)], f[static_cast<std::size_t>(is_)], std::nullopt};
    if (il >= 0) e.label = parse_label(f[static_cast<std::size_t>(il)]);
    m.entries.push_back(std::move(e));
  }
  return m;
}

}  // namespace detail

/// CSV (path,subject,label) or JSON ([{path, subject, label}] or {"entries": [...]}),
/// chosen by the .json extension.
inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path.string());
  Manifest m = path.extension() == ".json" ? detail::parse_json_manifest(is)
                                           : detail::parse_csv_manifest(is);
  m.base_dir = path.parent_path();
  detail::check_entries(m);
  return m;
}

}  // namespace fundusq::cli
