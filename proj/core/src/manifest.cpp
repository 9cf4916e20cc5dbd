#include "sonoclass/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sonoclass/error.hpp"
#include "sonoclass/hash.hpp"
#include "sonoclass/rng.hpp"

namespace sonoclass {
namespace {

Split parse_split(std::string_view text, std::size_t line) {
  if (text.empty()) return Split::kUnassigned;
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  throw Error(Errc::kManifest, "line " + std::to_string(line) + ": unknown split '" +
                                   std::string(text) + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

}  // namespace

std::string_view split_name(Split split) noexcept {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "";
  }
  return "";
}

std::filesystem::path DatasetManifest::resolve(const ManifestEntry& entry) const {
  if (entry.path.is_absolute() || base_dir.empty()) return entry.path;
  return base_dir / entry.path;
}

std::vector<std::string> DatasetManifest::classes() const {
  std::set<std::string> labels;
  for (const auto& e : entries) labels.insert(e.label);
  return {labels.begin(), labels.end()};
}

std::vector<std::size_t> DatasetManifest::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].split == split) out.push_back(i);
  }
  return out;
}

bool DatasetManifest::fully_split() const {
  return std::none_of(entries.begin(), entries.end(),
                      [](const ManifestEntry& e) { return e.split == Split::kUnassigned; });
}

void DatasetManifest::validate(bool require_splits) const {
  if (entries.empty()) throw Error(Errc::kManifest, "manifest has no entries");
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.label.empty()) throw Error(Errc::kManifest, "empty label for " + e.path.string());
    if (!seen.insert(e.path.generic_string()).second) {
      throw Error(Errc::kManifest, "duplicate path " + e.path.string());
    }
  }
  if (require_splits) {
    if (!fully_split()) throw Error(Errc::kManifest, "manifest has entries without a split");
    if (indices(Split::kTrain).empty() || indices(Split::kTest).empty()) {
      throw Error(Errc::kManifest, "both train and test splits must be non-empty");
    }
  }
}

std::uint64_t DatasetManifest::split_hash() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& e : entries) {
    h = fnv1a(e.path.generic_string(), h);
    h = fnv1a("\t", h);
    h = fnv1a(e.label, h);
    h = fnv1a("\t", h);
    h = fnv1a(split_name(e.split), h);
    h = fnv1a("\n", h);
  }
  return h;
}

DatasetManifest parse_manifest_tsv(std::string_view text, const std::filesystem::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 3) {
      throw Error(Errc::kManifest, "line " + std::to_string(line_no) +
                                       ": expected path<TAB>label[<TAB>split]");
    }
    ManifestEntry e;
    e.path = std::filesystem::path(std::string(fields[0]));
    e.label = std::string(fields[1]);
    e.split = fields.size() == 3 ? parse_split(fields[2], line_no) : Split::kUnassigned;
    if (e.path.empty()) throw Error(Errc::kManifest, "line " + std::to_string(line_no) + ": empty path");
    m.entries.push_back(std::move(e));
    if (end == text.size()) break;
  }
  return m;
}

DatasetManifest parse_manifest_json(std::string_view text, const std::filesystem::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kManifest, std::string("invalid JSON manifest: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw Error(Errc::kManifest, "JSON manifest needs an \"entries\" array");
  }
  std::size_t i = 0;
  for (const auto& item : doc["entries"]) {
    ++i;
    if (!item.is_object() || !item.contains("path") || !item.contains("label") ||
        !item["path"].is_string() || !item["label"].is_string()) {
      throw Error(Errc::kManifest, "entry " + std::to_string(i) + " needs string path and label");
    }
    ManifestEntry e;
    e.path = std::filesystem::path(item["path"].get<std::string>());
    e.label = item["label"].get<std::string>();
    if (item.contains("split")) {
      if (!item["split"].is_string()) throw Error(Errc::kManifest, "split must be a string");
      e.split = parse_split(item["split"].get<std::string>(), i);
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto base = path.parent_path();
  if (path.extension() == ".json") return parse_manifest_json(text, base);
  return parse_manifest_tsv(text, base);
}

std::string to_tsv(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    out += e.path.generic_string();
    out += '\t';
    out += e.label;
    if (e.split != Split::kUnassigned) {
      out += '\t';
      out += split_name(e.split);
    }
    out += '\n';
  }
  return out;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out << to_tsv(manifest);
}

std::size_t train_count(std::size_t class_size, double train_fraction) {
  // The small slack keeps 2/3 * 312 = 208.00000000000003 from rounding up.
  const double raw = train_fraction * static_cast<double>(class_size);
  return std::min(class_size, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

DatasetManifest auto_split(DatasetManifest manifest, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(Errc::kInvalidArgument, "train fraction must lie in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    by_class[manifest.entries[i].label].push_back(i);
  }
  for (auto& [label, members] : by_class) {
    if (members.size() < 3) {
      throw Error(Errc::kClassTooSmall, "class '" + label + "' has " +
                                            std::to_string(members.size()) +
                                            " entries; at least 3 are needed to split");
    }
    Rng rng(mix_seed(seed, fnv1a(label)));
    rng.shuffle(members);
    const std::size_t n_train = train_count(members.size(), train_fraction);
    for (std::size_t i = 0; i < members.size(); ++i) {
      manifest.entries[members[i]].split = i < n_train ? Split::kTrain : Split::kTest;
    }
  }
  return manifest;
}

}  // namespace sonoclass
