// Copyright 2026 The Pairscale Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pairscale/io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "json.hpp"
#include "pairscale/error.h"

namespace pairscale {

using nlohmann::json;

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(Trim(line.substr(start)));
      break;
    }
    fields.push_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void Fail(std::string_view source, size_t line, const std::string& msg) {
  throw DataError(std::string(source) + ":" + std::to_string(line) + ": " + msg);
}

bool ParseNumber(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

void CheckId(std::string_view id) {
  if (id.empty() || id.find_first_of(",\n\r") != std::string_view::npos ||
      Trim(id) != id || id.front() == '#') {
    throw DataError("item id '" + std::string(id) +
                    "' cannot be written to CSV (empty, comma, newline, "
                    "leading '#', or surrounding whitespace)");
  }
}

json ParseJson(std::string_view text, std::string_view source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string(source) + ": invalid JSON: " + e.what());
  }
}

void RejectUnknownKeys(const json& obj, std::initializer_list<std::string_view> known,
                       std::string_view where) {
  if (!obj.is_object()) throw DataError(std::string(where) + ": expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (std::string_view k : known) ok = ok || key == k;
    if (!ok) throw DataError(std::string(where) + ": unknown key '" + key + "'");
  }
}

void CheckFormat(const json& obj, std::string_view expected, std::string_view where) {
  if (!obj.contains("format")) return;
  if (!obj["format"].is_string() || obj["format"].get<std::string>() != expected) {
    throw DataError(std::string(where) + ": expected format '" +
                    std::string(expected) + "'");
  }
}

template <typename T>
T Get(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) {
    throw DataError(std::string(where) + ": missing key '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string(where) + ": bad value for '" + key + "': " + e.what());
  }
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Matrix CSV.
// ---------------------------------------------------------------------------

ComparisonMatrix ParseMatrix(std::istream& in, std::string_view source) {
  constexpr std::string_view kItemsTag = "# items:";
  std::optional<ComparisonMatrix> matrix;
  std::set<std::pair<size_t, size_t>> seen;
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = Trim(raw);
    if (line.empty()) continue;
    if (line.starts_with(kItemsTag)) {
      if (matrix) Fail(source, line_no, "duplicate '# items:' header");
      std::vector<std::string> ids;
      std::set<std::string, std::less<>> unique;
      for (std::string_view id : SplitCsv(line.substr(kItemsTag.size()))) {
        if (id.empty()) Fail(source, line_no, "empty item id in header");
        if (!unique.emplace(id).second) {
          Fail(source, line_no, "duplicate item id '" + std::string(id) + "'");
        }
        ids.emplace_back(id);
      }
      matrix.emplace(std::move(ids));
      continue;
    }
    if (line.front() == '#') continue;
    if (!matrix) Fail(source, line_no, "data row before '# items:' header");
    const auto fields = SplitCsv(line);
    if (fields.size() != 4) {
      Fail(source, line_no, "expected 4 fields (id_a,id_b,wins_a,wins_b), got " +
                                std::to_string(fields.size()));
    }
    const auto a = matrix->IndexOf(std::string(fields[0]));
    const auto b = matrix->IndexOf(std::string(fields[1]));
    if (!a) Fail(source, line_no, "unknown id '" + std::string(fields[0]) + "'");
    if (!b) Fail(source, line_no, "unknown id '" + std::string(fields[1]) + "'");
    if (*a == *b) Fail(source, line_no, "self-comparison of '" + std::string(fields[0]) + "'");
    double wins_a = 0.0, wins_b = 0.0;
    if (!ParseNumber(fields[2], wins_a) || !ParseNumber(fields[3], wins_b)) {
      Fail(source, line_no, "malformed count");
    }
    if (wins_a < 0.0 || wins_b < 0.0) Fail(source, line_no, "negative count");
    if (!seen.emplace(std::min(*a, *b), std::max(*a, *b)).second) {
      Fail(source, line_no, "duplicate pair entry " + std::string(fields[0]) +
                                "," + std::string(fields[1]));
    }
    matrix->set_count(*a, *b, wins_a);
    matrix->set_count(*b, *a, wins_b);
  }
  if (!matrix) Fail(source, line_no, "missing '# items:' header");
  return *std::move(matrix);
}

ComparisonMatrix LoadMatrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return ParseMatrix(in, path.string());
}

std::string MatrixToCsv(const ComparisonMatrix& matrix) {
  std::string out = "# " + std::string(kMatrixFormat) + "\n# items: ";
  for (size_t k = 0; k < matrix.size(); ++k) {
    CheckId(matrix.item_ids()[k]);
    if (k > 0) out += ',';
    out += matrix.item_ids()[k];
  }
  out += '\n';
  for (size_t i = 0; i < matrix.size(); ++i) {
    for (size_t j = i + 1; j < matrix.size(); ++j) {
      if (matrix.total(i, j) <= 0.0) continue;
      out += matrix.item_ids()[i] + ',' + matrix.item_ids()[j] + ',' +
             FormatDouble(matrix.count(i, j)) + ',' +
             FormatDouble(matrix.count(j, i)) + '\n';
    }
  }
  return out;
}

void SaveMatrix(const ComparisonMatrix& matrix, const std::filesystem::path& path) {
  WriteFile(path, MatrixToCsv(matrix));
}

// ---------------------------------------------------------------------------
// Features CSV.
// ---------------------------------------------------------------------------

ItemSet ParseFeatures(std::istream& in, std::string_view source) {
  std::vector<Item> items;
  std::string raw;
  size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = SplitCsv(line);
    if (first_row && fields[0] == "id") {
      first_row = false;
      continue;
    }
    first_row = false;
    if (fields.size() < 2) Fail(source, line_no, "expected id followed by features");
    Item item;
    item.id = std::string(fields[0]);
    if (item.id.empty()) Fail(source, line_no, "empty item id");
    for (size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      if (!ParseNumber(fields[k], v)) {
        Fail(source, line_no, "malformed feature value '" + std::string(fields[k]) + "'");
      }
      item.features.push_back(v);
    }
    if (!items.empty() && items.front().features.size() != item.features.size()) {
      Fail(source, line_no, "feature dimension " + std::to_string(item.features.size()) +
                                " differs from " +
                                std::to_string(items.front().features.size()));
    }
    items.push_back(std::move(item));
  }
  try {
    return ItemSet(std::move(items));
  } catch (const DataError& e) {
    throw DataError(std::string(source) + ": " + e.what());
  }
}

ItemSet LoadFeatures(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return ParseFeatures(in, path.string());
}

void SaveFeatures(const ItemSet& items, const std::filesystem::path& path) {
  std::string out = "# " + std::string(kFeaturesFormat) + "\n";
  for (const Item& item : items.items()) {
    CheckId(item.id);
    out += item.id;
    for (double f : item.features) out += ',' + FormatDouble(f);
    out += '\n';
  }
  WriteFile(path, out);
}

// ---------------------------------------------------------------------------
// Scores JSON.
// ---------------------------------------------------------------------------

std::string ScoresToJson(const JodScale& scale, std::string_view convention) {
  if (convention != kZeroMeanConvention && convention != kReferenceConvention) {
    throw std::invalid_argument("ScoresToJson: unknown convention");
  }
  json items = json::array();
  for (size_t k = 0; k < scale.item_ids.size(); ++k) {
    json item = {{"id", scale.item_ids[k]}, {"score", scale.scores[k]}};
    if (!scale.sigmas.empty()) item["sigma"] = scale.sigmas[k];
    items.push_back(std::move(item));
  }
  json doc = {{"format", kScoresFormat}, {"convention", convention}, {"items", items}};
  return doc.dump(2) + "\n";
}

JodScale ParseScores(std::string_view text, std::string_view source) {
  const json doc = ParseJson(text, source);
  RejectUnknownKeys(doc, {"format", "convention", "items"}, source);
  CheckFormat(doc, kScoresFormat, source);
  if (doc.contains("convention") && doc["convention"] != kZeroMeanConvention &&
      doc["convention"] != kReferenceConvention) {
    throw DataError(std::string(source) + ": unsupported convention");
  }
  const json items = doc.contains("items") ? doc["items"] : json();
  if (!items.is_array()) throw DataError(std::string(source) + ": 'items' must be an array");
  JodScale scale;
  bool any_sigma = false, all_sigma = true;
  std::set<std::string> seen;
  for (const json& item : items) {
    RejectUnknownKeys(item, {"id", "score", "sigma"}, source);
    scale.item_ids.push_back(Get<std::string>(item, "id", source));
    if (!seen.insert(scale.item_ids.back()).second) {
      throw DataError(std::string(source) + ": duplicate id '" + scale.item_ids.back() + "'");
    }
    scale.scores.push_back(Get<double>(item, "score", source));
    if (item.contains("sigma")) {
      any_sigma = true;
      scale.sigmas.push_back(Get<double>(item, "sigma", source));
    } else {
      all_sigma = false;
    }
  }
  if (any_sigma && !all_sigma) {
    throw DataError(std::string(source) + ": 'sigma' given for some items only");
  }
  return scale;
}

JodScale LoadScores(const std::filesystem::path& path) {
  return ParseScores(ReadFile(path), path.string());
}

void SaveScores(const JodScale& scale, const std::filesystem::path& path) {
  WriteFile(path, ScoresToJson(scale));
}

// ---------------------------------------------------------------------------
// Manifest.
// ---------------------------------------------------------------------------

Manifest LoadManifest(const std::filesystem::path& path) {
  const std::string where = path.string();
  const json doc = ParseJson(ReadFile(path), where);
  RejectUnknownKeys(doc, {"format", "scenes"}, where);
  CheckFormat(doc, kManifestFormat, where);
  const json scenes = doc.contains("scenes") ? doc["scenes"] : json();
  if (!scenes.is_object() || scenes.empty()) {
    throw DataError(where + ": 'scenes' must be a non-empty object");
  }
  const std::filesystem::path base = path.parent_path();
  Manifest manifest;
  for (const auto& [scene, attributes] : scenes.items()) {
    if (!attributes.is_object() || attributes.empty()) {
      throw DataError(where + ": scene '" + scene + "' has no attributes");
    }
    for (const auto& [attribute, files] : attributes.items()) {
      const std::string at = where + ": " + scene + "/" + attribute;
      RejectUnknownKeys(files, {"matrix", "features"}, at);
      SceneFiles sf;
      sf.matrix = Get<std::string>(files, "matrix", at);
      sf.features = Get<std::string>(files, "features", at);
      if (sf.matrix.is_relative()) sf.matrix = base / sf.matrix;
      if (sf.features.is_relative()) sf.features = base / sf.features;
      manifest.scenes[scene][attribute] = sf;
    }
  }
  return manifest;
}

void SaveManifest(const Manifest& manifest, const std::filesystem::path& path) {
  json scenes = json::object();
  for (const auto& [scene, attributes] : manifest.scenes) {
    for (const auto& [attribute, files] : attributes) {
      scenes[scene][attribute] = {{"matrix", files.matrix.generic_string()},
                                  {"features", files.features.generic_string()}};
    }
  }
  json doc = {{"format", kManifestFormat}, {"scenes", scenes}};
  WriteFile(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Design JSON.
// ---------------------------------------------------------------------------

std::string DesignToJson(const Design& design) {
  json pairs = json::array();
  for (const auto& [a, b] : design.pairs) pairs.push_back({a, b});
  json doc = {{"format", kDesignFormat},
              {"kind", DesignKindName(design.kind)},
              {"num_items", design.num_items},
              {"comparisons_per_pair", design.comparisons_per_pair},
              {"pairs", pairs}};
  return doc.dump(2) + "\n";
}

Design DesignFromJson(std::string_view text) {
  const json doc = ParseJson(text, "design");
  RejectUnknownKeys(doc, {"format", "kind", "num_items", "comparisons_per_pair", "pairs"},
                    "design");
  CheckFormat(doc, kDesignFormat, "design");
  Design d;
  d.kind = ParseDesignKind(Get<std::string>(doc, "kind", "design"));
  d.num_items = Get<size_t>(doc, "num_items", "design");
  d.comparisons_per_pair = Get<size_t>(doc, "comparisons_per_pair", "design");
  for (const json& p : Get<json>(doc, "pairs", "design")) {
    const auto pr = p.get<std::pair<size_t, size_t>>();
    if (pr.first >= d.num_items || pr.second >= d.num_items || pr.first == pr.second) {
      throw DataError("design: invalid pair");
    }
    d.pairs.push_back(pr);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Model checkpoint.
// ---------------------------------------------------------------------------

std::string ModelToJson(const ComparatorModel& model, std::string_view config_json) {
  json layers = json::array();
  for (const DenseLayer& l : model.layers) {
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"activation", ActivationName(l.activation)},
                      {"weights", l.weights},
                      {"bias", l.bias}});
  }
  json doc = {{"format", kModelFormat},
              {"input_dim", model.input_dim()},
              {"embedding_dim", model.embedding_dim()},
              {"layers", layers},
              {"hub", {{"weight", model.hub_weight}, {"bias", model.hub_bias}}}};
  if (!config_json.empty()) doc["config"] = ParseJson(config_json, "config echo");
  return doc.dump(2) + "\n";
}

ComparatorModel ModelFromJson(std::string_view text, std::string_view source) {
  const json doc = ParseJson(text, source);
  const std::string where(source);
  RejectUnknownKeys(doc, {"format", "input_dim", "embedding_dim", "layers", "hub", "config"},
                    where);
  if (Get<std::string>(doc, "format", where) != kModelFormat) {
    throw DataError(where + ": expected format '" + std::string(kModelFormat) + "'");
  }
  ComparatorModel model;
  for (const json& lj : Get<json>(doc, "layers", where)) {
    RejectUnknownKeys(lj, {"in", "out", "activation", "weights", "bias"}, where);
    DenseLayer l;
    l.in = Get<size_t>(lj, "in", where);
    l.out = Get<size_t>(lj, "out", where);
    l.activation = ParseActivation(Get<std::string>(lj, "activation", where));
    l.weights = Get<std::vector<double>>(lj, "weights", where);
    l.bias = Get<std::vector<double>>(lj, "bias", where);
    model.layers.push_back(std::move(l));
  }
  const json hub = Get<json>(doc, "hub", where);
  RejectUnknownKeys(hub, {"weight", "bias"}, where);
  model.hub_weight = Get<std::vector<double>>(hub, "weight", where);
  model.hub_bias = Get<double>(hub, "bias", where);
  try {
    model.CheckConsistent();
  } catch (const DataError& e) {
    throw DataError(where + ": " + e.what());
  }
  if (Get<size_t>(doc, "input_dim", where) != model.input_dim() ||
      Get<size_t>(doc, "embedding_dim", where) != model.embedding_dim()) {
    throw DataError(where + ": declared dimensions do not match layers");
  }
  return model;
}

void SaveModel(const ComparatorModel& model, const std::filesystem::path& path,
               std::string_view config_json) {
  WriteFile(path, ModelToJson(model, config_json));
}

ComparatorModel LoadModel(const std::filesystem::path& path) {
  return ModelFromJson(ReadFile(path), path.string());
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

namespace {

json OptionalNumber(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string CsvValue(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

}  // namespace

std::string ReportToJson(const MetricsReport& report) {
  json scenes = json::object();
  for (const auto& [scene, m] : report.per_scene) {
    scenes[scene] = {{"srcc", OptionalNumber(m.srcc)},
                     {"plcc", OptionalNumber(m.plcc)},
                     {"krcc", OptionalNumber(m.krcc)},
                     {"mae", m.mae}};
  }
  json aggregates = json::object();
  for (const auto& [metric, agg] : report.aggregates) {
    if (!agg) {
      aggregates[metric] = nullptr;
      continue;
    }
    aggregates[metric] = {{"median", agg->median},
                          {"mean", agg->mean},
                          {"moe", agg->moe},
                          {"count", agg->count},
                          {"degenerate", agg->degenerate}};
  }
  json doc = {{"format", kReportFormat}, {"per_scene", scenes}, {"aggregates", aggregates}};
  return doc.dump(2) + "\n";
}

std::string ReportToCsv(const MetricsReport& report) {
  std::string out = "# " + std::string(kReportFormat) + "\nscene,metric,value\n";
  for (const auto& [scene, m] : report.per_scene) {
    out += scene + ",srcc," + CsvValue(m.srcc) + "\n";
    out += scene + ",plcc," + CsvValue(m.plcc) + "\n";
    out += scene + ",krcc," + CsvValue(m.krcc) + "\n";
    out += scene + ",mae," + FormatDouble(m.mae) + "\n";
  }
  for (const auto& [metric, agg] : report.aggregates) {
    if (!agg) continue;
    out += "_median," + metric + "," + FormatDouble(agg->median) + "\n";
    out += "_mean," + metric + "," + FormatDouble(agg->mean) + "\n";
    out += "_moe," + metric + "," + FormatDouble(agg->moe) + "\n";
  }
  return out;
}

std::string CalibrationToCsv(const CalibrationHistogram& hist) {
  std::string out =
      "# " + std::string(kCalibrationFormat) + "\nbin,edge_lo,edge_hi,count,mean_pred\n";
  for (size_t b = 0; b < hist.bins.size(); ++b) {
    const CalibrationBin& bin = hist.bins[b];
    out += std::to_string(b) + "," + FormatDouble(bin.edge_lo) + "," +
           FormatDouble(bin.edge_hi) + "," + std::to_string(bin.count) + "," +
           CsvValue(bin.mean_prediction) + "\n";
  }
  return out;
}

std::string HistogramToCsv(const std::vector<size_t>& counts) {
  std::string out = "# " + std::string(kHistogramFormat) + "\nbin,edge_lo,edge_hi,count\n";
  const double bins = static_cast<double>(counts.size());
  for (size_t b = 0; b < counts.size(); ++b) {
    out += std::to_string(b) + "," + FormatDouble(static_cast<double>(b) / bins) + "," +
           FormatDouble(static_cast<double>(b + 1) / bins) + "," +
           std::to_string(counts[b]) + "\n";
  }
  return out;
}

std::string LossHistoryToCsv(const std::vector<double>& losses) {
  std::string out = "# " + std::string(kLossFormat) + "\nepoch,loss\n";
  for (size_t e = 0; e < losses.size(); ++e) {
    out += std::to_string(e + 1) + "," + FormatDouble(losses[e]) + "\n";
  }
  return out;
}

}  // namespace pairscale
