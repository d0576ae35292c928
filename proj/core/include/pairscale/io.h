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

#ifndef PAIRSCALE_IO_H_
#define PAIRSCALE_IO_H_

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pairscale/comparator.h"
#include "pairscale/comparison_matrix.h"
#include "pairscale/metrics.h"
#include "pairscale/observer.h"
#include "pairscale/scaling.h"

namespace pairscale {

// Version tags written into every emitted artifact.
inline constexpr std::string_view kMatrixFormat = "pairscale-matrix/1";
inline constexpr std::string_view kFeaturesFormat = "pairscale-features/1";
inline constexpr std::string_view kScoresFormat = "pairscale-scores/1";
inline constexpr std::string_view kManifestFormat = "pairscale-manifest/1";
inline constexpr std::string_view kModelFormat = "pairscale-comparator/1";
inline constexpr std::string_view kDesignFormat = "pairscale-design/1";
inline constexpr std::string_view kReportFormat = "pairscale-report/1";
inline constexpr std::string_view kCalibrationFormat = "pairscale-calibration/1";
inline constexpr std::string_view kHistogramFormat = "pairscale-histogram/1";
inline constexpr std::string_view kLossFormat = "pairscale-loss/1";

// Shortest decimal text that reads back to the same double.
std::string FormatDouble(double value);

// Comparison matrix CSV:
//   # pairscale-matrix/1
//   # items: id1,id2,...
//   id_a,id_b,wins_a,wins_b
// One row per observed unordered pair. Other '#' lines and blank lines are
// ignored. Errors carry "<source>:<line>:".
ComparisonMatrix ParseMatrix(std::istream& in, std::string_view source);
ComparisonMatrix LoadMatrix(const std::filesystem::path& path);
std::string MatrixToCsv(const ComparisonMatrix& matrix);
void SaveMatrix(const ComparisonMatrix& matrix, const std::filesystem::path& path);

// Features CSV: rows "id,f1,...,fd". An optional header row starting with
// "id," and '#' comment lines are skipped.
ItemSet ParseFeatures(std::istream& in, std::string_view source);
ItemSet LoadFeatures(const std::filesystem::path& path);
void SaveFeatures(const ItemSet& items, const std::filesystem::path& path);

// Scores JSON: {"format", "convention", "items": [{"id", "score", "sigma"?}]}.
// "zero_mean" marks scaler output; "reference" marks scores placed on the
// scale of a fixed reference set.
inline constexpr std::string_view kZeroMeanConvention = "zero_mean";
inline constexpr std::string_view kReferenceConvention = "reference";
std::string ScoresToJson(const JodScale& scale,
                         std::string_view convention = kZeroMeanConvention);
JodScale ParseScores(std::string_view text, std::string_view source);
JodScale LoadScores(const std::filesystem::path& path);
void SaveScores(const JodScale& scale, const std::filesystem::path& path);

struct SceneFiles {
  std::filesystem::path matrix;
  std::filesystem::path features;
};

// scene name -> attribute name -> files. Relative paths are resolved
// against the manifest's directory.
struct Manifest {
  std::map<std::string, std::map<std::string, SceneFiles>> scenes;
};

Manifest LoadManifest(const std::filesystem::path& path);
void SaveManifest(const Manifest& manifest, const std::filesystem::path& path);

std::string DesignToJson(const Design& design);
Design DesignFromJson(std::string_view text);

// Checkpoint JSON with layer dims, row-major weights, and an echo of the
// configuration that produced it (config_json must be a JSON document,
// or empty for none).
std::string ModelToJson(const ComparatorModel& model,
                        std::string_view config_json = {});
ComparatorModel ModelFromJson(std::string_view text, std::string_view source);
void SaveModel(const ComparatorModel& model, const std::filesystem::path& path,
               std::string_view config_json = {});
ComparatorModel LoadModel(const std::filesystem::path& path);

std::string ReportToJson(const MetricsReport& report);
// Flat "scene,metric,value" rows; aggregates use scene "_median",
// "_mean" and "_moe".
std::string ReportToCsv(const MetricsReport& report);

// "bin,edge_lo,edge_hi,count,mean_pred" rows; mean_pred empty for empty
// bins.
std::string CalibrationToCsv(const CalibrationHistogram& hist);
std::string HistogramToCsv(const std::vector<size_t>& counts);
std::string LossHistoryToCsv(const std::vector<double>& losses);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace pairscale

#endif  // PAIRSCALE_IO_H_
