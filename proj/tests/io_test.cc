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

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "pairscale/error.h"
#include "test_support.h"

namespace pairscale {
namespace {

namespace fs = std::filesystem;
using ::pairscale::testing::MakeIds;
using ::pairscale::testing::RandomMatrix;
using ::pairscale::testing::RandomModel;

ComparisonMatrix Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseMatrix(in, "test.csv");
}

std::string ParseError(const std::string& text) {
  try {
    Parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pairscale_io_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(FormatDoubleTest, RoundTrips) {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 123456789.123}) {
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
  EXPECT_EQ(FormatDouble(4.0), "4");
}

TEST(MatrixCsvTest, TripletRow) {
  const auto m = Parse("# items: a,b\na,b,4,1\n");
  EXPECT_EQ(m.count(0, 1), 4);
  EXPECT_EQ(m.count(1, 0), 1);
}

TEST(MatrixCsvTest, ReversedRowFillsTransposedCells) {
  const auto m = Parse("# items: a,b,c\nc,a,2,7\n");
  EXPECT_EQ(m.count(2, 0), 2);
  EXPECT_EQ(m.count(0, 2), 7);
}

TEST(MatrixCsvTest, ErrorsCarryLocation) {
  EXPECT_NE(ParseError("# items: a,b\na,z,1,1\n").find("test.csv:2: unknown id"),
            std::string::npos);
  EXPECT_NE(ParseError("a,b,1,1\n").find("header"), std::string::npos);
  EXPECT_NE(ParseError("# items: a,b\na,b,1,x\n").find("malformed count"),
            std::string::npos);
  EXPECT_NE(ParseError("# items: a,b\na,b,1,1\nb,a,1,1\n").find("duplicate pair"),
            std::string::npos);
  EXPECT_NE(ParseError("# items: a,b\na,b,-1,1\n").find("negative count"),
            std::string::npos);
  EXPECT_NE(ParseError("# items: a,b\na,a,1,1\n").find("self-comparison"),
            std::string::npos);
  EXPECT_NE(ParseError("").find("missing"), std::string::npos);
}

TEST(MatrixCsvTest, CommentsAndBlankLinesIgnored) {
  const auto m = Parse("# pairscale-matrix/1\n\n# items: a,b\n# note\n a , b , 2 , 3 \n");
  EXPECT_EQ(m.count(0, 1), 2);
  EXPECT_EQ(m.count(1, 0), 3);
}

TEST(MatrixCsvTest, RoundTripPreservesRandomMatrices) {
  for (uint64_t seed = 0; seed < 40; ++seed) {
    auto m = RandomMatrix(1 + seed % 9, 0.6, 12, true, seed);
    if (seed % 3 == 0 && m.size() > 1) m.set_count(0, 1, 2.25);
    const std::string text = MatrixToCsv(m);
    ASSERT_EQ(text.rfind("# pairscale-matrix/1\n", 0), 0u);
    const auto back = Parse(text);
    EXPECT_EQ(back, m);
    EXPECT_TRUE(Validate(back).empty());
  }
}

TEST(MatrixCsvTest, UnwritableIdRejected) {
  EXPECT_THROW(MatrixToCsv(ComparisonMatrix({"a,b", "c"})), DataError);
}

TEST_F(TempDir, MatrixFileRoundTrip) {
  const auto m = RandomMatrix(6, 0.8, 5, false, 3);
  SaveMatrix(m, dir_ / "sub" / "m.csv");
  EXPECT_EQ(LoadMatrix(dir_ / "sub" / "m.csv"), m);
  EXPECT_THROW(LoadMatrix(dir_ / "missing.csv"), DataError);
}

TEST(FeaturesCsvTest, ParsesWithHeader) {
  std::istringstream in("id,f1,f2\n# c\na,1,2\nb,3,4.5\n");
  const ItemSet items = ParseFeatures(in, "f.csv");
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items.feature_dim(), 2u);
  EXPECT_EQ(items[1].features[1], 4.5);
}

TEST(FeaturesCsvTest, RejectsRaggedRows) {
  std::istringstream in("a,1,2\nb,3\n");
  EXPECT_THROW(ParseFeatures(in, "f.csv"), DataError);
  std::istringstream bad("a,1,zz\n");
  EXPECT_THROW(ParseFeatures(bad, "f.csv"), DataError);
}

TEST_F(TempDir, FeaturesRoundTrip) {
  const ItemSet items({{"x", {0.1, -2.0, 1.0 / 3.0}}, {"y", {1e-9, 5, 6}}});
  SaveFeatures(items, dir_ / "f.csv");
  const ItemSet back = LoadFeatures(dir_ / "f.csv");
  ASSERT_EQ(back.size(), 2u);
  for (size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(back[k].id, items[k].id);
    EXPECT_EQ(back[k].features, items[k].features);
  }
}

TEST(ScoresJsonTest, RoundTripWithAndWithoutSigma) {
  JodScale s{{"a", "b", "c"}, {0.5, -0.25, -0.25}, {}};
  EXPECT_EQ(ParseScores(ScoresToJson(s), "s").scores, s.scores);
  s.sigmas = {0.1, 0.2, 0.3};
  const JodScale back = ParseScores(ScoresToJson(s), "s");
  EXPECT_EQ(back.item_ids, s.item_ids);
  EXPECT_EQ(back.sigmas, s.sigmas);
}

TEST(ScoresJsonTest, StrictKeysAndFormat) {
  EXPECT_THROW(ParseScores(R"({"format":"pairscale-scores/1","convention":"zero_mean",)"
                           R"("items":[],"extra":1})", "s"),
               DataError);
  EXPECT_THROW(ParseScores(R"({"format":"other/1","convention":"zero_mean","items":[]})", "s"),
               DataError);
  EXPECT_THROW(ParseScores("not json", "s"), DataError);
}

TEST(ScoresJsonTest, ReferenceConventionRoundTrips) {
  const JodScale s{{"q"}, {3.25}, {}};
  const std::string text = ScoresToJson(s, kReferenceConvention);
  EXPECT_NE(text.find("\"reference\""), std::string::npos);
  EXPECT_EQ(ParseScores(text, "s").scores, s.scores);
  EXPECT_THROW(ScoresToJson(s, "median"), std::invalid_argument);
  EXPECT_THROW(ParseScores(R"({"format":"pairscale-scores/1","convention":"median","items":[]})", "s"),
               DataError);
}

TEST_F(TempDir, ManifestResolvesRelativePaths) {
  Manifest m;
  m.scenes["s1"]["overall"] = {"s1.csv", "s1_features.csv"};
  m.scenes["s2"]["color"] = {"/abs/m.csv", "/abs/f.csv"};
  SaveManifest(m, dir_ / "manifest.json");
  const Manifest back = LoadManifest(dir_ / "manifest.json");
  EXPECT_EQ(back.scenes.at("s1").at("overall").matrix, dir_ / "s1.csv");
  EXPECT_EQ(back.scenes.at("s2").at("color").features, fs::path("/abs/f.csv"));
}

TEST_F(TempDir, ManifestRejectsUnknownKeys) {
  WriteFile(dir_ / "m.json",
            R"({"format":"pairscale-manifest/1","scenes":{"s":{"a":)"
            R"({"matrix":"m","features":"f","weights":"w"}}}})");
  EXPECT_THROW(LoadManifest(dir_ / "m.json"), DataError);
}

TEST(DesignJsonTest, RoundTrip) {
  Design d{DesignKind::kChainPlusRandom, 4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}, 7};
  const Design back = DesignFromJson(DesignToJson(d));
  EXPECT_EQ(back.kind, d.kind);
  EXPECT_EQ(back.num_items, 4u);
  EXPECT_EQ(back.pairs, d.pairs);
  EXPECT_EQ(back.comparisons_per_pair, 7u);
}

TEST(ModelJsonTest, RoundTripIsExact) {
  const ComparatorModel model = RandomModel({5, 7, 3}, 11);
  const ComparatorModel back =
      ModelFromJson(ModelToJson(model, R"({"seed": 1})"), "model");
  EXPECT_EQ(back, model);
}

TEST(ModelJsonTest, RejectsInconsistentShapes) {
  ComparatorModel model = RandomModel({4, 3}, 2);
  model.hub_weight.push_back(1.0);
  EXPECT_THROW(ModelFromJson(ModelToJson(model), "model"), DataError);
}

TEST(ReportTest, CsvHasAggregateRows) {
  std::map<std::string, SceneMetrics> per_scene;
  per_scene["a"] = {0.9, 0.8, 0.7, 0.1};
  per_scene["b"] = {0.5, std::nullopt, 0.3, 0.2};
  const std::string csv = ReportToCsv(BuildReport(per_scene));
  EXPECT_NE(csv.find("_median,srcc,0.5"), std::string::npos);
  EXPECT_NE(csv.find("b,plcc,\n"), std::string::npos);
  EXPECT_NE(ReportToJson(BuildReport(per_scene)).find("pairscale-report/1"),
            std::string::npos);
}

TEST(CsvTest, HistogramAndLoss) {
  EXPECT_NE(HistogramToCsv({1, 2}).find("0.5"), std::string::npos);
  EXPECT_NE(LossHistoryToCsv({0.5, 0.25}).find("0.25"), std::string::npos);
}

}  // namespace
}  // namespace pairscale
