#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "vtask/error.hpp"
#include "vtask/record_io.hpp"
#include "vtask/stats.hpp"
#include "support/generators.hpp"

using namespace vtask;
using namespace vtask::stats;
using io::Json;

namespace {

std::vector<data::AnnotatedImage> load(const std::string& name) {
  std::ifstream in(std::string(FLD_FIXTURES) + "/" + name);
  std::vector<data::AnnotatedImage> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(io::image_from_json(Json::parse(line)));
  return out;
}

// Non-zero histogram bins and heatmap cells, the form the golden file uses.
Json sparse(const Json& spatial) {
  Json area = Json::object();
  Json aspect = Json::object();
  const auto& ac = spatial["area_histogram"]["counts"];
  const auto& sc = spatial["aspect_histogram"]["counts"];
  for (std::size_t i = 0; i < ac.size(); ++i) {
    if (ac[i] != 0) area[std::to_string(i)] = ac[i];
    if (sc[i] != 0) aspect[std::to_string(i)] = sc[i];
  }
  Json cells = Json::array();
  const auto& grid = spatial["center_heatmap"]["counts"];
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      if (grid[r][c] != 0) cells.push_back({r, c, grid[r][c]});
    }
  }
  return {{"boxes", spatial["boxes"]},
          {"aspect_skipped", spatial["aspect_skipped"]},
          {"area", area},
          {"aspect", aspect},
          {"heatmap", cells}};
}

}  // namespace

TEST(Tokens, Count) {
  EXPECT_EQ(count_tokens(""), 0u);
  EXPECT_EQ(count_tokens("  a  b\tc\n"), 3u);
}

TEST(Golden, HandComputedFixture) {
  std::ifstream in(std::string(FLD_FIXTURES) + "/stats_corpus.golden.json");
  const Json golden = Json::parse(in);
  const std::size_t res = golden["spatial_sparse"]["heatmap_resolution"];
  CorpusAccumulator acc(res);
  for (const auto& img : load("stats_corpus.jsonl")) acc.add(img);
  const Json j = acc.to_json();
  EXPECT_EQ(j["records"], golden["records"]);
  EXPECT_EQ(j["skipped_records"], golden["skipped_records"]);
  EXPECT_EQ(j["annotation"], golden["annotation"]);
  EXPECT_EQ(j["semantic"], golden["semantic"]);
  for (const char* src : {"region_text", "text_phrase_region"}) {
    EXPECT_EQ(sparse(j["spatial"][src]), golden["spatial_sparse"][src]) << src;
    EXPECT_EQ(j["spatial"][src]["area_histogram"]["bin_edges"].size(), kSpatialBins + 1);
    EXPECT_EQ(j["spatial"][src]["center_heatmap"]["counts"].size(), res);
  }
}

TEST(Histogram, Binning) {
  const Histogram h = Histogram::uniform(0.0, 1.0, 50);
  EXPECT_EQ(h.bin_of(0.0), 0u);
  EXPECT_EQ(h.bin_of(0.019), 0u);
  EXPECT_EQ(h.bin_of(0.5), 25u);
  EXPECT_EQ(h.bin_of(1.0), 49u);
  EXPECT_EQ(h.bin_of(-3.0), 0u);
  EXPECT_EQ(h.bin_of(7.0), 49u);
  EXPECT_DOUBLE_EQ(h.bin_edges.back(), 1.0);
  EXPECT_THROW(Histogram::uniform(1.0, 1.0, 5), DomainError);
  EXPECT_THROW(Histogram::uniform(0.0, 1.0, 0), DomainError);
}

TEST(Heatmap, Cells) {
  HeatmapGrid g(4);
  g.add(0.0, 0.99);
  g.add(1.0, 0.0);
  g.add(0.5, 0.5);
  EXPECT_EQ(g.at(3, 0), 1u);
  EXPECT_EQ(g.at(0, 3), 1u);
  EXPECT_EQ(g.at(2, 2), 1u);
  EXPECT_EQ(g.total(), 3u);
}

TEST(Spatial, ObservationsConserved) {
  gen::Rng rng(61);
  SpatialAccumulator acc(BoxSource::Triplets, 16);
  std::uint64_t boxes = 0;
  std::uint64_t degenerate = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto size = gen::image_size(rng);
    geometry::BBox b = gen::box_in(rng, size);
    if (gen::coin(rng, 0.1)) b.x1 = b.x0;
    if (b.width() <= 0 || b.height() <= 0) ++degenerate;
    acc.add_box(b, size);
    ++boxes;
  }
  const auto& s = acc.finish();
  EXPECT_EQ(s.boxes, boxes);
  EXPECT_EQ(s.area.total(), boxes);
  EXPECT_EQ(s.heatmap.total(), boxes);
  EXPECT_EQ(s.aspect_skipped, degenerate);
  EXPECT_EQ(s.aspect.total() + s.aspect_skipped, boxes);
}

TEST(Spatial, AspectClip) {
  SpatialAccumulator acc(BoxSource::RegionText, 4);
  acc.add_box({0, 0, 1000, 1}, {1000, 1000});
  acc.add_box({0, 0, 1, 1000}, {1000, 1000});
  const auto& s = acc.finish();
  EXPECT_EQ(s.aspect.counts.back(), 1u);
  EXPECT_EQ(s.aspect.counts.front(), 1u);
  EXPECT_NEAR(s.aspect.bin_edges.back(), std::log(20.0), 1e-15);
}

TEST(Corpus, MergeOrderAndSplitInvariance) {
  gen::Rng rng(62);
  std::vector<data::AnnotatedImage> corpus;
  for (int i = 0; i < 400; ++i) corpus.push_back(gen::image(rng, "s" + std::to_string(i)));
  CorpusAccumulator whole;
  for (const auto& img : corpus) whole.add(img);
  const std::string expected = whole.to_json().dump();

  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t parts = gen::index_below(rng, 12) + 1;
    std::vector<CorpusAccumulator> shards(parts);
    for (const auto& img : corpus) shards[gen::index_below(rng, parts)].add(img);
    CorpusAccumulator merged;
    // Merge in a shuffled order: integer state makes the result exact.
    std::vector<std::size_t> order(parts);
    for (std::size_t k = 0; k < parts; ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k : order) merged.merge(shards[k]);
    ASSERT_EQ(merged.to_json().dump(), expected);
  }
}

TEST(Corpus, EmptyIsZeroed) {
  const Json j = CorpusAccumulator().to_json();
  EXPECT_EQ(j["records"], 0);
  EXPECT_EQ(j["annotation"].size(), 8u);
  for (const auto& row : j["annotation"]) EXPECT_EQ(row["image_annotations"], 0);
  EXPECT_TRUE(j["semantic"]["by_text_type"].empty());
  EXPECT_EQ(j["spatial"]["region_text"]["boxes"], 0);
}

TEST(Corpus, MismatchedResolutionsDoNotMerge) {
  CorpusAccumulator a(8);
  const CorpusAccumulator b(16);
  EXPECT_THROW(a.merge(b), DomainError);
}

TEST(Semantic, MeanOfMeans) {
  MeanOfMeans m;
  m.add(1, 2);
  m.add(3, 1);
  m.add(5, 0);
  EXPECT_DOUBLE_EQ(*m.value(), (0.5 + 3.0) / 2);
  EXPECT_FALSE(MeanOfMeans().value().has_value());
}

TEST(Csv, Shapes) {
  const Histogram h = Histogram::uniform(0.0, 1.0, 4);
  EXPECT_EQ(histogram_csv(h), "bin_start,bin_end,count\n0,0.25,0\n0.25,0.5,0\n0.5,0.75,0\n0.75,1,0\n");
  HeatmapGrid g(2);
  g.add(0.9, 0.1);
  EXPECT_EQ(heatmap_csv(g), "0,1\n0,0\n");
}
