#include <gtest/gtest.h>

#include <fstream>

#include "vtask/data_engine.hpp"
#include "vtask/error.hpp"
#include "vtask/record_io.hpp"
#include "support/generators.hpp"
#include "support/laws.hpp"

using namespace vtask;
using namespace vtask::data;
using geometry::BBox;

namespace {

std::vector<AnnotatedImage> load(const std::string& name) {
  std::ifstream in(std::string(FLD_FIXTURES) + "/" + name);
  std::vector<AnnotatedImage> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(io::image_from_json(io::Json::parse(line)));
  return out;
}

std::size_t total(const DropCounts& c, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& [k, v] : c) {
    if (k.rfind(prefix, 0) == 0) n += v;
  }
  return n;
}

}  // namespace

TEST(Records, GeneratedImagesAreValid) {
  gen::Rng rng(51);
  for (int i = 0; i < 300; ++i) ASSERT_NO_THROW(validate(gen::image(rng, "g" + std::to_string(i))));
}

TEST(Records, JsonRoundTrip) {
  gen::Rng rng(52);
  for (int i = 0; i < 300; ++i) {
    const auto img = gen::image(rng, "j" + std::to_string(i));
    ASSERT_EQ(io::image_from_json(io::to_json(img)), img);
  }
}

TEST(Records, SchemaViolations) {
  const io::Json good = io::to_json(load("filter_corpus.jsonl")[1]);
  EXPECT_NO_THROW(io::image_from_json(good));
  auto broken = [&](auto edit) {
    io::Json j = good;
    edit(j);
    return j;
  };
  EXPECT_THROW(io::image_from_json(broken([](io::Json& j) { j.erase("fld_schema"); })), SchemaError);
  EXPECT_THROW(io::image_from_json(broken([](io::Json& j) { j["fld_schema"] = 2; })), SchemaError);
  EXPECT_THROW(io::image_from_json(broken([](io::Json& j) { j["size"]["width"] = -1; })), SchemaError);
  EXPECT_THROW(io::image_from_json(broken([](io::Json& j) { j["triplets"][0]["text_ref"] = 5; })), SchemaError);
  EXPECT_THROW(io::image_from_json(broken([](io::Json& j) { j["triplets"][0]["phrase"]["text"] = "Me"; })),
               SchemaError);
  EXPECT_THROW(io::image_from_json(broken([](io::Json& j) { j["region_texts"][0]["region"] = {0, 0, 2000, 10}; })),
               SchemaError);
  EXPECT_THROW(io::image_from_json(broken([](io::Json& j) { j["region_texts"][0]["confidence"] = 1.5; })),
               SchemaError);
  EXPECT_THROW(io::image_from_json(broken([](io::Json& j) { j["texts"][0]["granularity"] = "long"; })),
               SchemaError);
  // A counter-clockwise mask.
  EXPECT_THROW(io::image_from_json(broken([](io::Json& j) {
                 j["triplets"][0]["regions"][0]["mask"] = {0, 0, 0, 10, 10, 10, 10, 0};
               })),
               SchemaError);
}

TEST(Records, SidecarReferences) {
  const std::string conllu = "# sent_id = a\n1\tdog\t_\tNOUN\t_\t_\t0\troot\t_\t_\n";
  const auto index = io::index_sentences(conllu);
  io::Json j = {{"fld_schema", 1},
                {"id", "x"},
                {"size", {{"width", 10}, {"height", 10}}},
                {"texts", {{{"granularity", "brief"}, {"text", "dog"}, {"parse_ref", {"a"}}}}}};
  const auto img = io::image_from_json(j, &index);
  ASSERT_TRUE(img.texts[0].parse.has_value());
  EXPECT_EQ(img.texts[0].parse->at(0).token(1).surface, "dog");
  EXPECT_EQ(io::to_json(img)["texts"][0]["parse_ref"], io::Json({"a"}));
  EXPECT_FALSE(io::image_from_json(j).texts[0].parse.has_value());
  j["texts"][0]["parse_ref"] = {"missing"};
  EXPECT_THROW(io::image_from_json(j, &index), SchemaError);
}

TEST(FilterText, Decisions) {
  const auto corpus = load("filter_corpus.jsonl");
  const FilterConfig cfg;
  EXPECT_TRUE(filter_text(corpus[0].texts[0], cfg).keep);
  EXPECT_EQ(filter_text(corpus[0].texts[1], cfg).reason, kLowObjectComplexity);
  EXPECT_EQ(filter_text(corpus[2].texts[1], cfg).reason, kLowActionComplexity);
  EXPECT_EQ(filter_text(corpus[2].texts[2], cfg).reason, kExcessiveObjects);
  FilterConfig loose = cfg;
  loose.max_objects = 31;
  EXPECT_TRUE(filter_text(corpus[2].texts[2], loose).keep);
  TextAnnotation bare;
  bare.text = "no parse";
  EXPECT_THROW(filter_text(bare, cfg), PreconditionError);
}

TEST(FilterImage, FixtureCorpusMatchesHandTally) {
  const auto corpus = load("filter_corpus.jsonl");
  DropCounts counts;
  std::vector<AnnotatedImage> out;
  for (const auto& img : corpus) out.push_back(filter_image(img, FilterConfig{}, &counts));
  std::ifstream in(std::string(FLD_FIXTURES) + "/filter_corpus.summary.json");
  const auto golden = io::Json::parse(in);
  EXPECT_EQ(io::Json(counts), golden["drops"]);

  // Survivors by hand: r1 keeps its brief text, the first dog box and one
  // triplet box; r2 keeps both class-distinct regions and no triplet.
  EXPECT_EQ(out[0].texts.size(), 1u);
  EXPECT_EQ(out[0].region_texts, std::vector{corpus[0].region_texts[0]});
  ASSERT_EQ(out[0].triplets.size(), 1u);
  EXPECT_EQ(out[0].triplets[0].regions.size(), 1u);
  EXPECT_EQ(out[1].region_texts, corpus[1].region_texts);
  EXPECT_TRUE(out[1].triplets.empty());
  EXPECT_EQ(out[2].texts, std::vector{corpus[2].texts[0]});
  EXPECT_EQ(out[2].region_texts, std::vector{corpus[2].region_texts[0]});
  EXPECT_EQ(out[2].triplets.size(), 1u);

  FilterConfig agnostic;
  agnostic.class_aware_nms = false;
  EXPECT_EQ(filter_image(corpus[1], agnostic).region_texts.size(), 1u);
}

TEST(FilterImage, BlacklistIsCaseInsensitive) {
  const auto corpus = load("filter_corpus.jsonl");
  FilterConfig cfg = FilterConfig::permissive();
  cfg.blacklist = {"it"};
  DropCounts counts;
  const auto out = filter_image(corpus[1], cfg, &counts);
  EXPECT_EQ(counts, (DropCounts{{"triplets.blacklisted", 1}}));
  EXPECT_EQ(out.triplets.size(), 2u);
}

TEST(FilterImage, PermissiveIsIdentity) {
  gen::Rng rng(53);
  for (const auto& img : load("filter_corpus.jsonl")) EXPECT_EQ(filter_image(img, FilterConfig::permissive()), img);
  for (int i = 0; i < 500; ++i) {
    const auto img = gen::image(rng, "p");
    DropCounts counts;
    ASSERT_EQ(filter_image(img, FilterConfig::permissive(), &counts), img);
    ASSERT_TRUE(counts.empty());
  }
}

TEST(FilterImage, Idempotent) {
  gen::Rng rng(54);
  for (int i = 0; i < 500; ++i) {
    const auto img = gen::image(rng, "i");
    FilterConfig cfg;
    cfg.box_confidence_threshold = gen::real_in(rng, 0, 1);
    cfg.nms_iou_threshold = gen::real_in(rng, 0, 1);
    cfg.phrase_confidence_threshold = gen::real_in(rng, 0, 1);
    cfg.max_objects = static_cast<std::size_t>(gen::int_in(rng, 1, 40));
    cfg.class_aware_nms = gen::coin(rng);
    const auto once = filter_image(img, cfg);
    DropCounts counts;
    ASSERT_EQ(filter_image(once, cfg, &counts), once);
    ASSERT_TRUE(counts.empty());
  }
}

TEST(FilterImage, CountsReconcile) {
  gen::Rng rng(55);
  for (int i = 0; i < 500; ++i) {
    const auto img = gen::image(rng, "c");
    FilterConfig cfg;
    cfg.box_confidence_threshold = gen::real_in(rng, 0, 1);
    DropCounts counts;
    const auto out = filter_image(img, cfg, &counts);
    ASSERT_EQ(img.texts.size(), out.texts.size() + total(counts, "texts."));
    ASSERT_EQ(img.region_texts.size(), out.region_texts.size() + total(counts, "regions."));
    ASSERT_EQ(img.triplets.size(), out.triplets.size() + total(counts, "triplets."));
    ASSERT_NO_THROW(validate(out));
  }
}

TEST(FilterImage, ThresholdMonotonicity) {
  gen::Rng rng(56);
  for (int i = 0; i < 500; ++i) {
    const auto img = gen::image(rng, "m");
    FilterConfig lo;
    FilterConfig hi;
    double a = gen::real_in(rng, 0, 1);
    double b = gen::real_in(rng, 0, 1);
    if (a > b) std::swap(a, b);
    lo.box_confidence_threshold = a;
    hi.box_confidence_threshold = b;
    lo.phrase_confidence_threshold = a;
    hi.phrase_confidence_threshold = b;
    lo.max_objects = static_cast<std::size_t>(gen::int_in(rng, 5, 40));
    hi.max_objects = lo.max_objects;
    hi.min_object_complexity = lo.min_object_complexity + gen::real_in(rng, 0, 1);
    hi.blacklist.insert("cat");
    const auto out_lo = filter_image(img, lo);
    const auto out_hi = filter_image(img, hi);
    ASSERT_TRUE(laws::is_subsequence(out_hi.region_texts, out_lo.region_texts));
    ASSERT_TRUE(laws::is_subsequence(out_hi.texts, out_lo.texts));
    ASSERT_LE(out_hi.triplets.size(), out_lo.triplets.size());

    FilterConfig more = lo;
    more.max_objects = lo.max_objects + static_cast<std::size_t>(gen::int_in(rng, 0, 10));
    ASSERT_TRUE(laws::is_subsequence(out_lo.texts, filter_image(img, more).texts));
  }
}

TEST(FilterConfigs, Validation) {
  FilterConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.nms_iou_threshold = 1.5;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = FilterConfig{};
  cfg.max_objects = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = FilterConfig{};
  cfg.min_action_complexity = -1;
  EXPECT_THROW(validate(cfg), ConfigError);
  EXPECT_EQ(case_fold("  It "), "it");
}

TEST(Candidates, LabelBriefAndChunks) {
  const auto parse = linguistics::parse_conllu(
      "1\tThe\t_\tDET\t_\t_\t3\tdet\t_\t_\n2\tred\t_\tADJ\t_\t_\t3\tamod\t_\t_\n"
      "3\tcar\t_\tNOUN\t_\t_\t4\tnsubj\t_\t_\n4\tstops\t_\tVERB\t_\t_\t0\troot\t_\t_\n")[0];
  const auto c = generate_region_text_candidates("car", "The red car stops", &parse);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], (CandidateText{"car", TextRole::Phrase}));
  EXPECT_EQ(c[1], (CandidateText{"The red car stops", TextRole::Brief}));
  EXPECT_EQ(c[2], (CandidateText{"The red car", TextRole::NounChunk}));
  EXPECT_EQ(generate_region_text_candidates("Car", "car", nullptr).size(), 1u);
  EXPECT_THROW(generate_region_text_candidates("", "x", nullptr), DomainError);
}

TEST(Merge, EmptyRefinementIsFilteredIdentity) {
  gen::Rng rng(57);
  const FilterConfig cfg;
  for (int i = 0; i < 300; ++i) {
    const auto img = gen::image(rng, "e");
    AnnotatedImage empty;
    empty.id = img.id;
    empty.size = img.size;
    const auto merged = merge_annotations(img, empty, cfg);
    ASSERT_EQ(merged, img);
    ASSERT_EQ(filter_image(merged, cfg), filter_image(img, cfg));
  }
}

TEST(Merge, DoubleMergeEqualsSingleMerge) {
  gen::Rng rng(58);
  for (int i = 0; i < 500; ++i) {
    const auto img = gen::image(rng, "d");
    const auto refined = laws::refinement_of(rng, img);
    FilterConfig cfg;
    cfg.nms_iou_threshold = gen::real_in(rng, 0.1, 1.0);
    cfg.class_aware_nms = gen::coin(rng);
    const auto once = merge_annotations(img, refined, cfg);
    ASSERT_NO_THROW(validate(once));
    ASSERT_EQ(merge_annotations(once, refined, cfg), once);
  }
}

TEST(Merge, TieBreakKeepsOriginal) {
  AnnotatedImage original;
  original.id = "t";
  original.size = {100, 100};
  original.region_texts.push_back({BBox{10, 10, 50, 50}, {{"cat", TextRole::Phrase}}, {}, 0.8});
  AnnotatedImage refined = original;
  refined.region_texts[0].region = BBox{11, 11, 51, 51};
  const auto merged = merge_annotations(original, refined, FilterConfig{});
  EXPECT_EQ(merged.region_texts, original.region_texts);

  // A more confident refined box wins instead.
  refined.region_texts[0].confidence = 0.9;
  EXPECT_EQ(merge_annotations(original, refined, FilterConfig{}).region_texts, refined.region_texts);
}

TEST(Merge, RefinedTextsAndTriplets) {
  const auto corpus = load("filter_corpus.jsonl");
  const AnnotatedImage& original = corpus[1];
  AnnotatedImage refined;
  refined.id = original.id;
  refined.size = original.size;
  TextAnnotation t = original.texts[0];
  t.text = "A cat sleeps on a mat.";
  refined.texts.push_back(t);
  refined.triplets.push_back({0, {2, 5, "cat"}, {{BBox{0, 0, 500, 500}, 0.9, {}}}, 0.9});
  const auto merged = merge_annotations(original, refined, FilterConfig{});
  ASSERT_EQ(merged.texts.size(), 2u);
  EXPECT_EQ(merged.texts[1].source, TextSource::Refined);
  EXPECT_EQ(merged.triplets.size(), original.triplets.size() + 1);
  EXPECT_EQ(merged.triplets.back().text_ref, 1u);

  // A newer refined text of the same granularity displaces the older one.
  AnnotatedImage again = refined;
  again.texts[0].text = "A cat naps.";
  again.triplets.clear();
  const auto twice = merge_annotations(merged, again, FilterConfig{});
  ASSERT_EQ(twice.texts.size(), 2u);
  EXPECT_EQ(twice.texts[1].text, "A cat naps.");
  EXPECT_EQ(twice.triplets.size(), original.triplets.size());

  AnnotatedImage other = refined;
  other.id = "zzz";
  EXPECT_THROW(merge_annotations(original, other, FilterConfig{}), MergeError);
  other = refined;
  other.size.width = 1;
  EXPECT_THROW(merge_annotations(original, other, FilterConfig{}), MergeError);
}

TEST(Merge, RefinedTripletGroupsReplaceOriginalGroups) {
  const auto corpus = load("filter_corpus.jsonl");
  AnnotatedImage original;
  original.id = "m";
  original.size = corpus[0].size;
  original.texts = corpus[0].texts;
  auto triplet = [](std::size_t ref, std::size_t start, std::size_t end, const char* text, double x) {
    return PhraseRegionTriplet{ref, {start, end, text}, {{BBox{x, x, x + 50, x + 50}, 0.9, {}}}, 0.9};
  };
  const auto a = triplet(0, 0, 5, "A dog", 0);
  const auto b = triplet(1, 0, 3, "Dog", 10);
  const auto a2 = triplet(0, 0, 5, "A dog", 200);
  original.triplets = {a, b, a2};
  AnnotatedImage refined = original;
  const auto r1 = triplet(0, 0, 5, "A dog", 300);
  const auto r2 = triplet(0, 0, 5, "A dog", 400);
  const auto n = triplet(0, 2, 5, "dog", 500);
  refined.triplets = {r1, n, r2};
  const auto merged = merge_annotations(original, refined, FilterConfig::permissive());
  EXPECT_EQ(merged.triplets, (std::vector<PhraseRegionTriplet>{r1, r2, b, n}));
  EXPECT_EQ(merge_annotations(merged, refined, FilterConfig::permissive()), merged);
}
