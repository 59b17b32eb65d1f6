#include "vtask/data_engine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "vtask/error.hpp"

namespace vtask::data {

using geometry::BBox;
using linguistics::ParsedSentence;
using linguistics::SemanticElement;

const char* to_string(Granularity g) noexcept {
  switch (g) {
    case Granularity::Brief:
      return "brief";
    case Granularity::Detailed:
      return "detailed";
    case Granularity::MoreDetailed:
      return "more_detailed";
  }
  return "brief";
}

const char* to_string(TextSource s) noexcept {
  switch (s) {
    case TextSource::Specialist:
      return "specialist";
    case TextSource::Human:
      return "human";
    case TextSource::Refined:
      return "refined";
  }
  return "specialist";
}

const char* to_string(TextRole r) noexcept {
  switch (r) {
    case TextRole::Phrase:
      return "phrase";
    case TextRole::Brief:
      return "brief";
    case TextRole::NounChunk:
      return "noun_chunk";
  }
  return "phrase";
}

std::optional<Granularity> granularity_from(std::string_view s) noexcept {
  for (auto g : {Granularity::Brief, Granularity::Detailed, Granularity::MoreDetailed}) {
    if (s == to_string(g)) return g;
  }
  return std::nullopt;
}

std::optional<TextSource> source_from(std::string_view s) noexcept {
  for (auto v : {TextSource::Specialist, TextSource::Human, TextSource::Refined}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

std::optional<TextRole> role_from(std::string_view s) noexcept {
  for (auto v : {TextRole::Phrase, TextRole::Brief, TextRole::NounChunk}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

namespace {

bool is_probability(double v) { return v >= 0.0 && v <= 1.0; }

void require(bool ok, const std::string& what) {
  if (!ok) throw SchemaError(what);
}

void check_points(std::span<const geometry::Point> pts, const geometry::ImageSize& size,
                  const std::string& where) {
  for (const auto& p : pts) {
    require(std::isfinite(p.x) && std::isfinite(p.y) && geometry::within(p, size),
            where + " has a vertex outside the image");
  }
}

void check_box(const BBox& box, const geometry::ImageSize& size, const std::string& where) {
  try {
    geometry::validate(box, size);
  } catch (const DomainError& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

}  // namespace

void validate(const AnnotatedImage& image) {
  require(!image.id.empty(), "record id is empty");
  const std::string rec = "record " + image.id;
  try {
    geometry::validate(image.size);
  } catch (const DomainError& e) {
    throw SchemaError(rec + ": " + e.what());
  }

  for (std::size_t i = 0; i < image.texts.size(); ++i) {
    const auto& t = image.texts[i];
    const std::string where = rec + " texts[" + std::to_string(i) + "]";
    require(!t.text.empty(), where + " has empty text");
    if (t.parse) {
      for (const auto& s : *t.parse) {
        try {
          linguistics::validate(s);
        } catch (const DomainError& e) {
          throw SchemaError(where + " parse: " + e.what());
        }
      }
    }
  }

  for (std::size_t i = 0; i < image.region_texts.size(); ++i) {
    const auto& p = image.region_texts[i];
    const std::string where = rec + " region_texts[" + std::to_string(i) + "]";
    require(!p.texts.empty(), where + " has no candidate texts");
    for (const auto& c : p.texts) require(!c.text.empty(), where + " has an empty candidate text");
    require(!p.selected || *p.selected < p.texts.size(), where + " selected index out of range");
    require(is_probability(p.confidence), where + " confidence outside [0, 1]");
    if (const auto* box = std::get_if<BBox>(&p.region)) {
      check_box(*box, image.size, where);
    } else {
      const auto& quad = std::get<geometry::QuadBox>(p.region);
      check_points(quad.vertices, image.size, where);
    }
  }

  for (std::size_t i = 0; i < image.triplets.size(); ++i) {
    const auto& t = image.triplets[i];
    const std::string where = rec + " triplets[" + std::to_string(i) + "]";
    require(t.text_ref < image.texts.size(), where + " text_ref out of range");
    const std::string& text = image.texts[t.text_ref].text;
    require(t.phrase.start < t.phrase.end && t.phrase.end <= text.size(),
            where + " phrase span outside its text");
    require(text.compare(t.phrase.start, t.phrase.end - t.phrase.start, t.phrase.text) == 0,
            where + " phrase surface does not match its span");
    require(is_probability(t.phrase_confidence), where + " phrase confidence outside [0, 1]");
    require(!t.regions.empty(), where + " has no regions");
    for (const auto& g : t.regions) {
      check_box(g.box, image.size, where);
      require(is_probability(g.confidence), where + " box confidence outside [0, 1]");
      if (g.mask) {
        try {
          geometry::validate(*g.mask);
        } catch (const DomainError& e) {
          throw SchemaError(where + " mask: " + e.what());
        }
        check_points(g.mask->vertices, image.size, where + " mask");
      }
    }
  }
}

std::set<std::string> FilterConfig::default_blacklist() {
  return {"i",        "me",       "my",        "mine",       "myself",   "you",
          "your",     "yours",    "yourself",  "yourselves", "he",       "him",
          "his",      "himself",  "she",       "her",        "hers",     "herself",
          "it",       "its",      "itself",    "we",         "us",       "our",
          "ours",     "ourselves", "they",     "them",       "their",    "theirs",
          "themselves", "this",   "that",      "these",      "those",    "who",
          "whom",     "whose",    "which",     "what",       "one",      "someone",
          "something", "anyone",  "anything",  "everyone",   "everything", "nobody",
          "nothing"};
}

FilterConfig FilterConfig::permissive() {
  FilterConfig cfg;
  cfg.max_objects = kUnlimitedObjects;
  cfg.min_object_complexity = 0.0;
  cfg.min_action_complexity = 0.0;
  cfg.box_confidence_threshold = 0.0;
  cfg.nms_iou_threshold = 1.0;
  cfg.phrase_confidence_threshold = 0.0;
  cfg.blacklist.clear();
  return cfg;
}

void validate(const FilterConfig& cfg) {
  auto check = [](double v, const char* name) {
    if (!is_probability(v)) {
      throw ConfigError(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
    }
  };
  check(cfg.box_confidence_threshold, "box_confidence_threshold");
  check(cfg.nms_iou_threshold, "nms_iou_threshold");
  check(cfg.phrase_confidence_threshold, "phrase_confidence_threshold");
  if (cfg.max_objects < 1) throw ConfigError("max_objects must be at least 1");
  if (!(cfg.min_object_complexity >= 0.0) || !(cfg.min_action_complexity >= 0.0)) {
    throw ConfigError("complexity thresholds must be non-negative");
  }
}

std::string case_fold(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  std::string out(text.substr(first, last - first + 1));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

TextDecision filter_text(const TextAnnotation& text, const FilterConfig& cfg) {
  if (!text.parse) throw PreconditionError("text filtering needs a dependency parse: \"" + text.text + "\"");

  std::size_t objects = 0;
  std::size_t actions = 0;
  long object_degree = 0;
  long action_degree = 0;
  for (const ParsedSentence& s : *text.parse) {
    const std::vector<int> degree = linguistics::token_degrees(s);
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      switch (linguistics::classify_token(s.tokens[i])) {
        case SemanticElement::Object:
          ++objects;
          object_degree += degree[i];
          break;
        case SemanticElement::Action:
          ++actions;
          action_degree += degree[i];
          break;
        default:
          break;
      }
    }
  }

  if (objects > cfg.max_objects) return {false, kExcessiveObjects};
  if (objects > 0 &&
      static_cast<double>(object_degree) / static_cast<double>(objects) < cfg.min_object_complexity) {
    return {false, kLowObjectComplexity};
  }
  if (actions > 0 &&
      static_cast<double>(action_degree) / static_cast<double>(actions) < cfg.min_action_complexity) {
    return {false, kLowActionComplexity};
  }
  return {true, std::nullopt};
}

std::string class_key(const RegionTextPair& pair) {
  if (pair.selected && *pair.selected < pair.texts.size()) return pair.texts[*pair.selected].text;
  for (const auto& c : pair.texts) {
    if (c.role == TextRole::Phrase) return c.text;
  }
  return pair.texts.empty() ? std::string() : pair.texts.front().text;
}

std::vector<RegionTextPair> filter_regions(const std::vector<RegionTextPair>& pairs,
                                           const FilterConfig& cfg, DropCounts* counts) {
  std::vector<const RegionTextPair*> confident;
  std::vector<geometry::ScoredBox> boxes;
  for (const auto& p : pairs) {
    if (p.confidence < cfg.box_confidence_threshold) {
      if (counts) ++(*counts)["regions.low_confidence"];
      continue;
    }
    confident.push_back(&p);
    const BBox box = std::visit([](const auto& r) { return geometry::envelope(r); }, p.region);
    boxes.push_back({box, p.confidence, class_key(p)});
  }
  auto kept = geometry::nms_indices(boxes, cfg.nms_iou_threshold, cfg.class_aware_nms);
  std::sort(kept.begin(), kept.end());
  if (counts && kept.size() < boxes.size()) {
    (*counts)["regions.nms_suppressed"] += boxes.size() - kept.size();
  }
  std::vector<RegionTextPair> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(*confident[i]);
  return out;
}

std::vector<PhraseRegionTriplet> filter_triplets(const std::vector<PhraseRegionTriplet>& triplets,
                                                 const FilterConfig& cfg, DropCounts* counts) {
  std::vector<PhraseRegionTriplet> out;
  for (const auto& t : triplets) {
    if (cfg.blacklist.contains(case_fold(t.phrase.text))) {
      if (counts) ++(*counts)["triplets.blacklisted"];
      continue;
    }
    if (t.phrase_confidence < cfg.phrase_confidence_threshold) {
      if (counts) ++(*counts)["triplets.low_phrase_confidence"];
      continue;
    }
    PhraseRegionTriplet kept = t;
    kept.regions.clear();
    for (const auto& g : t.regions) {
      if (g.confidence < cfg.box_confidence_threshold) {
        if (counts) ++(*counts)["triplet_boxes.low_confidence"];
        continue;
      }
      kept.regions.push_back(g);
    }
    if (kept.regions.empty()) {
      if (counts) ++(*counts)["triplets.no_boxes"];
      continue;
    }
    out.push_back(std::move(kept));
  }
  return out;
}

AnnotatedImage filter_image(const AnnotatedImage& image, const FilterConfig& cfg,
                            DropCounts* counts) {
  AnnotatedImage out;
  out.id = image.id;
  out.size = image.size;

  constexpr std::size_t kDropped = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> remap(image.texts.size(), kDropped);
  for (std::size_t i = 0; i < image.texts.size(); ++i) {
    if (cfg.filter_texts) {
      const TextDecision d = filter_text(image.texts[i], cfg);
      if (!d.keep) {
        if (counts) ++(*counts)["texts." + *d.reason];
        continue;
      }
    }
    remap[i] = out.texts.size();
    out.texts.push_back(image.texts[i]);
  }

  out.region_texts = filter_regions(image.region_texts, cfg, counts);

  std::vector<PhraseRegionTriplet> attached;
  for (const auto& t : image.triplets) {
    if (t.text_ref >= remap.size() || remap[t.text_ref] == kDropped) {
      if (counts) ++(*counts)["triplets.text_dropped"];
      continue;
    }
    attached.push_back(t);
    attached.back().text_ref = remap[t.text_ref];
  }
  out.triplets = filter_triplets(attached, cfg, counts);
  return out;
}

std::vector<CandidateText> generate_region_text_candidates(std::string_view label,
                                                           std::string_view brief,
                                                           const ParsedSentence* brief_parse) {
  if (label.empty()) throw DomainError("region label must be non-empty");
  std::vector<CandidateText> out;
  std::set<std::string> seen;
  auto add = [&](std::string text, TextRole role) {
    if (text.empty()) return;
    if (seen.insert(case_fold(text)).second) out.push_back({std::move(text), role});
  };
  add(std::string(label), TextRole::Phrase);
  add(std::string(brief), TextRole::Brief);
  if (brief_parse != nullptr && !brief.empty()) {
    for (const auto& chunk : linguistics::noun_chunks(*brief_parse)) {
      add(linguistics::span_text(*brief_parse, chunk.start, chunk.end), TextRole::NounChunk);
    }
  }
  return out;
}

AnnotatedImage merge_annotations(const AnnotatedImage& original, const AnnotatedImage& refined,
                                 const FilterConfig& cfg) {
  if (original.id != refined.id) {
    throw MergeError("cannot merge record " + refined.id + " into " + original.id);
  }
  if (!(original.size == refined.size)) {
    throw MergeError("record " + original.id + " has different image sizes in the two inputs");
  }

  // Texts. Only the latest refined entry per granularity is considered; it is
  // either identified with an equal existing text or appended, displacing
  // older refined entries of that granularity.
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<TextAnnotation> pool = original.texts;
  std::vector<bool> alive(pool.size(), true);
  std::vector<std::size_t> refined_to_pool(refined.texts.size(), kNone);

  std::map<Granularity, std::size_t> latest;
  for (std::size_t i = 0; i < refined.texts.size(); ++i) latest[refined.texts[i].granularity] = i;
  std::vector<std::size_t> considered;
  for (const auto& [g, i] : latest) considered.push_back(i);
  std::sort(considered.begin(), considered.end());

  for (std::size_t ri : considered) {
    const TextAnnotation& r = refined.texts[ri];
    std::size_t match = kNone;
    for (std::size_t p = 0; p < pool.size(); ++p) {
      if (alive[p] && pool[p].granularity == r.granularity && pool[p].text == r.text) {
        match = p;
        break;
      }
    }
    if (match == kNone) {
      for (std::size_t p = 0; p < pool.size(); ++p) {
        if (pool[p].source == TextSource::Refined && pool[p].granularity == r.granularity) {
          alive[p] = false;
        }
      }
      match = pool.size();
      pool.push_back(r);
      pool.back().source = TextSource::Refined;
      alive.push_back(true);
    }
    refined_to_pool[ri] = match;
  }

  AnnotatedImage out;
  out.id = original.id;
  out.size = original.size;
  std::vector<std::size_t> pool_to_out(pool.size(), kNone);
  for (std::size_t p = 0; p < pool.size(); ++p) {
    if (!alive[p]) continue;
    pool_to_out[p] = out.texts.size();
    out.texts.push_back(std::move(pool[p]));
  }

  // Triplets keyed by (text_ref, span). All refined entries of a key replace
  // every original entry of that key, at the position of the first one.
  using Key = std::tuple<std::size_t, std::size_t, std::size_t>;
  auto key_of = [](const PhraseRegionTriplet& t) { return Key{t.text_ref, t.phrase.start, t.phrase.end}; };
  std::map<Key, std::vector<PhraseRegionTriplet>> groups;
  std::vector<Key> new_keys;
  for (const auto& t : refined.triplets) {
    if (t.text_ref >= refined_to_pool.size() || refined_to_pool[t.text_ref] == kNone) continue;
    const std::size_t ref = pool_to_out[refined_to_pool[t.text_ref]];
    if (ref == kNone) continue;
    PhraseRegionTriplet moved = t;
    moved.text_ref = ref;
    auto& group = groups[key_of(moved)];
    if (group.empty()) new_keys.push_back(key_of(moved));
    group.push_back(std::move(moved));
  }
  std::set<Key> placed;
  for (const auto& t : original.triplets) {
    if (t.text_ref >= pool_to_out.size() || pool_to_out[t.text_ref] == kNone) continue;
    PhraseRegionTriplet moved = t;
    moved.text_ref = pool_to_out[t.text_ref];
    const Key k = key_of(moved);
    auto g = groups.find(k);
    if (g == groups.end()) {
      out.triplets.push_back(std::move(moved));
    } else if (placed.insert(k).second) {
      out.triplets.insert(out.triplets.end(), g->second.begin(), g->second.end());
    }
  }
  for (const auto& k : new_keys) {
    if (placed.count(k) == 0) out.triplets.insert(out.triplets.end(), groups[k].begin(), groups[k].end());
  }

  // Region-text pairs: set union, then the regular region filter. Originals
  // come first so they win confidence ties. Nothing new leaves them as they are.
  std::vector<RegionTextPair> pairs = original.region_texts;
  for (const auto& p : refined.region_texts) {
    if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(p);
  }
  out.region_texts = pairs.size() == original.region_texts.size() ? std::move(pairs) : filter_regions(pairs, cfg);
  return out;
}

}  // namespace vtask::data
