#pragma once

// Random value generators for property tests. Every generator takes the
// engine explicitly so a failing case can be replayed from its seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vtask/data_engine.hpp"
#include "vtask/geometry.hpp"
#include "vtask/linguistics.hpp"
#include "vtask/task_codec.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline int int_in(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline std::size_t index_below(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double real_in(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[index_below(rng, v.size())];
}

// ---------------------------------------------------------------------------
// Geometry

inline vtask::geometry::ImageSize image_size(Rng& rng) {
  if (coin(rng, 0.3)) return {static_cast<double>(int_in(rng, 1, 4096)), static_cast<double>(int_in(rng, 1, 4096))};
  return {real_in(rng, 1.0, 5000.0), real_in(rng, 1.0, 5000.0)};
}

inline vtask::geometry::BBox box_in(Rng& rng, const vtask::geometry::ImageSize& size) {
  double xa = real_in(rng, 0.0, size.width);
  double xb = real_in(rng, 0.0, size.width);
  double ya = real_in(rng, 0.0, size.height);
  double yb = real_in(rng, 0.0, size.height);
  if (xa > xb) std::swap(xa, xb);
  if (ya > yb) std::swap(ya, yb);
  return {xa, ya, xb, yb};
}

// Integer-cornered box in a 100x100 frame; small frames make overlaps common.
inline vtask::geometry::BBox grid_box(Rng& rng) {
  const int x0 = int_in(rng, 0, 90);
  const int y0 = int_in(rng, 0, 90);
  return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(int_in(rng, x0 + 1, 100)),
          static_cast<double>(int_in(rng, y0 + 1, 100))};
}

inline vtask::geometry::QuadBox quad_of(const vtask::geometry::BBox& b) {
  return {{{{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}}}};
}

// Star-shaped polygon around the image centre. Increasing angle with the y
// axis pointing down traces the vertices clockwise on screen.
inline vtask::geometry::Polygon polygon_in(Rng& rng, const vtask::geometry::ImageSize& size,
                                              int min_vertices = 3, int max_vertices = 12) {
  const int n = int_in(rng, min_vertices, max_vertices);
  std::vector<double> angles;
  for (int i = 0; i < n; ++i) angles.push_back(2.0 * std::numbers::pi * (i + real_in(rng, 0.1, 0.9)) / n);
  vtask::geometry::Polygon poly;
  const double cx = size.width / 2;
  const double cy = size.height / 2;
  for (double a : angles) {
    const double r = real_in(rng, 0.2, 0.5);
    poly.vertices.push_back({cx + r * size.width * std::cos(a), cy + r * size.height * std::sin(a)});
  }
  return poly;
}

// ---------------------------------------------------------------------------
// Text

inline std::string word(Rng& rng) {
  static const std::vector<std::string> words{
      "cat",  "dog", "red",   "sofa", "a",  "the", "of",  "on",  "tree",   "Big",  "street",
      "sign", "two", "blue",  "sky",  "it", "car", "x<y", "a>b", "<and>", "loc", "12:30",
      "é",    "wet", "grass", "mat",  ",",  ".",   "(",   "n°5", "<",     "_"};
  return pick(rng, words);
}

// Non-empty words joined by single spaces.
inline std::string phrase(Rng& rng, int max_words = 5) {
  std::string s = word(rng);
  const int n = int_in(rng, 0, max_words - 1);
  for (int i = 0; i < n; ++i) s += " " + word(rng);
  return s;
}

// ---------------------------------------------------------------------------
// Codec values

inline vtask::geometry::QuantizedRegion qregion(Rng& rng, vtask::geometry::RegionKind kind) {
  using vtask::geometry::RegionKind;
  std::size_t n = 4;
  if (kind == RegionKind::Quad) n = 8;
  if (kind == RegionKind::Polygon) n = 2 * static_cast<std::size_t>(int_in(rng, 3, 16));
  vtask::geometry::QuantizedRegion r{kind, {}};
  for (std::size_t i = 0; i < n; ++i) r.bins.push_back(int_in(rng, 0, 999));
  if (kind == RegionKind::Box) {
    if (r.bins[0] > r.bins[2]) std::swap(r.bins[0], r.bins[2]);
    if (r.bins[1] > r.bins[3]) std::swap(r.bins[1], r.bins[3]);
  }
  return r;
}

// A well-formed response for `task`, with quantized regions.
inline vtask::codec::TaskResponse response(Rng& rng, vtask::codec::Task task) {
  using namespace vtask::codec;
  const auto kind = response_region_kind(task);
  const int count = int_in(rng, 0, 6);
  switch (response_shape(task)) {
    case ResponseShape::Text:
      return TextResponse{phrase(rng, 12)};
    case ResponseShape::Regions: {
      RegionsResponse<vtask::geometry::QuantizedRegion> r;
      for (int i = 0; i < count; ++i) r.regions.push_back(qregion(rng, *kind));
      return r;
    }
    case ResponseShape::LabeledRegions: {
      LabeledRegionsResponse<vtask::geometry::QuantizedRegion> r;
      for (int i = 0; i < count; ++i) r.items.push_back({phrase(rng), qregion(rng, *kind)});
      return r;
    }
    case ResponseShape::GroundedText: {
      GroundedTextResponse<vtask::geometry::QuantizedRegion> r;
      for (int i = 0; i < count; ++i) {
        GroundedPhrase<vtask::geometry::QuantizedRegion> p{phrase(rng), {}};
        const int k = int_in(rng, 1, 3);
        for (int j = 0; j < k; ++j) p.regions.push_back(qregion(rng, *kind));
        r.phrases.push_back(std::move(p));
      }
      return r;
    }
    case ResponseShape::Mask:
      return MaskResponse<vtask::geometry::QuantizedRegion>{qregion(rng, *kind)};
  }
  return TextResponse{"unreachable"};
}

// ---------------------------------------------------------------------------
// Dependency trees

inline vtask::linguistics::ParsedSentence tree(Rng& rng, int n) {
  static const std::vector<std::string> upos{"NOUN", "VERB", "ADJ", "PROPN", "DET", "ADP", "PRON", "ADV"};
  static const std::vector<std::string> rels{"det", "amod", "nsubj", "obj", "case", "compound", "nmod", "advmod"};
  // Attach tokens in a random order, each to a token attached before it.
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);
  vtask::linguistics::ParsedSentence s;
  s.tokens.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int idx = order[static_cast<std::size_t>(k)];
    auto& t = s.tokens[static_cast<std::size_t>(idx - 1)];
    t.index = idx;
    t.surface = "w" + std::to_string(idx);
    t.upos = pick(rng, upos);
    if (k == 0) {
      t.head = 0;
      t.deprel = "root";
    } else {
      t.head = order[index_below(rng, static_cast<std::size_t>(k))];
      t.deprel = pick(rng, rels);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Annotated images

inline vtask::data::AnnotatedImage image(Rng& rng, const std::string& id) {
  using namespace vtask::data;
  static const std::vector<std::string> labels{"cat", "dog", "car", "sign"};
  static const std::vector<std::string> phrase_words{"it", "cat", "this", "car", "dog", "one", "tree", "It"};
  AnnotatedImage img;
  img.id = id;
  img.size = {static_cast<double>(int_in(rng, 50, 800)), static_cast<double>(int_in(rng, 50, 800))};

  const int texts = int_in(rng, 0, 3);
  for (int i = 0; i < texts; ++i) {
    TextAnnotation t;
    t.granularity = static_cast<Granularity>(int_in(rng, 0, 2));
    std::vector<vtask::linguistics::ParsedSentence> parse;
    const int sentences = int_in(rng, 1, 2);
    for (int s = 0; s < sentences; ++s) {
      auto tr = tree(rng, coin(rng, 0.2) ? 1 : int_in(rng, 2, 40));
      for (const auto& tok : tr.tokens) {
        if (!t.text.empty()) t.text += ' ';
        t.text += tok.surface;
      }
      parse.push_back(std::move(tr));
    }
    // Phrases are drawn from a fixed list and appended so triplet spans can point at them.
    t.text += " " + pick(rng, phrase_words);
    t.parse = std::move(parse);
    img.texts.push_back(std::move(t));
  }

  const int pairs = int_in(rng, 0, 8);
  const vtask::geometry::ImageSize frame = img.size;
  for (int i = 0; i < pairs; ++i) {
    RegionTextPair p;
    const auto b = box_in(rng, frame);
    if (coin(rng, 0.2)) {
      p.region = gen::quad_of(b);
    } else {
      p.region = b;
    }
    p.texts.push_back({pick(rng, labels), TextRole::Phrase});
    if (coin(rng)) p.texts.push_back({phrase(rng), TextRole::Brief});
    if (coin(rng, 0.3)) p.selected = index_below(rng, p.texts.size());
    p.confidence = coin(rng, 0.2) ? 0.5 : real_in(rng, 0.0, 1.0);
    img.region_texts.push_back(std::move(p));
  }

  if (!img.texts.empty()) {
    const int triplets = int_in(rng, 0, 5);
    for (int i = 0; i < triplets; ++i) {
      PhraseRegionTriplet t;
      t.text_ref = index_below(rng, img.texts.size());
      const std::string& text = img.texts[t.text_ref].text;
      const std::size_t space = text.rfind(' ');
      t.phrase = {space + 1, text.size(), text.substr(space + 1)};
      t.phrase_confidence = real_in(rng, 0.0, 1.0);
      const int boxes = int_in(rng, 1, 3);
      for (int k = 0; k < boxes; ++k) t.regions.push_back({box_in(rng, frame), real_in(rng, 0.0, 1.0), {}});
      img.triplets.push_back(std::move(t));
    }
  }
  return img;
}

}  // namespace gen
