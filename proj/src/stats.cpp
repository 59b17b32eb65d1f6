#include "vtask/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vtask/error.hpp"

namespace vtask::stats {

using data::AnnotatedImage;
using data::Granularity;
using linguistics::SemanticElement;
using Json = nlohmann::json;

namespace {

constexpr std::array<Granularity, 3> kGranularities{Granularity::Brief, Granularity::Detailed,
                                                    Granularity::MoreDetailed};

std::size_t slot(Granularity g) { return static_cast<std::size_t>(g); }

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Text of the pair counted under the "phrase" row, if any.
const data::CandidateText* phrase_text(const data::RegionTextPair& p) {
  for (const auto& c : p.texts) {
    if (c.role == data::TextRole::Phrase) return &c;
  }
  return nullptr;
}

// Text counted under the regional "brief" row: the selected description,
// else the brief-role candidate.
const data::CandidateText* regional_brief_text(const data::RegionTextPair& p) {
  if (p.selected && *p.selected < p.texts.size()) return &p.texts[*p.selected];
  for (const auto& c : p.texts) {
    if (c.role == data::TextRole::Brief) return &c;
  }
  return nullptr;
}

}  // namespace

std::size_t count_tokens(std::string_view text) noexcept {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

// ---------------------------------------------------------------------------

void AnnotationAccumulator::add(const AnnotatedImage& image) {
  for (const auto& t : image.texts) {
    auto& cell = text_[slot(t.granularity)];
    ++cell.annotations;
    cell.tokens += count_tokens(t.text);
  }

  std::uint64_t phrase_regions = 0;
  std::uint64_t brief_regions = 0;
  for (const auto& p : image.region_texts) {
    if (const auto* c = phrase_text(p)) {
      ++phrase_regions;
      phrase_.tokens += count_tokens(c->text);
    }
    if (const auto* c = regional_brief_text(p)) {
      ++brief_regions;
      brief_.tokens += count_tokens(c->text);
    }
  }
  phrase_.regions += phrase_regions;
  brief_.regions += brief_regions;
  if (phrase_regions > 0) ++phrase_.images;
  if (brief_regions > 0) ++brief_.images;

  std::vector<bool> grounded(image.texts.size(), false);
  for (const auto& t : image.triplets) {
    if (t.text_ref >= image.texts.size()) continue;
    grounded[t.text_ref] = true;
    auto& cell = triplet_[slot(image.texts[t.text_ref].granularity)];
    cell.regions += t.regions.size();
    cell.regional_tokens += count_tokens(t.phrase.text) * t.regions.size();
  }
  for (std::size_t i = 0; i < image.texts.size(); ++i) {
    if (!grounded[i]) continue;
    auto& cell = triplet_[slot(image.texts[i].granularity)];
    ++cell.annotations;
    cell.tokens += count_tokens(image.texts[i].text);
  }
}

void AnnotationAccumulator::merge(const AnnotationAccumulator& o) {
  for (std::size_t i = 0; i < 3; ++i) {
    text_[i].annotations += o.text_[i].annotations;
    text_[i].tokens += o.text_[i].tokens;
    triplet_[i].annotations += o.triplet_[i].annotations;
    triplet_[i].tokens += o.triplet_[i].tokens;
    triplet_[i].regions += o.triplet_[i].regions;
    triplet_[i].regional_tokens += o.triplet_[i].regional_tokens;
  }
  for (auto [mine, theirs] : {std::pair{&phrase_, &o.phrase_}, std::pair{&brief_, &o.brief_}}) {
    mine->images += theirs->images;
    mine->regions += theirs->regions;
    mine->tokens += theirs->tokens;
  }
}

AnnotationStats AnnotationAccumulator::finish() const {
  AnnotationStats rows;
  for (Granularity g : kGranularities) {
    const auto& c = text_[slot(g)];
    AnnotationRow row;
    row.annotation_type = "text";
    row.text_type = data::to_string(g);
    row.image_annotations = c.annotations;
    row.avg_tokens = ratio(c.tokens, c.annotations);
    rows.push_back(row);
  }
  for (auto [name, cell] : {std::pair{"phrase", &phrase_}, std::pair{"brief", &brief_}}) {
    AnnotationRow row;
    row.annotation_type = "region_text";
    row.text_type = name;
    row.image_annotations = cell->images;
    row.regions = cell->regions;
    row.avg_regions = ratio(cell->regions, cell->images);
    row.avg_regional_tokens = ratio(cell->tokens, cell->regions);
    rows.push_back(row);
  }
  for (Granularity g : kGranularities) {
    const auto& c = triplet_[slot(g)];
    AnnotationRow row;
    row.annotation_type = "text_phrase_region";
    row.text_type = data::to_string(g);
    row.image_annotations = c.annotations;
    row.avg_tokens = ratio(c.tokens, c.annotations);
    row.regions = c.regions;
    row.avg_regions = ratio(c.regions, c.annotations);
    row.avg_regional_tokens = ratio(c.regional_tokens, c.regions);
    rows.push_back(row);
  }
  return rows;
}

AnnotationStats annotation_stats(const std::vector<AnnotatedImage>& corpus) {
  AnnotationAccumulator acc;
  for (const auto& img : corpus) acc.add(img);
  return acc.finish();
}

// ---------------------------------------------------------------------------

void MeanOfMeans::add(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) return;
  numerators_[denominator] += numerator;
  ++contributors_;
}

void MeanOfMeans::merge(const MeanOfMeans& other) {
  for (const auto& [den, num] : other.numerators_) numerators_[den] += num;
  contributors_ += other.contributors_;
}

std::optional<double> MeanOfMeans::value() const {
  if (contributors_ == 0) return std::nullopt;
  double sum = 0.0;
  for (const auto& [den, num] : numerators_) sum += static_cast<double>(num) / static_cast<double>(den);
  return sum / static_cast<double>(contributors_);
}

bool SemanticAccumulator::add(const AnnotatedImage& image) {
  for (const auto& t : image.texts) {
    if (!t.parse) {
      ++skipped_;
      return false;
    }
  }
  for (const auto& t : image.texts) {
    Cell& cell = cells_[slot(t.granularity)];
    ++cell.annotations;
    std::uint64_t object_count = 0;
    std::uint64_t object_degree = 0;
    std::uint64_t action_count = 0;
    std::uint64_t action_degree = 0;
    for (const auto& s : *t.parse) {
      cell.tokens += s.tokens.size();
      const auto degree = linguistics::token_degrees(s);
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        switch (linguistics::classify_token(s.tokens[i])) {
          case SemanticElement::Object:
            ++object_count;
            object_degree += static_cast<std::uint64_t>(degree[i]);
            break;
          case SemanticElement::Attribute:
            ++cell.attributes;
            break;
          case SemanticElement::Action:
            ++action_count;
            action_degree += static_cast<std::uint64_t>(degree[i]);
            break;
          case SemanticElement::ProperNoun:
            ++cell.proper_nouns;
            break;
          case SemanticElement::Other:
            break;
        }
      }
    }
    cell.objects += object_count;
    cell.actions += action_count;
    cell.object_complexity.add(object_degree, object_count);
    cell.action_complexity.add(action_degree, action_count);
  }
  return true;
}

void SemanticAccumulator::merge(const SemanticAccumulator& o) {
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    Cell& c = cells_[i];
    const Cell& d = o.cells_[i];
    c.annotations += d.annotations;
    c.tokens += d.tokens;
    c.objects += d.objects;
    c.attributes += d.attributes;
    c.actions += d.actions;
    c.proper_nouns += d.proper_nouns;
    c.object_complexity.merge(d.object_complexity);
    c.action_complexity.merge(d.action_complexity);
  }
  skipped_ += o.skipped_;
}

SemanticStats SemanticAccumulator::finish() const {
  SemanticStats out;
  out.skipped_records = skipped_;
  for (Granularity g : kGranularities) {
    const Cell& c = cells_[slot(g)];
    if (c.annotations == 0) continue;
    SemanticRow row;
    row.text_type = data::to_string(g);
    row.annotations = c.annotations;
    row.avg_tokens = *ratio(c.tokens, c.annotations);
    row.avg_objects = *ratio(c.objects, c.annotations);
    row.avg_attributes = *ratio(c.attributes, c.annotations);
    row.avg_actions = *ratio(c.actions, c.annotations);
    row.avg_proper_nouns = *ratio(c.proper_nouns, c.annotations);
    row.avg_object_complexity = c.object_complexity.value();
    row.avg_action_complexity = c.action_complexity.value();
    out.rows.push_back(row);
  }
  return out;
}

SemanticStats semantic_stats(const std::vector<AnnotatedImage>& corpus) {
  SemanticAccumulator acc;
  for (const auto& img : corpus) acc.add(img);
  return acc.finish();
}

// ---------------------------------------------------------------------------

Histogram Histogram::uniform(double lo, double hi, std::size_t n) {
  if (n == 0 || !(hi > lo)) throw DomainError("histogram needs n > 0 and hi > lo");
  Histogram h;
  h.bin_edges.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    h.bin_edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n);
  }
  h.bin_edges[n] = hi;
  h.counts.assign(n, 0);
  return h;
}

std::size_t Histogram::bin_of(double x) const noexcept {
  const std::size_t n = counts.size();
  const double lo = bin_edges.front();
  const double hi = bin_edges.back();
  const double pos = std::floor((x - lo) / (hi - lo) * static_cast<double>(n));
  if (!(pos > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(pos), n - 1);
}

void Histogram::add(double x) { ++counts[bin_of(x)]; }

std::uint64_t Histogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::size_t HeatmapGrid::cell_of(double normalized) const noexcept {
  const double pos = std::floor(normalized * static_cast<double>(resolution));
  if (!(pos > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(pos), resolution - 1);
}

void HeatmapGrid::add(double nx, double ny) { ++counts[cell_of(ny) * resolution + cell_of(nx)]; }

std::uint64_t HeatmapGrid::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

SpatialAccumulator::SpatialAccumulator(BoxSource source, std::size_t resolution)
    : source_(source),
      stats_{Histogram::uniform(0.0, 1.0, kSpatialBins),
             Histogram::uniform(-std::log(kAspectClip), std::log(kAspectClip), kSpatialBins),
             HeatmapGrid(resolution), 0, 0} {
  if (resolution == 0) throw DomainError("heatmap resolution must be positive");
}

void SpatialAccumulator::add_box(const geometry::BBox& box, const geometry::ImageSize& size) {
  ++stats_.boxes;
  const double area = std::clamp(box.area() / (size.width * size.height), 0.0, 1.0);
  stats_.area.add(std::sqrt(area));

  if (box.width() > 0.0 && box.height() > 0.0) {
    const double clip = std::log(kAspectClip);
    stats_.aspect.add(std::clamp(std::log(box.width() / box.height()), -clip, clip));
  } else {
    ++stats_.aspect_skipped;
  }

  const double cx = (box.x0 + box.x1) / 2.0 / size.width;
  const double cy = (box.y0 + box.y1) / 2.0 / size.height;
  stats_.heatmap.add(cx, cy);
}

void SpatialAccumulator::add(const AnnotatedImage& image) {
  if (source_ == BoxSource::RegionText) {
    for (const auto& p : image.region_texts) {
      add_box(std::visit([](const auto& r) { return geometry::envelope(r); }, p.region), image.size);
    }
  } else {
    for (const auto& t : image.triplets) {
      for (const auto& g : t.regions) add_box(g.box, image.size);
    }
  }
}

void SpatialAccumulator::merge(const SpatialAccumulator& o) {
  if (o.stats_.heatmap.resolution != stats_.heatmap.resolution) {
    throw DomainError("cannot merge heatmaps of different resolution");
  }
  for (std::size_t i = 0; i < stats_.area.counts.size(); ++i) stats_.area.counts[i] += o.stats_.area.counts[i];
  for (std::size_t i = 0; i < stats_.aspect.counts.size(); ++i) {
    stats_.aspect.counts[i] += o.stats_.aspect.counts[i];
  }
  for (std::size_t i = 0; i < stats_.heatmap.counts.size(); ++i) {
    stats_.heatmap.counts[i] += o.stats_.heatmap.counts[i];
  }
  stats_.boxes += o.stats_.boxes;
  stats_.aspect_skipped += o.stats_.aspect_skipped;
}

SpatialStats spatial_stats(const std::vector<AnnotatedImage>& corpus, BoxSource source,
                           std::size_t resolution) {
  SpatialAccumulator acc(source, resolution);
  for (const auto& img : corpus) acc.add(img);
  return acc.finish();
}

// ---------------------------------------------------------------------------

CorpusAccumulator::CorpusAccumulator(std::size_t resolution)
    : region_text_(BoxSource::RegionText, resolution), triplets_(BoxSource::Triplets, resolution) {}

void CorpusAccumulator::add(const AnnotatedImage& image) {
  ++records_;
  annotation_.add(image);
  semantic_.add(image);
  region_text_.add(image);
  triplets_.add(image);
}

void CorpusAccumulator::merge(const CorpusAccumulator& o) {
  records_ += o.records_;
  skipped_records_ += o.skipped_records_;
  annotation_.merge(o.annotation_);
  semantic_.merge(o.semantic_);
  region_text_.merge(o.region_text_);
  triplets_.merge(o.triplets_);
}

Json CorpusAccumulator::to_json() const {
  return {{"records", records_},
          {"skipped_records", skipped_records_},
          {"annotation", stats::to_json(annotation_.finish())},
          {"semantic", stats::to_json(semantic_.finish())},
          {"spatial",
           {{"region_text", stats::to_json(region_text_.finish())},
            {"text_phrase_region", stats::to_json(triplets_.finish())}}}};
}

Json to_json(const AnnotationStats& stats) {
  Json rows = Json::array();
  for (const auto& r : stats) {
    Json j{{"annotation_type", r.annotation_type},
           {"text_type", r.text_type},
           {"image_annotations", r.image_annotations}};
    if (r.avg_tokens) j["avg_tokens"] = *r.avg_tokens;
    if (r.regions) j["regions"] = *r.regions;
    if (r.avg_regions) j["avg_regions"] = *r.avg_regions;
    if (r.avg_regional_tokens) j["avg_regional_tokens"] = *r.avg_regional_tokens;
    rows.push_back(std::move(j));
  }
  return rows;
}

Json to_json(const SemanticStats& stats) {
  Json rows = Json::array();
  for (const auto& r : stats.rows) {
    Json j{{"text_type", r.text_type},
           {"annotations", r.annotations},
           {"avg_tokens", r.avg_tokens},
           {"avg_objects", r.avg_objects},
           {"avg_attributes", r.avg_attributes},
           {"avg_actions", r.avg_actions},
           {"avg_proper_nouns", r.avg_proper_nouns}};
    if (r.avg_object_complexity) j["avg_object_complexity"] = *r.avg_object_complexity;
    if (r.avg_action_complexity) j["avg_action_complexity"] = *r.avg_action_complexity;
    rows.push_back(std::move(j));
  }
  return {{"skipped_records", stats.skipped_records}, {"by_text_type", std::move(rows)}};
}

namespace {

Json histogram_json(const Histogram& h) {
  return {{"bin_edges", h.bin_edges}, {"counts", h.counts}};
}

}  // namespace

Json to_json(const SpatialStats& s) {
  Json grid = Json::array();
  for (std::size_t r = 0; r < s.heatmap.resolution; ++r) {
    grid.push_back(std::vector<std::uint64_t>(
        s.heatmap.counts.begin() + static_cast<std::ptrdiff_t>(r * s.heatmap.resolution),
        s.heatmap.counts.begin() + static_cast<std::ptrdiff_t>((r + 1) * s.heatmap.resolution)));
  }
  return {{"boxes", s.boxes},
          {"aspect_skipped", s.aspect_skipped},
          {"area_histogram", histogram_json(s.area)},
          {"aspect_histogram", histogram_json(s.aspect)},
          {"center_heatmap", {{"resolution", s.heatmap.resolution}, {"counts", std::move(grid)}}}};
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream os;
  os.precision(17);
  os << "bin_start,bin_end,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    os << h.bin_edges[i] << ',' << h.bin_edges[i + 1] << ',' << h.counts[i] << '\n';
  }
  return os.str();
}

std::string heatmap_csv(const HeatmapGrid& g) {
  std::ostringstream os;
  for (std::size_t r = 0; r < g.resolution; ++r) {
    for (std::size_t c = 0; c < g.resolution; ++c) {
      if (c > 0) os << ',';
      os << g.at(r, c);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace vtask::stats
