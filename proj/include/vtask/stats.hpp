#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vtask/data_engine.hpp"
#include "json.hpp"

namespace vtask::stats {

/// Number of whitespace-separated tokens.
std::size_t count_tokens(std::string_view text) noexcept;

// ---------------------------------------------------------------------------
// Annotation statistics: one row per (annotation type, text type).

struct AnnotationRow {
  std::string annotation_type;  // "text", "region_text", "text_phrase_region"
  std::string text_type;        // "brief", "detailed", "more_detailed", "phrase"
  std::uint64_t image_annotations = 0;
  std::optional<double> avg_tokens;
  std::optional<std::uint64_t> regions;
  std::optional<double> avg_regions;
  std::optional<double> avg_regional_tokens;
  friend bool operator==(const AnnotationRow&, const AnnotationRow&) = default;
};

using AnnotationStats = std::vector<AnnotationRow>;

/// Streaming accumulator; all state is integral so merging is exact,
/// associative and commutative.
class AnnotationAccumulator {
 public:
  void add(const data::AnnotatedImage& image);
  void merge(const AnnotationAccumulator& other);
  AnnotationStats finish() const;
  friend bool operator==(const AnnotationAccumulator&, const AnnotationAccumulator&) = default;

 private:
  struct TextCell {
    std::uint64_t annotations = 0;
    std::uint64_t tokens = 0;
    friend bool operator==(const TextCell&, const TextCell&) = default;
  };
  struct RegionCell {
    std::uint64_t images = 0;
    std::uint64_t regions = 0;
    std::uint64_t tokens = 0;
    friend bool operator==(const RegionCell&, const RegionCell&) = default;
  };
  struct TripletCell {
    std::uint64_t annotations = 0;
    std::uint64_t tokens = 0;
    std::uint64_t regions = 0;
    std::uint64_t regional_tokens = 0;
    friend bool operator==(const TripletCell&, const TripletCell&) = default;
  };
  std::array<TextCell, 3> text_{};
  RegionCell phrase_{};
  RegionCell brief_{};
  std::array<TripletCell, 3> triplet_{};
};

AnnotationStats annotation_stats(const std::vector<data::AnnotatedImage>& corpus);

// ---------------------------------------------------------------------------
// Semantic coverage per text granularity.

struct SemanticRow {
  std::string text_type;
  std::uint64_t annotations = 0;
  double avg_tokens = 0.0;
  double avg_objects = 0.0;
  double avg_attributes = 0.0;
  double avg_actions = 0.0;
  double avg_proper_nouns = 0.0;
  std::optional<double> avg_object_complexity;
  std::optional<double> avg_action_complexity;
  friend bool operator==(const SemanticRow&, const SemanticRow&) = default;
};

struct SemanticStats {
  std::vector<SemanticRow> rows;  // only granularities with at least one annotation
  std::uint64_t skipped_records = 0;
  friend bool operator==(const SemanticStats&, const SemanticStats&) = default;
};

/// Exact running sum of per-annotation mean values d/c, bucketed by denominator.
class MeanOfMeans {
 public:
  void add(std::uint64_t numerator, std::uint64_t denominator);
  void merge(const MeanOfMeans& other);
  std::uint64_t contributors() const noexcept { return contributors_; }
  std::optional<double> value() const;
  friend bool operator==(const MeanOfMeans&, const MeanOfMeans&) = default;

 private:
  std::map<std::uint64_t, std::uint64_t> numerators_;
  std::uint64_t contributors_ = 0;
};

class SemanticAccumulator {
 public:
  /// Returns false (and counts a skip) when any text lacks a parse.
  bool add(const data::AnnotatedImage& image);
  void merge(const SemanticAccumulator& other);
  SemanticStats finish() const;
  friend bool operator==(const SemanticAccumulator&, const SemanticAccumulator&) = default;

 private:
  struct Cell {
    std::uint64_t annotations = 0;
    std::uint64_t tokens = 0;
    std::uint64_t objects = 0;
    std::uint64_t attributes = 0;
    std::uint64_t actions = 0;
    std::uint64_t proper_nouns = 0;
    MeanOfMeans object_complexity;
    MeanOfMeans action_complexity;
    friend bool operator==(const Cell&, const Cell&) = default;
  };
  std::array<Cell, 3> cells_{};
  std::uint64_t skipped_ = 0;
};

SemanticStats semantic_stats(const std::vector<data::AnnotatedImage>& corpus);

// ---------------------------------------------------------------------------
// Spatial coverage.

struct Histogram {
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;

  /// n uniform bins over [lo, hi]; half-open except the last bin, which is closed.
  static Histogram uniform(double lo, double hi, std::size_t n);
  std::size_t bin_of(double x) const noexcept;
  void add(double x);
  std::uint64_t total() const noexcept;
  friend bool operator==(const Histogram&, const Histogram&) = default;
};

struct HeatmapGrid {
  std::size_t resolution = 64;
  std::vector<std::uint64_t> counts;  // row-major, row = y cell

  explicit HeatmapGrid(std::size_t g = 64) : resolution(g), counts(g * g, 0) {}
  std::size_t cell_of(double normalized) const noexcept;
  void add(double nx, double ny);
  std::uint64_t at(std::size_t row, std::size_t col) const { return counts.at(row * resolution + col); }
  std::uint64_t total() const noexcept;
  friend bool operator==(const HeatmapGrid&, const HeatmapGrid&) = default;
};

enum class BoxSource { RegionText, Triplets };

inline constexpr std::size_t kSpatialBins = 50;
inline constexpr double kAspectClip = 20.0;  // aspect observations clipped to [-ln 20, ln 20]

struct SpatialStats {
  Histogram area;
  Histogram aspect;
  HeatmapGrid heatmap;
  std::uint64_t boxes = 0;
  std::uint64_t aspect_skipped = 0;  // zero-width or zero-height boxes
  friend bool operator==(const SpatialStats&, const SpatialStats&) = default;
};

class SpatialAccumulator {
 public:
  explicit SpatialAccumulator(BoxSource source, std::size_t resolution = 64);
  void add(const data::AnnotatedImage& image);
  void add_box(const geometry::BBox& box, const geometry::ImageSize& size);
  void merge(const SpatialAccumulator& other);
  const SpatialStats& finish() const noexcept { return stats_; }
  friend bool operator==(const SpatialAccumulator&, const SpatialAccumulator&) = default;

 private:
  BoxSource source_;
  SpatialStats stats_;
};

SpatialStats spatial_stats(const std::vector<data::AnnotatedImage>& corpus, BoxSource source,
                           std::size_t resolution = 64);

// ---------------------------------------------------------------------------

/// All corpus statistics in one mergeable accumulator.
class CorpusAccumulator {
 public:
  explicit CorpusAccumulator(std::size_t resolution = 64);
  void add(const data::AnnotatedImage& image);
  void skip_record() noexcept { ++skipped_records_; }
  void merge(const CorpusAccumulator& other);
  nlohmann::json to_json() const;

  std::uint64_t records() const noexcept { return records_; }
  const AnnotationAccumulator& annotation() const noexcept { return annotation_; }
  const SemanticAccumulator& semantic() const noexcept { return semantic_; }
  const SpatialAccumulator& spatial(BoxSource s) const noexcept {
    return s == BoxSource::RegionText ? region_text_ : triplets_;
  }
  friend bool operator==(const CorpusAccumulator&, const CorpusAccumulator&) = default;

 private:
  std::uint64_t records_ = 0;
  std::uint64_t skipped_records_ = 0;
  AnnotationAccumulator annotation_;
  SemanticAccumulator semantic_;
  SpatialAccumulator region_text_;
  SpatialAccumulator triplets_;
};

nlohmann::json to_json(const AnnotationStats& stats);
nlohmann::json to_json(const SemanticStats& stats);
nlohmann::json to_json(const SpatialStats& stats);

/// "bin_start,bin_end,count" rows with a header line.
std::string histogram_csv(const Histogram& h);
/// One line per grid row, comma-separated counts.
std::string heatmap_csv(const HeatmapGrid& g);

}  // namespace vtask::stats
