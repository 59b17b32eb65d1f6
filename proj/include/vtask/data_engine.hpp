#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vtask/geometry.hpp"
#include "vtask/linguistics.hpp"

namespace vtask::data {

enum class Granularity { Brief, Detailed, MoreDetailed };
enum class TextSource { Specialist, Human, Refined };
enum class TextRole { Phrase, Brief, NounChunk };

const char* to_string(Granularity g) noexcept;
const char* to_string(TextSource s) noexcept;
const char* to_string(TextRole r) noexcept;
std::optional<Granularity> granularity_from(std::string_view s) noexcept;
std::optional<TextSource> source_from(std::string_view s) noexcept;
std::optional<TextRole> role_from(std::string_view s) noexcept;

struct TextAnnotation {
  Granularity granularity = Granularity::Brief;
  std::string text;
  TextSource source = TextSource::Specialist;
  /// Dependency parse of the text, one entry per sentence.
  std::optional<std::vector<linguistics::ParsedSentence>> parse;
  /// Sentence ids in a sidecar CoNLL-U file; when set, the parse is written
  /// back as a reference instead of inline.
  std::vector<std::string> parse_ref;
  friend bool operator==(const TextAnnotation&, const TextAnnotation&) = default;
};

struct CandidateText {
  std::string text;
  TextRole role = TextRole::Phrase;
  friend bool operator==(const CandidateText&, const CandidateText&) = default;
};

using PairRegion = std::variant<geometry::BBox, geometry::QuadBox>;

struct RegionTextPair {
  PairRegion region;
  std::vector<CandidateText> texts;
  std::optional<std::size_t> selected;
  double confidence = 1.0;
  friend bool operator==(const RegionTextPair&, const RegionTextPair&) = default;
};

/// Byte span [start, end) into the referenced text.
struct PhraseSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
  friend bool operator==(const PhraseSpan&, const PhraseSpan&) = default;
};

struct GroundedBox {
  geometry::BBox box;
  double confidence = 1.0;
  std::optional<geometry::Polygon> mask;
  friend bool operator==(const GroundedBox&, const GroundedBox&) = default;
};

struct PhraseRegionTriplet {
  std::size_t text_ref = 0;
  PhraseSpan phrase;
  std::vector<GroundedBox> regions;
  double phrase_confidence = 1.0;
  friend bool operator==(const PhraseRegionTriplet&, const PhraseRegionTriplet&) = default;
};

struct AnnotatedImage {
  std::string id;
  geometry::ImageSize size;
  std::vector<TextAnnotation> texts;
  std::vector<RegionTextPair> region_texts;
  std::vector<PhraseRegionTriplet> triplets;
  friend bool operator==(const AnnotatedImage&, const AnnotatedImage&) = default;
};

/// Checks every record invariant; throws SchemaError naming the first violation.
void validate(const AnnotatedImage& image);

inline constexpr std::size_t kUnlimitedObjects = std::numeric_limits<std::size_t>::max();

struct FilterConfig {
  std::size_t max_objects = 30;
  double min_object_complexity = 1.0;
  double min_action_complexity = 1.0;
  double box_confidence_threshold = 0.2;
  double nms_iou_threshold = 0.5;
  double phrase_confidence_threshold = 0.2;
  bool class_aware_nms = true;
  bool filter_texts = true;
  /// Case-folded phrases excluded from triplets.
  std::set<std::string> blacklist = default_blacklist();

  static std::set<std::string> default_blacklist();
  /// Configuration under which every filter is the identity on inputs
  /// without exactly coincident same-class boxes.
  static FilterConfig permissive();
};

/// Throws ConfigError when a threshold is out of range.
void validate(const FilterConfig& cfg);

std::string case_fold(std::string_view text);

// Reason codes used in decisions and filter summaries.
inline constexpr const char* kExcessiveObjects = "excessive_objects";
inline constexpr const char* kLowObjectComplexity = "low_object_complexity";
inline constexpr const char* kLowActionComplexity = "low_action_complexity";

struct TextDecision {
  bool keep = true;
  std::optional<std::string> reason;
};

/// Per-reason drop tally, keyed "<kind>.<reason>" (e.g. "regions.nms_suppressed").
using DropCounts = std::map<std::string, std::size_t>;

/// Throws PreconditionError when the annotation carries no parse.
TextDecision filter_text(const TextAnnotation& text, const FilterConfig& cfg);

/// Class key for NMS: the selected text, else the first phrase-role text, else the first text.
std::string class_key(const RegionTextPair& pair);

/// Confidence threshold then NMS; survivors keep their input order.
std::vector<RegionTextPair> filter_regions(const std::vector<RegionTextPair>& pairs,
                                           const FilterConfig& cfg, DropCounts* counts = nullptr);

std::vector<PhraseRegionTriplet> filter_triplets(const std::vector<PhraseRegionTriplet>& triplets,
                                                 const FilterConfig& cfg,
                                                 DropCounts* counts = nullptr);

/// Runs all three filters on one record. Triplets whose text was dropped are
/// dropped with it and text_refs are renumbered.
AnnotatedImage filter_image(const AnnotatedImage& image, const FilterConfig& cfg,
                            DropCounts* counts = nullptr);

/// Candidate descriptions for a detected region: its category label, the
/// region's brief text and the brief's noun chunks, deduplicated
/// case-insensitively (first occurrence wins).
std::vector<CandidateText> generate_region_text_candidates(
    std::string_view label, std::string_view brief, const linguistics::ParsedSentence* brief_parse);

/// Folds a refined record into the original. Throws MergeError on id or size mismatch.
AnnotatedImage merge_annotations(const AnnotatedImage& original, const AnnotatedImage& refined,
                                 const FilterConfig& cfg);

}  // namespace vtask::data
