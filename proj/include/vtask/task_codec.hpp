#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vtask/geometry.hpp"
#include "vtask/tokens.hpp"

namespace vtask::codec {

enum class Task {
  Caption,
  DetailedCaption,
  MoreDetailedCaption,
  RegionProposal,
  ObjectDetection,
  DenseRegionCaption,
  PhraseGrounding,
  ReferringExpressionComprehension,
  OpenVocabularyDetection,
  ReferringSegmentation,
  RegionToText,
  TextDetectionRecognition,
};

inline constexpr std::array<Task, 12> kAllTasks{
    Task::Caption,
    Task::DetailedCaption,
    Task::MoreDetailedCaption,
    Task::RegionProposal,
    Task::ObjectDetection,
    Task::DenseRegionCaption,
    Task::PhraseGrounding,
    Task::ReferringExpressionComprehension,
    Task::OpenVocabularyDetection,
    Task::ReferringSegmentation,
    Task::RegionToText,
    Task::TextDetectionRecognition,
};

/// snake_case identifier used in JSONL records, e.g. "phrase_grounding".
std::string_view task_name(Task task) noexcept;
std::optional<Task> task_from_name(std::string_view name) noexcept;

/// Separator placed between queries of an open-vocabulary detection prompt.
inline constexpr std::string_view kQuerySeparator = "<and>";

struct TaskPrompt {
  Task task = Task::Caption;
  std::optional<std::string> text;
  std::optional<geometry::QuantizedRegion> region;

  /// Open-vocabulary prompt over several category queries.
  static TaskPrompt open_vocabulary(const std::vector<std::string>& queries);
  friend bool operator==(const TaskPrompt&, const TaskPrompt&) = default;
};

/// Throws PromptError when the payload does not match what the task expects.
void validate(const TaskPrompt& prompt);

std::string render_prompt(const TaskPrompt& prompt);

/// Inverse of render_prompt for a known task.
TaskPrompt parse_prompt(Task task, std::string_view rendered);

// Response shapes, parameterized over the region representation so the same
// structure carries quantized bins or pixel coordinates.

struct TextResponse {
  std::string text;
  friend bool operator==(const TextResponse&, const TextResponse&) = default;
};

template <class R>
struct RegionsResponse {
  std::vector<R> regions;
  friend bool operator==(const RegionsResponse&, const RegionsResponse&) = default;
};

template <class R>
struct LabeledRegion {
  std::string label;
  R region;
  friend bool operator==(const LabeledRegion&, const LabeledRegion&) = default;
};

template <class R>
struct LabeledRegionsResponse {
  std::vector<LabeledRegion<R>> items;
  friend bool operator==(const LabeledRegionsResponse&, const LabeledRegionsResponse&) = default;
};

template <class R>
struct GroundedPhrase {
  std::string phrase;
  std::vector<R> regions;
  friend bool operator==(const GroundedPhrase&, const GroundedPhrase&) = default;
};

template <class R>
struct GroundedTextResponse {
  std::vector<GroundedPhrase<R>> phrases;
  friend bool operator==(const GroundedTextResponse&, const GroundedTextResponse&) = default;
};

template <class R>
struct MaskResponse {
  R polygon;
  friend bool operator==(const MaskResponse&, const MaskResponse&) = default;
};

template <class R>
using BasicResponse = std::variant<TextResponse, RegionsResponse<R>, LabeledRegionsResponse<R>,
                                   GroundedTextResponse<R>, MaskResponse<R>>;

using TaskResponse = BasicResponse<geometry::QuantizedRegion>;
using PixelResponse = BasicResponse<geometry::Region>;

enum class ResponseShape { Text, Regions, LabeledRegions, GroundedText, Mask };

ResponseShape response_shape(Task task) noexcept;

/// Region kind every region of the task's response must have (none for text tasks).
std::optional<geometry::RegionKind> response_region_kind(Task task) noexcept;

/// Throws CodecError when the response variant, region kinds, arity or labels
/// do not fit the task.
void validate(const TaskResponse& response, Task task);

TokenStream serialize_response(const TaskResponse& response, Task task);

TaskResponse parse_response(const TokenStream& stream, Task task);

PixelResponse decode_to_pixels(const TaskResponse& response, const geometry::ImageSize& size);

/// Quantizes every pixel region; the inverse direction of decode_to_pixels.
TaskResponse quantize_response(const PixelResponse& response, const geometry::ImageSize& size);

}  // namespace vtask::codec
