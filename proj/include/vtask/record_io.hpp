#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "vtask/data_engine.hpp"
#include "vtask/task_codec.hpp"
#include "json.hpp"

namespace vtask::io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Sentences of a sidecar CoNLL-U file, by "# sent_id".
using SentenceIndex = std::unordered_map<std::string, linguistics::ParsedSentence>;

/// Throws ConlluError on malformed input and SchemaError on duplicate or missing ids.
SentenceIndex index_sentences(std::string_view conllu);

/// Decodes one AnnotatedImage record and checks its invariants. parse_ref
/// entries are resolved against `sidecar` when it is given; otherwise they are
/// kept unresolved. Throws SchemaError.
data::AnnotatedImage image_from_json(const Json& j, const SentenceIndex* sidecar = nullptr,
                                     int schema_version = kSchemaVersion);
Json to_json(const data::AnnotatedImage& image);

/// Task-level record with pixel-space payloads, the input of `encode` and the
/// output of `decode`.
struct TaskRecord {
  std::string id;
  codec::Task task = codec::Task::Caption;
  geometry::ImageSize size;
  std::optional<std::string> prompt_text;
  std::optional<geometry::BBox> prompt_region;
  codec::PixelResponse response;
  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

/// Prompt and response rendered as token text.
struct EncodedRecord {
  std::string id;
  codec::Task task = codec::Task::Caption;
  geometry::ImageSize size;
  std::string prompt;
  std::string response;
  friend bool operator==(const EncodedRecord&, const EncodedRecord&) = default;
};

/// `default_task` applies to records without a "task" field. Throws SchemaError.
TaskRecord task_record_from_json(const Json& j, std::optional<codec::Task> default_task = {});
Json to_json(const TaskRecord& record);

EncodedRecord encoded_record_from_json(const Json& j);
Json to_json(const EncodedRecord& record);

/// Quantizes, renders the prompt and serializes the response.
EncodedRecord encode_record(const TaskRecord& record);

/// Parses prompt and response back and maps regions to bin-centre pixels.
TaskRecord decode_record(const EncodedRecord& record);

}  // namespace vtask::io
