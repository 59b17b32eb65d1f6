#include <string>

#include "vtask/error.hpp"
#include "vtask/task_codec.hpp"

namespace vtask::codec {

namespace {

struct TaskInfo {
  Task task;
  std::string_view name;
};

constexpr std::array<TaskInfo, 12> kTaskInfo{{
    {Task::Caption, "caption"},
    {Task::DetailedCaption, "detailed_caption"},
    {Task::MoreDetailedCaption, "more_detailed_caption"},
    {Task::RegionProposal, "region_proposal"},
    {Task::ObjectDetection, "object_detection"},
    {Task::DenseRegionCaption, "dense_region_caption"},
    {Task::PhraseGrounding, "phrase_grounding"},
    {Task::ReferringExpressionComprehension, "referring_expression_comprehension"},
    {Task::OpenVocabularyDetection, "open_vocabulary_detection"},
    {Task::ReferringSegmentation, "referring_segmentation"},
    {Task::RegionToText, "region_to_text"},
    {Task::TextDetectionRecognition, "text_detection_recognition"},
}};

// Prompt templates. Fixed prompts have an empty suffix and no payload.
constexpr std::string_view kCaption = "What does the image describe?";
constexpr std::string_view kDetailedCaption = "Describe with a paragraph what is shown in the image.";
constexpr std::string_view kMoreDetailedCaption = "Describe in detail what is shown in the image.";
constexpr std::string_view kRegionProposal = "Locate the region proposals in the image.";
constexpr std::string_view kObjectDetection = "Locate the objects with category name in the image.";
constexpr std::string_view kDenseRegionCaption =
    "Locate the objects in the image, with their descriptions.";
constexpr std::string_view kOcr = "What is the text in the image, with regions?";

constexpr std::string_view kGroundingPrefix = "Locate the phrases in the caption: ";
constexpr std::string_view kExpressionPrefix = "Locate the region described by the expression: ";
constexpr std::string_view kLocatePrefix = "Locate ";
constexpr std::string_view kOpenVocabSuffix = " in the image.";
constexpr std::string_view kSegmentTextSuffix = " in the image with mask";
constexpr std::string_view kSegmentRegionPrefix = "What is the polygon mask of region ";
constexpr std::string_view kRegionTextPrefix = "What does the region ";
constexpr std::string_view kRegionTextSuffix = " describe?";

std::string task_label(Task task) { return std::string(task_name(task)); }

bool needs_text(Task task) {
  return task == Task::PhraseGrounding || task == Task::ReferringExpressionComprehension ||
         task == Task::OpenVocabularyDetection;
}

std::string render_region(const geometry::QuantizedRegion& region) {
  std::string out;
  for (int b : region.bins) out += loc_surface(b);
  return out;
}

std::string_view fixed_prompt(Task task) {
  switch (task) {
    case Task::Caption:
      return kCaption;
    case Task::DetailedCaption:
      return kDetailedCaption;
    case Task::MoreDetailedCaption:
      return kMoreDetailedCaption;
    case Task::RegionProposal:
      return kRegionProposal;
    case Task::ObjectDetection:
      return kObjectDetection;
    case Task::DenseRegionCaption:
      return kDenseRegionCaption;
    case Task::TextDetectionRecognition:
      return kOcr;
    default:
      return {};
  }
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

// Strips prefix/suffix or throws PromptError.
std::string_view between(Task task, std::string_view rendered, std::string_view prefix,
                         std::string_view suffix) {
  if (rendered.size() < prefix.size() + suffix.size() || !starts_with(rendered, prefix) ||
      !ends_with(rendered, suffix)) {
    throw PromptError("prompt does not match the " + task_label(task) + " template");
  }
  return rendered.substr(prefix.size(), rendered.size() - prefix.size() - suffix.size());
}

geometry::QuantizedRegion region_payload(Task task, std::string_view text) {
  TokenStream ts;
  try {
    ts = lex(text);
  } catch (const LexError& e) {
    throw PromptError(task_label(task) + " prompt: " + e.what());
  }
  geometry::QuantizedRegion region{geometry::RegionKind::Box, {}};
  for (const auto& item : ts.items) {
    const auto* loc = std::get_if<LocToken>(&item);
    if (loc == nullptr) {
      throw PromptError(task_label(task) + " prompt region must be location tokens only");
    }
    region.bins.push_back(loc->bin);
  }
  if (region.bins.size() != 4) {
    throw PromptError(task_label(task) + " prompt region needs 4 location tokens, got " +
                      std::to_string(region.bins.size()));
  }
  return region;
}

}  // namespace

std::string_view task_name(Task task) noexcept {
  for (const auto& info : kTaskInfo) {
    if (info.task == task) return info.name;
  }
  return "unknown";
}

std::optional<Task> task_from_name(std::string_view name) noexcept {
  for (const auto& info : kTaskInfo) {
    if (info.name == name) return info.task;
  }
  if (name == "ocr") return Task::TextDetectionRecognition;
  return std::nullopt;
}

TaskPrompt TaskPrompt::open_vocabulary(const std::vector<std::string>& queries) {
  if (queries.empty()) throw PromptError("open-vocabulary detection needs at least one query");
  std::string joined;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (queries[i].empty()) throw PromptError("open-vocabulary query " + std::to_string(i) + " is empty");
    if (i > 0) joined += kQuerySeparator;
    joined += queries[i];
  }
  return TaskPrompt{Task::OpenVocabularyDetection, joined, std::nullopt};
}

void validate(const TaskPrompt& prompt) {
  const std::string label = task_label(prompt.task);
  const bool region_task = prompt.task == Task::RegionToText;
  const bool segmentation = prompt.task == Task::ReferringSegmentation;

  if (needs_text(prompt.task) && !prompt.text) {
    throw PromptError(label + " prompt requires a text payload");
  }
  if (region_task && !prompt.region) {
    throw PromptError(label + " prompt requires a region payload");
  }
  if (segmentation && prompt.text.has_value() == prompt.region.has_value()) {
    throw PromptError(label + " prompt requires exactly one of a text or region payload");
  }
  if (!needs_text(prompt.task) && !segmentation && prompt.text) {
    throw PromptError(label + " prompt takes no text payload");
  }
  if (!region_task && !segmentation && prompt.region) {
    throw PromptError(label + " prompt takes no region payload");
  }

  if (prompt.text) {
    if (prompt.text->empty()) throw PromptError(label + " prompt text payload is empty");
    if (contains_loc_surface(*prompt.text)) {
      throw PromptError(label + " prompt text payload contains a location token");
    }
    if (prompt.task == Task::OpenVocabularyDetection) {
      std::string_view rest = *prompt.text;
      while (true) {
        const auto sep = rest.find(kQuerySeparator);
        if (rest.substr(0, sep).empty()) {
          throw PromptError(label + " prompt has an empty category query");
        }
        if (sep == std::string_view::npos) break;
        rest.remove_prefix(sep + kQuerySeparator.size());
      }
    }
  }
  if (prompt.region) {
    if (prompt.region->kind != geometry::RegionKind::Box) {
      throw PromptError(label + " prompt region must be a box");
    }
    try {
      geometry::validate(*prompt.region);
    } catch (const DomainError& e) {
      throw PromptError(label + " prompt region: " + e.what());
    }
  }
}

std::string render_prompt(const TaskPrompt& prompt) {
  validate(prompt);
  switch (prompt.task) {
    case Task::PhraseGrounding:
      return std::string(kGroundingPrefix) + *prompt.text;
    case Task::ReferringExpressionComprehension:
      return std::string(kExpressionPrefix) + *prompt.text;
    case Task::OpenVocabularyDetection:
      return std::string(kLocatePrefix) + *prompt.text + std::string(kOpenVocabSuffix);
    case Task::ReferringSegmentation:
      if (prompt.region) return std::string(kSegmentRegionPrefix) + render_region(*prompt.region);
      return std::string(kLocatePrefix) + *prompt.text + std::string(kSegmentTextSuffix);
    case Task::RegionToText:
      return std::string(kRegionTextPrefix) + render_region(*prompt.region) +
             std::string(kRegionTextSuffix);
    default:
      return std::string(fixed_prompt(prompt.task));
  }
}

TaskPrompt parse_prompt(Task task, std::string_view rendered) {
  TaskPrompt prompt{task, std::nullopt, std::nullopt};
  switch (task) {
    case Task::PhraseGrounding:
      prompt.text = std::string(between(task, rendered, kGroundingPrefix, ""));
      break;
    case Task::ReferringExpressionComprehension:
      prompt.text = std::string(between(task, rendered, kExpressionPrefix, ""));
      break;
    case Task::OpenVocabularyDetection:
      prompt.text = std::string(between(task, rendered, kLocatePrefix, kOpenVocabSuffix));
      break;
    case Task::ReferringSegmentation:
      if (starts_with(rendered, kSegmentRegionPrefix)) {
        prompt.region = region_payload(task, between(task, rendered, kSegmentRegionPrefix, ""));
      } else {
        prompt.text = std::string(between(task, rendered, kLocatePrefix, kSegmentTextSuffix));
      }
      break;
    case Task::RegionToText:
      prompt.region =
          region_payload(task, between(task, rendered, kRegionTextPrefix, kRegionTextSuffix));
      break;
    default:
      if (rendered != fixed_prompt(task)) {
        throw PromptError("prompt does not match the " + task_label(task) + " template");
      }
      break;
  }
  validate(prompt);
  return prompt;
}

}  // namespace vtask::codec
