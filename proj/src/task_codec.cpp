#include "vtask/task_codec.hpp"

#include <type_traits>

#include "vtask/error.hpp"

namespace vtask::codec {

using geometry::QuantizedRegion;
using geometry::RegionKind;

namespace {

std::string task_label(Task task) { return std::string(task_name(task)); }

std::size_t index_of(ResponseShape shape) { return static_cast<std::size_t>(shape); }

void check_region(const QuantizedRegion& region, RegionKind expected, Task task) {
  if (region.kind != expected) {
    throw CodecError(task_label(task) + " expects " + geometry::to_string(expected) +
                     " regions, got " + geometry::to_string(region.kind));
  }
  try {
    geometry::validate(region);
  } catch (const DomainError& e) {
    throw CodecError(task_label(task) + ": " + e.what());
  }
}

void check_text(const std::string& text, Task task, bool allow_empty, const char* what) {
  if (!allow_empty && text.empty()) {
    throw CodecError(task_label(task) + " " + what + " must be non-empty");
  }
  if (contains_loc_surface(text)) {
    throw CodecError(task_label(task) + " " + what + " contains a location token: \"" + text +
                     "\"");
  }
}

void append_region(TokenStream& out, const QuantizedRegion& region) {
  for (int b : region.bins) out.append_loc(b);
}

// Consecutive location tokens starting at `pos`; advances pos past them.
std::vector<int> take_locs(const TokenStream& ts, std::size_t& pos) {
  std::vector<int> bins;
  while (pos < ts.items.size()) {
    const auto* loc = std::get_if<LocToken>(&ts.items[pos]);
    if (loc == nullptr) break;
    bins.push_back(loc->bin);
    ++pos;
  }
  return bins;
}

std::vector<QuantizedRegion> split_regions(const std::vector<int>& bins, std::size_t arity,
                                           RegionKind kind) {
  std::vector<QuantizedRegion> out;
  for (std::size_t i = 0; i < bins.size(); i += arity) {
    out.push_back({kind, std::vector<int>(bins.begin() + i, bins.begin() + i + arity)});
  }
  return out;
}

std::size_t arity_of(RegionKind kind) { return kind == RegionKind::Quad ? 8 : 4; }

template <class From, class To, class Fn>
BasicResponse<To> map_regions(const BasicResponse<From>& response, Fn&& fn) {
  return std::visit(
      [&](const auto& r) -> BasicResponse<To> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, TextResponse>) {
          return r;
        } else if constexpr (std::is_same_v<T, RegionsResponse<From>>) {
          RegionsResponse<To> out;
          for (const auto& region : r.regions) out.regions.push_back(fn(region));
          return out;
        } else if constexpr (std::is_same_v<T, LabeledRegionsResponse<From>>) {
          LabeledRegionsResponse<To> out;
          for (const auto& item : r.items) out.items.push_back({item.label, fn(item.region)});
          return out;
        } else if constexpr (std::is_same_v<T, GroundedTextResponse<From>>) {
          GroundedTextResponse<To> out;
          for (const auto& phrase : r.phrases) {
            GroundedPhrase<To> g{phrase.phrase, {}};
            for (const auto& region : phrase.regions) g.regions.push_back(fn(region));
            out.phrases.push_back(std::move(g));
          }
          return out;
        } else {
          return MaskResponse<To>{fn(r.polygon)};
        }
      },
      response);
}

}  // namespace

ResponseShape response_shape(Task task) noexcept {
  switch (task) {
    case Task::Caption:
    case Task::DetailedCaption:
    case Task::MoreDetailedCaption:
    case Task::RegionToText:
      return ResponseShape::Text;
    case Task::RegionProposal:
      return ResponseShape::Regions;
    case Task::ObjectDetection:
    case Task::DenseRegionCaption:
    case Task::ReferringExpressionComprehension:
    case Task::OpenVocabularyDetection:
    case Task::TextDetectionRecognition:
      return ResponseShape::LabeledRegions;
    case Task::PhraseGrounding:
      return ResponseShape::GroundedText;
    case Task::ReferringSegmentation:
      return ResponseShape::Mask;
  }
  return ResponseShape::Text;
}

std::optional<RegionKind> response_region_kind(Task task) noexcept {
  switch (response_shape(task)) {
    case ResponseShape::Text:
      return std::nullopt;
    case ResponseShape::Mask:
      return RegionKind::Polygon;
    default:
      return task == Task::TextDetectionRecognition ? RegionKind::Quad : RegionKind::Box;
  }
}

void validate(const TaskResponse& response, Task task) {
  const ResponseShape shape = response_shape(task);
  if (response.index() != index_of(shape)) {
    throw CodecError("response variant does not match task " + task_label(task));
  }
  const auto kind = response_region_kind(task);
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, TextResponse>) {
          check_text(r.text, task, true, "text");
        } else if constexpr (std::is_same_v<T, RegionsResponse<QuantizedRegion>>) {
          for (const auto& region : r.regions) check_region(region, *kind, task);
        } else if constexpr (std::is_same_v<T, LabeledRegionsResponse<QuantizedRegion>>) {
          for (const auto& item : r.items) {
            check_text(item.label, task, false, "label");
            check_region(item.region, *kind, task);
          }
        } else if constexpr (std::is_same_v<T, GroundedTextResponse<QuantizedRegion>>) {
          for (const auto& phrase : r.phrases) {
            check_text(phrase.phrase, task, false, "phrase");
            if (phrase.regions.empty()) {
              throw CodecError(task_label(task) + " phrase \"" + phrase.phrase +
                               "\" has no regions");
            }
            for (const auto& region : phrase.regions) check_region(region, *kind, task);
          }
        } else {
          check_region(r.polygon, *kind, task);
        }
      },
      response);
}

TokenStream serialize_response(const TaskResponse& response, Task task) {
  validate(response, task);
  TokenStream out;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, TextResponse>) {
          out.append_text(r.text);
        } else if constexpr (std::is_same_v<T, RegionsResponse<QuantizedRegion>>) {
          for (const auto& region : r.regions) append_region(out, region);
        } else if constexpr (std::is_same_v<T, LabeledRegionsResponse<QuantizedRegion>>) {
          for (const auto& item : r.items) {
            out.append_text(item.label);
            append_region(out, item.region);
          }
        } else if constexpr (std::is_same_v<T, GroundedTextResponse<QuantizedRegion>>) {
          for (const auto& phrase : r.phrases) {
            out.append_text(phrase.phrase);
            for (const auto& region : phrase.regions) append_region(out, region);
          }
        } else {
          append_region(out, r.polygon);
        }
      },
      response);
  return out;
}

TaskResponse parse_response(const TokenStream& stream, Task task) {
  const TokenStream ts = normalized(stream);
  const auto& items = ts.items;
  const std::string label = task_label(task);

  switch (response_shape(task)) {
    case ResponseShape::Text: {
      TextResponse out;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (std::holds_alternative<LocToken>(items[i])) {
          throw ParseError(label + " response cannot contain location tokens", i);
        }
        out.text += std::get<TextSpan>(items[i]).text;
      }
      return out;
    }
    case ResponseShape::Regions: {
      std::size_t pos = 0;
      std::vector<int> bins = take_locs(ts, pos);
      if (pos != items.size()) throw ParseError(label + " response cannot contain text", pos);
      if (bins.size() % 4 != 0) {
        throw ParseError(label + " needs a multiple of 4 location tokens, got " +
                             std::to_string(bins.size()),
                         bins.size() - bins.size() % 4);
      }
      return RegionsResponse<QuantizedRegion>{split_regions(bins, 4, RegionKind::Box)};
    }
    case ResponseShape::LabeledRegions: {
      const RegionKind kind = *response_region_kind(task);
      const std::size_t arity = arity_of(kind);
      LabeledRegionsResponse<QuantizedRegion> out;
      std::size_t pos = 0;
      while (pos < items.size()) {
        const auto* span = std::get_if<TextSpan>(&items[pos]);
        if (span == nullptr) throw ParseError(label + " expected a label before locations", pos);
        const std::size_t group_start = ++pos;
        std::vector<int> bins = take_locs(ts, pos);
        if (bins.size() != arity) {
          throw ParseError(label + " label \"" + span->text + "\" needs " + std::to_string(arity) +
                               " location tokens, got " + std::to_string(bins.size()),
                           group_start);
        }
        out.items.push_back({span->text, QuantizedRegion{kind, std::move(bins)}});
      }
      return out;
    }
    case ResponseShape::GroundedText: {
      GroundedTextResponse<QuantizedRegion> out;
      std::size_t pos = 0;
      while (pos < items.size()) {
        const auto* span = std::get_if<TextSpan>(&items[pos]);
        if (span == nullptr) throw ParseError(label + " expected a phrase before locations", pos);
        const std::size_t group_start = ++pos;
        std::vector<int> bins = take_locs(ts, pos);
        if (bins.empty() || bins.size() % 4 != 0) {
          throw ParseError(label + " phrase \"" + span->text +
                               "\" needs a positive multiple of 4 location tokens, got " +
                               std::to_string(bins.size()),
                           group_start);
        }
        out.phrases.push_back({span->text, split_regions(bins, 4, RegionKind::Box)});
      }
      return out;
    }
    case ResponseShape::Mask: {
      std::size_t pos = 0;
      std::vector<int> bins = take_locs(ts, pos);
      if (pos != items.size()) throw ParseError(label + " response cannot contain text", pos);
      if (bins.size() < 6 || bins.size() % 2 != 0) {
        throw ParseError(label + " polygon needs an even number of at least 6 location tokens, got " +
                             std::to_string(bins.size()),
                         0);
      }
      return MaskResponse<QuantizedRegion>{{RegionKind::Polygon, std::move(bins)}};
    }
  }
  throw ParseError("unknown task", 0);
}

PixelResponse decode_to_pixels(const TaskResponse& response, const geometry::ImageSize& size) {
  return map_regions<QuantizedRegion, geometry::Region>(
      response, [&](const QuantizedRegion& q) { return geometry::dequantize_region(q, size); });
}

TaskResponse quantize_response(const PixelResponse& response, const geometry::ImageSize& size) {
  return map_regions<geometry::Region, QuantizedRegion>(
      response, [&](const geometry::Region& r) { return geometry::quantize_region(r, size); });
}

}  // namespace vtask::codec
