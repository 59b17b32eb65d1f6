#include "vtask/record_io.hpp"

#include <type_traits>

#include "vtask/error.hpp"

namespace vtask::io {

using geometry::BBox;
using geometry::ImageSize;
using geometry::Point;

namespace {

[[noreturn]] void fail(const std::string& what) { throw SchemaError(what); }

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where + " must be an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where + " is missing \"" + key + "\"");
  return *it;
}

const Json* optional_field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string get_string(const Json& j, const std::string& where) {
  if (!j.is_string()) fail(where + " must be a string");
  return j.get<std::string>();
}

double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where + " must be a number");
  return j.get<double>();
}

std::size_t get_index(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    fail(where + " must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

const Json& get_array(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where + " must be an array");
  return j;
}

std::vector<double> get_coords(const Json& j, const std::string& where) {
  std::vector<double> out;
  for (const auto& v : get_array(j, where)) out.push_back(get_number(v, where + " coordinate"));
  return out;
}

std::vector<Point> to_points(const std::vector<double>& c) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i + 1 < c.size(); i += 2) pts.push_back({c[i], c[i + 1]});
  return pts;
}

BBox box_from(const Json& j, const std::string& where) {
  const auto c = get_coords(j, where);
  if (c.size() != 4) fail(where + " box needs 4 coordinates, got " + std::to_string(c.size()));
  return {c[0], c[1], c[2], c[3]};
}

geometry::QuadBox quad_from(const std::vector<double>& c) {
  geometry::QuadBox q;
  for (std::size_t i = 0; i < 4; ++i) q.vertices[i] = {c[2 * i], c[2 * i + 1]};
  return q;
}

geometry::Polygon polygon_from(const Json& j, const std::string& where) {
  const auto c = get_coords(j, where);
  if (c.size() < 6 || c.size() % 2 != 0) {
    fail(where + " polygon needs an even number of at least 6 coordinates");
  }
  return {to_points(c)};
}

Json coords(const BBox& b) { return Json::array({b.x0, b.y0, b.x1, b.y1}); }

template <class Pts>
Json coords_of(const Pts& pts) {
  Json out = Json::array();
  for (const auto& p : pts) {
    out.push_back(p.x);
    out.push_back(p.y);
  }
  return out;
}

Json coords(const geometry::Region& r) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BBox>) {
          return coords(v);
        } else {
          return coords_of(v.vertices);
        }
      },
      r);
}

ImageSize size_from(const Json& j, const std::string& where) {
  const Json& s = field(j, "size", where);
  ImageSize size{get_number(field(s, "width", where + ".size"), where + ".size.width"),
                 get_number(field(s, "height", where + ".size.height"), where + ".size.height")};
  try {
    geometry::validate(size);
  } catch (const DomainError& e) {
    fail(where + ": " + e.what());
  }
  return size;
}

Json size_json(const ImageSize& s) { return {{"width", s.width}, {"height", s.height}}; }

std::vector<linguistics::ParsedSentence> parse_block(const std::string& conllu,
                                                     const std::string& where) {
  try {
    return linguistics::parse_conllu(conllu);
  } catch (const ConlluError& e) {
    fail(where + " parse: " + e.what());
  }
}

}  // namespace

SentenceIndex index_sentences(std::string_view conllu) {
  SentenceIndex index;
  for (auto& s : linguistics::parse_conllu(conllu)) {
    if (s.id.empty()) fail("sidecar sentence without a \"# sent_id\" comment");
    const std::string id = s.id;
    if (!index.emplace(id, std::move(s)).second) fail("duplicate sentence id " + id);
  }
  return index;
}

data::AnnotatedImage image_from_json(const Json& j, const SentenceIndex* sidecar,
                                     int schema_version) {
  using namespace data;
  if (!j.is_object()) fail("record must be a JSON object");
  const Json& version = field(j, "fld_schema", "record");
  if (!version.is_number_integer() || version.get<long long>() != schema_version) {
    fail("record has fld_schema " + version.dump() + ", expected " +
         std::to_string(schema_version));
  }

  AnnotatedImage img;
  img.id = get_string(field(j, "id", "record"), "id");
  const std::string rec = "record " + img.id;
  img.size = size_from(j, rec);

  if (const Json* texts = optional_field(j, "texts")) {
    for (const auto& t : get_array(*texts, rec + " texts")) {
      const std::string where = rec + " texts[" + std::to_string(img.texts.size()) + "]";
      TextAnnotation a;
      const std::string g = get_string(field(t, "granularity", where), where + ".granularity");
      const auto gran = granularity_from(g);
      if (!gran) fail(where + " has unknown granularity \"" + g + "\"");
      a.granularity = *gran;
      a.text = get_string(field(t, "text", where), where + ".text");
      if (const Json* src = optional_field(t, "source")) {
        const std::string s = get_string(*src, where + ".source");
        const auto source = source_from(s);
        if (!source) fail(where + " has unknown source \"" + s + "\"");
        a.source = *source;
      }
      if (const Json* p = optional_field(t, "parse")) {
        a.parse = parse_block(get_string(*p, where + ".parse"), where);
      }
      if (const Json* refs = optional_field(t, "parse_ref")) {
        if (a.parse) fail(where + " has both parse and parse_ref");
        for (const auto& r : get_array(*refs, where + ".parse_ref")) {
          a.parse_ref.push_back(get_string(r, where + ".parse_ref"));
        }
        if (sidecar != nullptr) {
          std::vector<linguistics::ParsedSentence> sentences;
          for (const auto& id : a.parse_ref) {
            auto it = sidecar->find(id);
            if (it == sidecar->end()) fail(where + " references unknown sentence " + id);
            sentences.push_back(it->second);
          }
          a.parse = std::move(sentences);
        }
      }
      img.texts.push_back(std::move(a));
    }
  }

  if (const Json* pairs = optional_field(j, "region_texts")) {
    for (const auto& p : get_array(*pairs, rec + " region_texts")) {
      const std::string where = rec + " region_texts[" + std::to_string(img.region_texts.size()) + "]";
      RegionTextPair pair;
      const auto c = get_coords(field(p, "region", where), where + ".region");
      if (c.size() == 4) {
        pair.region = BBox{c[0], c[1], c[2], c[3]};
      } else if (c.size() == 8) {
        pair.region = quad_from(c);
      } else {
        fail(where + " region needs 4 (box) or 8 (quad) coordinates, got " + std::to_string(c.size()));
      }
      for (const auto& t : get_array(field(p, "texts", where), where + ".texts")) {
        CandidateText cand;
        cand.text = get_string(field(t, "text", where), where + " text");
        const std::string r = get_string(field(t, "role", where), where + " role");
        const auto role = role_from(r);
        if (!role) fail(where + " has unknown role \"" + r + "\"");
        cand.role = *role;
        pair.texts.push_back(std::move(cand));
      }
      if (const Json* sel = optional_field(p, "selected")) pair.selected = get_index(*sel, where + ".selected");
      pair.confidence = get_number(field(p, "confidence", where), where + ".confidence");
      img.region_texts.push_back(std::move(pair));
    }
  }

  if (const Json* trips = optional_field(j, "triplets")) {
    for (const auto& t : get_array(*trips, rec + " triplets")) {
      const std::string where = rec + " triplets[" + std::to_string(img.triplets.size()) + "]";
      PhraseRegionTriplet trip;
      trip.text_ref = get_index(field(t, "text_ref", where), where + ".text_ref");
      const Json& ph = field(t, "phrase", where);
      trip.phrase.start = get_index(field(ph, "start", where + ".phrase"), where + ".phrase.start");
      trip.phrase.end = get_index(field(ph, "end", where + ".phrase"), where + ".phrase.end");
      trip.phrase.text = get_string(field(ph, "text", where + ".phrase"), where + ".phrase.text");
      trip.phrase_confidence =
          get_number(field(t, "phrase_confidence", where), where + ".phrase_confidence");
      for (const auto& g : get_array(field(t, "regions", where), where + ".regions")) {
        GroundedBox gb;
        gb.box = box_from(field(g, "box", where), where);
        gb.confidence = get_number(field(g, "confidence", where), where + " box confidence");
        if (const Json* m = optional_field(g, "mask")) gb.mask = polygon_from(*m, where + " mask");
        trip.regions.push_back(std::move(gb));
      }
      img.triplets.push_back(std::move(trip));
    }
  }

  validate(img);
  return img;
}

Json to_json(const data::AnnotatedImage& img) {
  using namespace data;
  Json j;
  j["fld_schema"] = kSchemaVersion;
  j["id"] = img.id;
  j["size"] = size_json(img.size);

  Json texts = Json::array();
  for (const auto& t : img.texts) {
    Json a{{"granularity", to_string(t.granularity)},
           {"text", t.text},
           {"source", to_string(t.source)}};
    if (!t.parse_ref.empty()) {
      a["parse_ref"] = t.parse_ref;
    } else if (t.parse) {
      a["parse"] = linguistics::render_conllu(*t.parse);
    }
    texts.push_back(std::move(a));
  }
  j["texts"] = std::move(texts);

  Json pairs = Json::array();
  for (const auto& p : img.region_texts) {
    Json cands = Json::array();
    for (const auto& c : p.texts) cands.push_back({{"text", c.text}, {"role", to_string(c.role)}});
    Json pj{{"region", std::visit([](const auto& r) { return coords(geometry::Region(r)); }, p.region)},
            {"texts", std::move(cands)},
            {"confidence", p.confidence}};
    if (p.selected) pj["selected"] = *p.selected;
    pairs.push_back(std::move(pj));
  }
  j["region_texts"] = std::move(pairs);

  Json trips = Json::array();
  for (const auto& t : img.triplets) {
    Json regions = Json::array();
    for (const auto& g : t.regions) {
      Json gj{{"box", coords(g.box)}, {"confidence", g.confidence}};
      if (g.mask) gj["mask"] = coords_of(g.mask->vertices);
      regions.push_back(std::move(gj));
    }
    trips.push_back({{"text_ref", t.text_ref},
                     {"phrase", {{"start", t.phrase.start}, {"end", t.phrase.end}, {"text", t.phrase.text}}},
                     {"phrase_confidence", t.phrase_confidence},
                     {"regions", std::move(regions)}});
  }
  j["triplets"] = std::move(trips);
  return j;
}

namespace {

codec::Task task_from(const Json& j, std::optional<codec::Task> default_task, const std::string& where) {
  const Json* t = optional_field(j, "task");
  if (t == nullptr) {
    if (!default_task) fail(where + " is missing \"task\"");
    return *default_task;
  }
  const std::string name = get_string(*t, where + ".task");
  const auto task = codec::task_from_name(name);
  if (!task) fail(where + " has unknown task \"" + name + "\"");
  if (default_task && *task != *default_task) {
    fail(where + " has task " + name + " but " + std::string(codec::task_name(*default_task)) +
         " was requested");
  }
  return *task;
}

geometry::Region region_from(const Json& j, geometry::RegionKind kind, const std::string& where) {
  switch (kind) {
    case geometry::RegionKind::Box:
      return box_from(j, where);
    case geometry::RegionKind::Quad: {
      const auto c = get_coords(j, where);
      if (c.size() != 8) fail(where + " quad needs 8 coordinates, got " + std::to_string(c.size()));
      return quad_from(c);
    }
    case geometry::RegionKind::Polygon:
      return polygon_from(j, where);
  }
  fail(where + " has an unknown region kind");
}

}  // namespace

TaskRecord task_record_from_json(const Json& j, std::optional<codec::Task> default_task) {
  using namespace codec;
  if (!j.is_object()) fail("record must be a JSON object");
  TaskRecord rec;
  rec.id = get_string(field(j, "id", "record"), "id");
  const std::string where = "record " + rec.id;
  rec.task = task_from(j, default_task, where);
  rec.size = size_from(j, where);

  if (const Json* p = optional_field(j, "prompt")) {
    if (!p->is_object()) fail(where + ".prompt must be an object");
    if (const Json* t = optional_field(*p, "text")) rec.prompt_text = get_string(*t, where + ".prompt.text");
    if (const Json* r = optional_field(*p, "region")) rec.prompt_region = box_from(*r, where + ".prompt.region");
  }

  const Json& r = field(j, "response", where);
  const std::string rw = where + ".response";
  const auto kind = response_region_kind(rec.task);
  switch (response_shape(rec.task)) {
    case ResponseShape::Text:
      rec.response = TextResponse{get_string(field(r, "text", rw), rw + ".text")};
      break;
    case ResponseShape::Regions: {
      RegionsResponse<geometry::Region> out;
      for (const auto& reg : get_array(field(r, "regions", rw), rw + ".regions")) {
        out.regions.push_back(region_from(reg, *kind, rw));
      }
      rec.response = std::move(out);
      break;
    }
    case ResponseShape::LabeledRegions: {
      LabeledRegionsResponse<geometry::Region> out;
      for (const auto& item : get_array(field(r, "items", rw), rw + ".items")) {
        out.items.push_back({get_string(field(item, "label", rw), rw + " label"),
                             region_from(field(item, "region", rw), *kind, rw)});
      }
      rec.response = std::move(out);
      break;
    }
    case ResponseShape::GroundedText: {
      GroundedTextResponse<geometry::Region> out;
      for (const auto& ph : get_array(field(r, "phrases", rw), rw + ".phrases")) {
        GroundedPhrase<geometry::Region> g{get_string(field(ph, "phrase", rw), rw + " phrase"), {}};
        for (const auto& reg : get_array(field(ph, "regions", rw), rw + " regions")) {
          g.regions.push_back(region_from(reg, *kind, rw));
        }
        out.phrases.push_back(std::move(g));
      }
      rec.response = std::move(out);
      break;
    }
    case ResponseShape::Mask:
      rec.response = MaskResponse<geometry::Region>{region_from(field(r, "polygon", rw), *kind, rw)};
      break;
  }
  return rec;
}

Json to_json(const TaskRecord& rec) {
  using namespace codec;
  Json j{{"id", rec.id}, {"task", std::string(task_name(rec.task))}, {"size", size_json(rec.size)}};
  if (rec.prompt_text || rec.prompt_region) {
    Json p = Json::object();
    if (rec.prompt_text) p["text"] = *rec.prompt_text;
    if (rec.prompt_region) p["region"] = coords(*rec.prompt_region);
    j["prompt"] = std::move(p);
  }
  j["response"] = std::visit(
      [](const auto& r) -> Json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, TextResponse>) {
          return {{"text", r.text}};
        } else if constexpr (std::is_same_v<T, RegionsResponse<geometry::Region>>) {
          Json regions = Json::array();
          for (const auto& reg : r.regions) regions.push_back(coords(reg));
          return {{"regions", std::move(regions)}};
        } else if constexpr (std::is_same_v<T, LabeledRegionsResponse<geometry::Region>>) {
          Json items = Json::array();
          for (const auto& item : r.items) {
            items.push_back({{"label", item.label}, {"region", coords(item.region)}});
          }
          return {{"items", std::move(items)}};
        } else if constexpr (std::is_same_v<T, GroundedTextResponse<geometry::Region>>) {
          Json phrases = Json::array();
          for (const auto& ph : r.phrases) {
            Json regions = Json::array();
            for (const auto& reg : ph.regions) regions.push_back(coords(reg));
            phrases.push_back({{"phrase", ph.phrase}, {"regions", std::move(regions)}});
          }
          return {{"phrases", std::move(phrases)}};
        } else {
          return {{"polygon", coords(r.polygon)}};
        }
      },
      rec.response);
  return j;
}

EncodedRecord encoded_record_from_json(const Json& j) {
  if (!j.is_object()) fail("record must be a JSON object");
  EncodedRecord rec;
  rec.id = get_string(field(j, "id", "record"), "id");
  const std::string where = "record " + rec.id;
  rec.task = task_from(j, std::nullopt, where);
  rec.size = size_from(j, where);
  rec.prompt = get_string(field(j, "prompt", where), where + ".prompt");
  rec.response = get_string(field(j, "response", where), where + ".response");
  return rec;
}

Json to_json(const EncodedRecord& rec) {
  return {{"id", rec.id},
          {"task", std::string(codec::task_name(rec.task))},
          {"size", size_json(rec.size)},
          {"prompt", rec.prompt},
          {"response", rec.response}};
}

EncodedRecord encode_record(const TaskRecord& rec) {
  codec::TaskPrompt prompt{rec.task, rec.prompt_text, std::nullopt};
  if (rec.prompt_region) prompt.region = geometry::quantize_region(*rec.prompt_region, rec.size);
  const codec::TaskResponse response = codec::quantize_response(rec.response, rec.size);
  return {rec.id, rec.task, rec.size, codec::render_prompt(prompt),
          codec::render(codec::serialize_response(response, rec.task))};
}

TaskRecord decode_record(const EncodedRecord& rec) {
  const codec::TaskPrompt prompt = codec::parse_prompt(rec.task, rec.prompt);
  const codec::TaskResponse response = codec::parse_response(codec::lex(rec.response), rec.task);
  TaskRecord out;
  out.id = rec.id;
  out.task = rec.task;
  out.size = rec.size;
  out.prompt_text = prompt.text;
  if (prompt.region) {
    out.prompt_region = std::get<BBox>(geometry::dequantize_region(*prompt.region, rec.size));
  }
  out.response = codec::decode_to_pixels(response, rec.size);
  return out;
}

}  // namespace vtask::io
