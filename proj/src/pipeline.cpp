#include "vtask/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vtask/error.hpp"

namespace vtask::pipeline {

using io::Json;

namespace {

constexpr std::size_t kBatchLines = 4096;

struct Line {
  std::size_t number = 0;
  std::string text;
};

// Reads up to kBatchLines non-blank lines.
std::vector<Line> read_batch(std::istream& in, std::size_t& line_no) {
  std::vector<Line> batch;
  std::string text;
  while (batch.size() < kBatchLines && std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    batch.push_back({line_no, std::move(text)});
  }
  return batch;
}

// Calls fn(shard, begin, end) on `jobs` contiguous shards of [0, n).
template <class Fn>
void parallel_shards(std::size_t n, std::size_t jobs, Fn&& fn) {
  const std::size_t shards = std::max<std::size_t>(1, std::min(jobs, n));
  if (shards == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(shards);
  for (std::size_t s = 0; s < shards; ++s) {
    const std::size_t begin = n * s / shards;
    const std::size_t end = n * (s + 1) / shards;
    workers.emplace_back([&fn, s, begin, end] { fn(s, begin, end); });
  }
  for (auto& w : workers) w.join();
}

template <class Result, class Fn>
std::vector<Result> parallel_map(const std::vector<Line>& lines, std::size_t jobs, Fn&& fn) {
  std::vector<Result> out(lines.size());
  parallel_shards(lines.size(), jobs, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = fn(lines[i]);
  });
  return out;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

// Per-record outcome of a line-oriented command.
struct Outcome {
  std::optional<std::string> output;
  std::optional<std::string> error;
  std::optional<std::string> error_id;
  data::DropCounts drops;
  bool fatal = false;
};

// A record needs a parse sidecar that was not supplied. Ends the run as a
// configuration error whatever the strictness.
struct MissingSidecar : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class Fn>
Outcome guarded(Fn&& fn) {
  Outcome o;
  try {
    o.output = fn(o);
  } catch (const MissingSidecar& e) {
    o.error = e.what();
    o.fatal = true;
  } catch (const Error& e) {
    o.error = e.what();
  } catch (const Json::exception& e) {
    o.error = e.what();
  }
  return o;
}

void report(std::ostream& err, std::size_t line_no, const std::string& msg) {
  err << "line " << line_no << ": " << msg << '\n';
}

struct Tally {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t skipped = 0;
  std::size_t errors = 0;
  data::DropCounts drops;

  Json to_json() const {
    Json j{{"records_in", in},
           {"records_out", out},
           {"records_skipped", skipped},
           {"records_dropped", 0}};
    if (!drops.empty()) j["drops"] = drops;
    return j;
  }
};

// Drives a line-oriented command. `process` maps a line to an Outcome; error
// records are written when `error_records` is set and the run is lenient.
template <class Process>
int run_lines(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
              bool default_strict, bool error_records, Process&& process, Json* summary) {
  const bool strict = cfg.strict.value_or(default_strict);
  Tally tally;
  std::size_t line_no = 0;
  int code = kExitOk;
  while (code == kExitOk) {
    const std::vector<Line> batch = read_batch(in, line_no);
    if (batch.empty()) break;
    const auto outcomes = parallel_map<Outcome>(batch, cfg.jobs, [&](const Line& l) {
      return guarded([&](Outcome& o) { return process(l, o); });
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Outcome& o = outcomes[i];
      ++tally.in;
      if (o.error) {
        report(err, batch[i].number, *o.error);
        ++tally.errors;
        if (o.fatal) {
          code = kExitConfig;
          break;
        }
        if (strict) {
          code = kExitInput;
          break;
        }
        ++tally.skipped;
        if (error_records) {
          Json rec{{"line", batch[i].number}, {"error", *o.error}};
          if (o.error_id) rec["id"] = *o.error_id;
          out << rec.dump() << '\n';
        }
        continue;
      }
      for (const auto& [k, v] : o.drops) tally.drops[k] += v;
      out << *o.output << '\n';
      ++tally.out;
    }
  }
  out.flush();
  if (summary != nullptr) *summary = tally.to_json();
  return code;
}

data::AnnotatedImage filter_one(const data::AnnotatedImage& img, const PipelineConfig& cfg,
                                const io::SentenceIndex* sidecar, data::DropCounts* drops) {
  if (sidecar == nullptr && cfg.filter.filter_texts) {
    for (const auto& t : img.texts) {
      if (!t.parse && !t.parse_ref.empty()) {
        throw MissingSidecar("record " + img.id + " uses parse_ref but no --conllu sidecar was given");
      }
    }
  }
  return data::filter_image(img, cfg.filter, drops);
}

}  // namespace

int run_encode(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
               Json* summary) {
  return run_lines(
      in, out, err, cfg, /*default_strict=*/true, /*error_records=*/false,
      [&](const Line& l, Outcome&) {
        const io::TaskRecord rec = io::task_record_from_json(parse_json(l.text), cfg.task);
        return io::to_json(io::encode_record(rec)).dump();
      },
      summary);
}

int run_decode(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
               Json* summary) {
  return run_lines(
      in, out, err, cfg, /*default_strict=*/true, /*error_records=*/true,
      [&](const Line& l, Outcome& o) {
        const Json j = parse_json(l.text);
        if (j.is_object() && j.contains("id") && j["id"].is_string()) {
          o.error_id = j["id"].get<std::string>();
        }
        const io::EncodedRecord rec = io::encoded_record_from_json(j);
        if (cfg.task && rec.task != *cfg.task) {
          throw SchemaError("record " + rec.id + " has task " + std::string(codec::task_name(rec.task)));
        }
        return io::to_json(io::decode_record(rec)).dump();
      },
      summary);
}

int run_filter(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
               const io::SentenceIndex* sidecar, Json* summary) {
  return run_lines(
      in, out, err, cfg, /*default_strict=*/false, /*error_records=*/false,
      [&](const Line& l, Outcome& o) {
        const auto img = io::image_from_json(parse_json(l.text), sidecar, cfg.schema_version);
        return io::to_json(filter_one(img, cfg, sidecar, &o.drops)).dump();
      },
      summary);
}

int run_refine(std::istream& original, std::istream& refined, std::ostream& out, std::ostream& err,
               const PipelineConfig& cfg, const io::SentenceIndex* sidecar, Json* summary) {
  const bool strict = cfg.strict.value_or(false);

  struct Loaded {
    std::vector<data::AnnotatedImage> records;
    std::size_t lines = 0;
    std::size_t skipped = 0;
  };
  // Reads a whole file; returns false on a fatal error.
  auto load = [&](std::istream& in, const char* name, Loaded& loaded) {
    std::size_t line_no = 0;
    std::set<std::string> ids;
    while (true) {
      const auto batch = read_batch(in, line_no);
      if (batch.empty()) return true;
      for (const Line& l : batch) {
        ++loaded.lines;
        try {
          auto img = io::image_from_json(parse_json(l.text), sidecar, cfg.schema_version);
          if (!ids.insert(img.id).second) {
            err << name << " line " << l.number << ": duplicate id " << img.id << '\n';
            return false;
          }
          loaded.records.push_back(std::move(img));
        } catch (const Error& e) {
          err << name << " line " << l.number << ": " << e.what() << '\n';
          if (strict) return false;
          ++loaded.skipped;
        }
      }
    }
  };

  Loaded orig;
  Loaded ref;
  if (!load(original, "original", orig) || !load(refined, "refined", ref)) {
    if (summary) *summary = Json{{"error", "input error"}};
    return kExitInput;
  }

  std::map<std::string, const data::AnnotatedImage*> by_id;
  for (const auto& r : ref.records) by_id[r.id] = &r;
  std::set<std::string> matched;
  for (const auto& o : orig.records) {
    if (by_id.contains(o.id)) matched.insert(o.id);
  }
  Json unmatched = Json::array();
  for (const auto& r : ref.records) {
    if (!matched.contains(r.id)) {
      err << "refined record " << r.id << " has no original\n";
      unmatched.push_back(r.id);
    }
  }

  struct Merged {
    std::optional<std::string> line;
    std::optional<std::string> error;
    bool fatal = false;
    data::DropCounts drops;
  };
  std::vector<Merged> results(orig.records.size());
  parallel_shards(orig.records.size(), cfg.jobs, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& o = orig.records[i];
      try {
        auto it = by_id.find(o.id);
        const data::AnnotatedImage merged =
            it != by_id.end() ? data::merge_annotations(o, *it->second, cfg.filter) : o;
        results[i].line = io::to_json(filter_one(merged, cfg, sidecar, &results[i].drops)).dump();
      } catch (const MissingSidecar& e) {
        results[i].error = e.what();
        results[i].fatal = true;
      } catch (const Error& e) {
        results[i].error = e.what();
      }
    }
  });

  Tally tally;
  tally.in = orig.lines;
  tally.skipped = orig.skipped;
  int code = kExitOk;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].error) {
      err << "record " << orig.records[i].id << ": " << *results[i].error << '\n';
      if (results[i].fatal) {
        code = kExitConfig;
        break;
      }
      if (strict) {
        code = kExitInput;
        break;
      }
      ++tally.skipped;
      continue;
    }
    for (const auto& [k, v] : results[i].drops) tally.drops[k] += v;
    out << *results[i].line << '\n';
    ++tally.out;
  }
  out.flush();
  if (summary) {
    *summary = tally.to_json();
    (*summary)["refined_records"] = ref.records.size();
    (*summary)["refined_skipped"] = ref.skipped;
    (*summary)["merged_records"] = matched.size();
    (*summary)["unmatched_refined"] = std::move(unmatched);
  }
  return code;
}

int run_stats(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
              const io::SentenceIndex* sidecar, stats::CorpusAccumulator* result) {
  const bool strict = cfg.strict.value_or(false);
  stats::CorpusAccumulator total(cfg.heatmap_resolution);
  std::size_t line_no = 0;
  while (true) {
    const std::vector<Line> batch = read_batch(in, line_no);
    if (batch.empty()) break;

    const std::size_t shards = std::max<std::size_t>(1, std::min(cfg.jobs, batch.size()));
    std::vector<stats::CorpusAccumulator> partial(shards, stats::CorpusAccumulator(cfg.heatmap_resolution));
    std::vector<std::vector<std::pair<std::size_t, std::string>>> errors(shards);
    parallel_shards(batch.size(), shards, [&](std::size_t s, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        try {
          partial[s].add(io::image_from_json(parse_json(batch[i].text), sidecar, cfg.schema_version));
        } catch (const Error& e) {
          errors[s].emplace_back(batch[i].number, e.what());
          partial[s].skip_record();
        }
      }
    });
    for (std::size_t s = 0; s < shards; ++s) {
      for (const auto& [n, msg] : errors[s]) {
        report(err, n, msg);
        if (strict) return kExitInput;
      }
      total.merge(partial[s]);
    }
  }
  out << total.to_json().dump(2) << '\n';
  out.flush();
  if (result != nullptr) *result = std::move(total);
  return kExitOk;
}

int run_validate(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
                 const io::SentenceIndex* sidecar) {
  std::size_t line_no = 0;
  std::size_t records = 0;
  std::size_t invalid = 0;
  while (true) {
    const std::vector<Line> batch = read_batch(in, line_no);
    if (batch.empty()) break;
    const auto outcomes = parallel_map<Outcome>(batch, cfg.jobs, [&](const Line& l) {
      return guarded([&](Outcome&) {
        io::image_from_json(parse_json(l.text), sidecar, cfg.schema_version);
        return std::string();
      });
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      ++records;
      if (outcomes[i].error) {
        ++invalid;
        report(err, batch[i].number, *outcomes[i].error);
        if (cfg.strict.value_or(false)) break;
      }
    }
  }
  out << Json{{"records", records}, {"valid", records - invalid}, {"invalid", invalid}}.dump() << '\n';
  return invalid == 0 ? kExitOk : kExitInput;
}

namespace {

struct InputFile {
  std::ifstream file;
  std::istream* stream = nullptr;
};

bool open_input(const std::string& path, InputFile& f, std::ostream& err) {
  if (path == "-") {
    f.stream = &std::cin;
    return true;
  }
  f.file.open(path);
  if (!f.file) {
    err << "cannot open input " << path << '\n';
    return false;
  }
  f.stream = &f.file;
  return true;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << content;
}

}  // namespace

int run_command(const std::string& command, const PipelineConfig& cfg, std::ostream& err) {
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::optional<io::SentenceIndex> sidecar;
  if (!cfg.conllu.empty()) {
    std::ifstream f(cfg.conllu);
    if (!f) {
      err << "cannot open CoNLL-U sidecar " << cfg.conllu << '\n';
      return kExitInput;
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    try {
      sidecar = io::index_sentences(buf.str());
    } catch (const Error& e) {
      err << cfg.conllu << ": " << e.what() << '\n';
      return kExitInput;
    }
  }
  const io::SentenceIndex* side = sidecar ? &*sidecar : nullptr;

  InputFile input;
  if (!open_input(cfg.input, input, err)) return kExitInput;
  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (cfg.output != "-") {
    out_file.open(cfg.output);
    if (!out_file) {
      err << "cannot open output " << cfg.output << '\n';
      return kExitInput;
    }
    out = &out_file;
  }

  Json summary;
  int code = kExitOk;
  try {
    if (command == "encode") {
      code = run_encode(*input.stream, *out, err, cfg, &summary);
    } else if (command == "decode") {
      code = run_decode(*input.stream, *out, err, cfg, &summary);
    } else if (command == "filter") {
      code = run_filter(*input.stream, *out, err, cfg, side, &summary);
    } else if (command == "refine") {
      InputFile refined;
      if (!open_input(cfg.refined, refined, err)) return kExitInput;
      code = run_refine(*input.stream, *refined.stream, *out, err, cfg, side, &summary);
    } else if (command == "stats") {
      stats::CorpusAccumulator acc(cfg.heatmap_resolution);
      code = run_stats(*input.stream, *out, err, cfg, side, &acc);
      if (code == kExitOk && !cfg.csv_dir.empty()) {
        const std::filesystem::path dir(cfg.csv_dir);
        std::filesystem::create_directories(dir);
        for (auto [source, name] : {std::pair{stats::BoxSource::RegionText, "region_text"},
                                    std::pair{stats::BoxSource::Triplets, "text_phrase_region"}}) {
          const auto& s = acc.spatial(source).finish();
          write_file(dir / (std::string("area_") + name + ".csv"), stats::histogram_csv(s.area));
          write_file(dir / (std::string("aspect_") + name + ".csv"), stats::histogram_csv(s.aspect));
          write_file(dir / (std::string("heatmap_") + name + ".csv"), stats::heatmap_csv(s.heatmap));
        }
      }
      return code;
    } else if (command == "validate") {
      return run_validate(*input.stream, *out, err, cfg, side);
    } else {
      err << "unknown command " << command << '\n';
      return kExitConfig;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  if (!summary.is_null()) {
    if (cfg.summary.empty()) {
      err << summary.dump() << '\n';
    } else {
      try {
        write_file(cfg.summary, summary.dump(2) + "\n");
      } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return kExitInput;
      }
    }
  }
  return code;
}

}  // namespace vtask::pipeline
