// fld: command-line front end for the vtask library.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "vtask/config.hpp"
#include "vtask/error.hpp"
#include "vtask/pipeline.hpp"

namespace {

using vtask::PipelineConfig;
namespace pipeline = vtask::pipeline;

// Raw flag values. Applied on top of the config file only when given.
struct Flags {
  std::string config;
  std::string input;
  std::string output;
  std::string refined;
  std::string conllu;
  std::string summary;
  std::string csv_dir;
  std::string task;
  std::size_t jobs = 1;
  std::size_t heatmap_resolution = 64;
  int schema_version = 1;
  std::string max_objects;
  double min_object_complexity = 0;
  double min_action_complexity = 0;
  double box_threshold = 0;
  double nms_threshold = 0;
  double phrase_threshold = 0;
  std::string blacklist;
};

struct Options {
  CLI::Option* input = nullptr;
  CLI::Option* output = nullptr;
  CLI::Option* jobs = nullptr;
  CLI::Option* strict = nullptr;
  CLI::Option* lenient = nullptr;
  CLI::Option* schema = nullptr;
  CLI::Option* task = nullptr;
  CLI::Option* refined = nullptr;
  CLI::Option* conllu = nullptr;
  CLI::Option* summary = nullptr;
  CLI::Option* csv_dir = nullptr;
  CLI::Option* heatmap = nullptr;
  CLI::Option* max_objects = nullptr;
  CLI::Option* min_obj = nullptr;
  CLI::Option* min_act = nullptr;
  CLI::Option* box = nullptr;
  CLI::Option* nms = nullptr;
  CLI::Option* phrase = nullptr;
  CLI::Option* blacklist = nullptr;
  CLI::Option* class_agnostic = nullptr;
  CLI::Option* no_text_filter = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

void add_shared(CLI::App* cmd, Flags& f, Options& o) {
  cmd->add_option("--config", f.config, "TOML-style configuration file");
  o.input = cmd->add_option("-i,--input", f.input, "input JSONL path, - for stdin");
  o.output = cmd->add_option("-o,--output", f.output, "output path, - for stdout");
  o.jobs = cmd->add_option("-j,--jobs", f.jobs, "worker threads");
  o.strict = cmd->add_flag("--strict", "stop at the first bad record");
  o.lenient = cmd->add_flag("--lenient", "skip bad records and continue");
  o.strict->excludes(o.lenient);
  o.schema = cmd->add_option("--schema-version", f.schema_version, "record schema version");
}

void add_sidecar(CLI::App* cmd, Flags& f, Options& o) {
  o.conllu = cmd->add_option("--conllu", f.conllu, "CoNLL-U sidecar resolving parse_ref");
}

void add_summary(CLI::App* cmd, Flags& f, Options& o) {
  o.summary = cmd->add_option("--summary", f.summary, "summary JSON path (default: stderr)");
}

void add_filter(CLI::App* cmd, Flags& f, Options& o) {
  o.max_objects = cmd->add_option("--max-objects", f.max_objects, "object cap per text, or inf");
  o.min_obj = cmd->add_option("--min-object-complexity", f.min_object_complexity);
  o.min_act = cmd->add_option("--min-action-complexity", f.min_action_complexity);
  o.box = cmd->add_option("--box-threshold", f.box_threshold, "region confidence threshold");
  o.nms = cmd->add_option("--nms-threshold", f.nms_threshold, "NMS IoU threshold");
  o.phrase = cmd->add_option("--phrase-threshold", f.phrase_threshold, "phrase confidence threshold");
  o.blacklist = cmd->add_option("--blacklist", f.blacklist, "comma-separated phrase blacklist");
  o.class_agnostic = cmd->add_flag("--class-agnostic", "NMS across all labels");
  o.no_text_filter = cmd->add_flag("--no-text-filter", "keep every text");
}

void apply_flags(const Flags& f, const Options& o, PipelineConfig& cfg) {
  if (given(o.input)) cfg.input = f.input;
  if (given(o.output)) cfg.output = f.output;
  if (given(o.jobs)) cfg.jobs = f.jobs;
  if (given(o.strict)) cfg.strict = true;
  if (given(o.lenient)) cfg.strict = false;
  if (given(o.schema)) cfg.schema_version = f.schema_version;
  if (given(o.refined)) cfg.refined = f.refined;
  if (given(o.conllu)) cfg.conllu = f.conllu;
  if (given(o.summary)) cfg.summary = f.summary;
  if (given(o.csv_dir)) cfg.csv_dir = f.csv_dir;
  if (given(o.heatmap)) cfg.heatmap_resolution = f.heatmap_resolution;
  if (given(o.task)) {
    const auto t = vtask::codec::task_from_name(f.task);
    if (!t) throw vtask::ConfigError("unknown task \"" + f.task + "\"");
    cfg.task = *t;
  }
  // Reuse the config-file parser so flag and file values share one syntax.
  std::string text;
  if (given(o.max_objects)) text += "max_objects = \"" + f.max_objects + "\"\n";
  if (given(o.blacklist)) text += "blacklist = " + f.blacklist + "\n";
  if (!text.empty()) vtask::apply_config_text(text, cfg);
  auto& filter = cfg.filter;
  if (given(o.min_obj)) filter.min_object_complexity = f.min_object_complexity;
  if (given(o.min_act)) filter.min_action_complexity = f.min_action_complexity;
  if (given(o.box)) filter.box_confidence_threshold = f.box_threshold;
  if (given(o.nms)) filter.nms_iou_threshold = f.nms_threshold;
  if (given(o.phrase)) filter.phrase_confidence_threshold = f.phrase_threshold;
  if (given(o.class_agnostic)) filter.class_aware_nms = false;
  if (given(o.no_text_filter)) filter.filter_texts = false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location-token codec and annotation data-engine tools"};
  app.require_subcommand(1);

  Flags f;
  Options o;

  auto* encode = app.add_subcommand("encode", "structured records to prompt/response token text");
  add_shared(encode, f, o);
  o.task = encode->add_option("--task", f.task, "expected task of every record");
  add_summary(encode, f, o);

  auto* decode = app.add_subcommand("decode", "token text back to structured records");
  add_shared(decode, f, o);
  decode->add_option("--task", f.task, "expected task of every record");
  add_summary(decode, f, o);

  auto* filter = app.add_subcommand("filter", "filter annotated-image records");
  add_shared(filter, f, o);
  add_sidecar(filter, f, o);
  add_summary(filter, f, o);
  add_filter(filter, f, o);

  auto* refine = app.add_subcommand("refine", "merge refined annotations into the originals");
  add_shared(refine, f, o);
  o.refined = refine->add_option("--refined", f.refined, "refined JSONL")->required();
  refine->add_option("--conllu", f.conllu, "CoNLL-U sidecar resolving parse_ref");
  refine->add_option("--summary", f.summary, "summary JSON path (default: stderr)");
  add_filter(refine, f, o);

  auto* stats = app.add_subcommand("stats", "corpus statistics");
  add_shared(stats, f, o);
  stats->add_option("--conllu", f.conllu, "CoNLL-U sidecar resolving parse_ref");
  o.csv_dir = stats->add_option("--csv-dir", f.csv_dir, "directory for histogram CSVs");
  o.heatmap = stats->add_option("--heatmap-resolution", f.heatmap_resolution, "heatmap grid size");

  auto* validate = app.add_subcommand("validate", "check records against the schema");
  add_shared(validate, f, o);
  validate->add_option("--conllu", f.conllu, "CoNLL-U sidecar resolving parse_ref");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pipeline::kExitConfig;
  }

  // Options registered on several subcommands: look them up on the one in use.
  CLI::App* cmd = app.get_subcommands().front();
  auto lookup = [cmd](const char* name) -> CLI::Option* {
    try {
      return cmd->get_option(name);
    } catch (const CLI::OptionNotFound&) {
      return nullptr;
    }
  };
  o.input = lookup("--input");
  o.output = lookup("--output");
  o.jobs = lookup("--jobs");
  o.strict = lookup("--strict");
  o.lenient = lookup("--lenient");
  o.schema = lookup("--schema-version");
  o.task = lookup("--task");
  o.refined = lookup("--refined");
  o.conllu = lookup("--conllu");
  o.summary = lookup("--summary");
  o.csv_dir = lookup("--csv-dir");
  o.heatmap = lookup("--heatmap-resolution");
  o.max_objects = lookup("--max-objects");
  o.min_obj = lookup("--min-object-complexity");
  o.min_act = lookup("--min-action-complexity");
  o.box = lookup("--box-threshold");
  o.nms = lookup("--nms-threshold");
  o.phrase = lookup("--phrase-threshold");
  o.blacklist = lookup("--blacklist");
  o.class_agnostic = lookup("--class-agnostic");
  o.no_text_filter = lookup("--no-text-filter");

  PipelineConfig cfg;
  try {
    if (!f.config.empty()) vtask::apply_config_file(f.config, cfg);
    apply_flags(f, o, cfg);
  } catch (const vtask::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return pipeline::kExitConfig;
  }
  return pipeline::run_command(cmd->get_name(), cfg, std::cerr);
}
