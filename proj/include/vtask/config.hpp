#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "vtask/data_engine.hpp"
#include "vtask/record_io.hpp"
#include "vtask/task_codec.hpp"

namespace vtask {

struct PipelineConfig {
  data::FilterConfig filter;
  std::string input = "-";
  std::string output = "-";
  std::string refined;  // second input of `refine`
  std::string conllu;   // sidecar for parse_ref
  std::string summary;  // empty: summary goes to standard error
  std::string csv_dir;
  std::size_t jobs = 1;
  std::size_t heatmap_resolution = 64;
  std::optional<bool> strict;  // unset: the command's default
  int schema_version = io::kSchemaVersion;
  std::optional<codec::Task> task;
};

/// Throws ConfigError when a value is out of range.
void validate(const PipelineConfig& cfg);

/// Applies a flat "key = value" (TOML-style) file on top of `cfg`. Keys are the
/// config field names; [section] headers are ignored. Throws ConfigError.
void apply_config_text(std::string_view text, PipelineConfig& cfg);
void apply_config_file(const std::string& path, PipelineConfig& cfg);

/// Parses a comma-separated or bracketed list such as `["it", "this"]`.
std::set<std::string> parse_blacklist(std::string_view value);

}  // namespace vtask
