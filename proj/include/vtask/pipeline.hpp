#pragma once

#include <iosfwd>
#include <string>

#include "vtask/config.hpp"
#include "vtask/record_io.hpp"
#include "vtask/stats.hpp"

namespace vtask::pipeline {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitConfig = 2;

// Stream-level command implementations. Each reads JSONL from `in`, writes
// JSONL (or a JSON document) to `out` in input order and diagnostics to
// `err`, and returns an exit code. When `summary` is non-null it receives the
// run summary.

int run_encode(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
               io::Json* summary = nullptr);

int run_decode(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
               io::Json* summary = nullptr);

int run_filter(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
               const io::SentenceIndex* sidecar, io::Json* summary = nullptr);

int run_refine(std::istream& original, std::istream& refined, std::ostream& out, std::ostream& err,
               const PipelineConfig& cfg, const io::SentenceIndex* sidecar,
               io::Json* summary = nullptr);

/// Writes the stats JSON document to `out`; `result`, when given, receives the accumulator.
int run_stats(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
              const io::SentenceIndex* sidecar, stats::CorpusAccumulator* result = nullptr);

int run_validate(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& cfg,
                 const io::SentenceIndex* sidecar);

/// File-level entry point used by the command-line tool: opens the configured
/// paths ("-" = standard streams), loads the sidecar, dispatches and writes
/// summaries and CSV files.
int run_command(const std::string& command, const PipelineConfig& cfg, std::ostream& err);

}  // namespace vtask::pipeline
