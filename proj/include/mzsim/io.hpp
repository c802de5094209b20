#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "mzsim/analysis.hpp"
#include "mzsim/experiment.hpp"

namespace mzsim {

inline constexpr std::string_view kSchemaVersion = "mzsim.output.v1";

/// Column header of the sweep table, in order.
inline constexpr std::string_view kCsvHeader = "delta,d1,d2,d1_fraction,ci_lo,ci_hi";
inline constexpr std::string_view kTraceCsvHeader = "delta,index,emitted_at,bs1,path,bs2";

enum class OutputFormat { Csv, Json };

std::optional<OutputFormat> parse_format(std::string_view name);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

// ---- configuration -------------------------------------------------------

/// JSON text of a config with every field spelled out.
std::string serialize_config(const ExperimentConfig& config);

/// Parses and validates config JSON. Missing keys take reference defaults; blank
/// text is the reference config. Throws ParseError on malformed JSON,
/// UnknownKeyError on an undefined key and ConfigError on a bad value.
ExperimentConfig parse_config(std::string_view text, std::string_view origin = "<config>");

/// parse_config on a file. Throws IoError if the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

// ---- results -------------------------------------------------------------

struct Provenance {
  std::uint64_t master_seed = 0;
  std::string child_seed_function;
  std::string build;
  std::string timestamp;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct OutputRecord {
  std::string schema_version{kSchemaVersion};
  std::string command;  // single-bs | mzi | sweep
  ExperimentConfig config;
  SweepResult results;  // one point for single-bs and mzi
  std::optional<SweepAnalysis> analysis;
  std::optional<QmComparison> qm_comparison;
  Provenance provenance;

  friend bool operator==(const OutputRecord&, const OutputRecord&) = default;
};

std::string build_identifier();
std::string utc_timestamp();

/// Record with provenance filled in for the current build and time, and the sweep
/// analysis attached.
OutputRecord make_record(std::string command, const ExperimentConfig& config, SweepResult results);

SweepResult as_sweep(const RunRecord& run);

std::string to_json(const OutputRecord& record);
OutputRecord parse_record_json(std::string_view text, std::string_view origin = "<json>");

/// Sweep table (kCsvHeader); intervals are 95% normal-approximation. The timestamp
/// never appears, so identical results give identical bytes.
std::string to_csv(const SweepResult& results);
std::string to_csv(const OutputRecord& record);
SweepResult parse_sweep_csv(std::string_view text, std::string_view origin = "<csv>");

/// Per-photon traces of every point that carries one (kTraceCsvHeader).
std::string trace_to_csv(const SweepResult& results);

/// Writes csv or json to `path`. Throws IoError naming the path on failure.
void emit_results(const OutputRecord& record, OutputFormat format, const std::filesystem::path& path);

/// A results file written by emit_results, either format (detected from content).
/// CSV input yields a record with only `results` populated.
OutputRecord load_results(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace mzsim
