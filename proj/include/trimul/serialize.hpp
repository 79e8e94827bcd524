// serialize.hpp
//
// JSON/CSV emission with atomic writes and content digests, the
// experiment configuration surface, and the run manifest.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trimul/bounds.hpp"
#include "trimul/coeffs.hpp"
#include "trimul/necessity.hpp"
#include "trimul/partition.hpp"

namespace trimul {

using ordered_json = nlohmann::ordered_json;

// --- serialization to JSON values ---

ordered_json to_json(const WaveletSystem& sys);
ordered_json to_json(const PartitionTree& tree);
ordered_json to_json(const SweepReport& r);
ordered_json to_json(const GrowthReport& r);
ordered_json to_json(const BoundaryReport& r);

// One JSON-lines record per coefficient: {"j":..,"G":"MFF..","n":[..],"b":..}.
std::string coeff_tensor_jsonl(const CoeffTensor& c);
CoeffTensor coeff_tensor_from_jsonl(const std::string& text, int d);

// CSV with header x,re,im,abs; floats at 17 significant digits.
std::string output_field_csv(const OutputField& f);
// CSV with header N,A_N,B_N,ci_half_width.
std::string growth_csv(const GrowthReport& r);

// --- files ---

// Writes via temp file + rename; returns the FNV-1a 64 digest (hex) of
// the bytes written. Throws io_error on filesystem failure.
std::string atomic_write(const std::filesystem::path& path,
                         const std::string& content);
std::string digest_hex(const std::string& content);

// --- experiment configuration and dispatch ---

struct ExperimentConfig {
  std::string kind;            // analyze|partition|bound-sweep|necessity|boundary
  int d = 1;
  double q = 2.0;
  int j_max = 4;
  int grid = 64;
  int family_order = 2;
  std::uint64_t seed = 1;
  int trials = 8;
  long long L_max = 1000000;
  std::string multiplier = "gaussian";  // analyze: zero|gaussian|sine-poly
  int partition_size = 1000;
  std::string out_dir = "out";
};

// Parses the config file (JSON object; unknown keys rejected), then
// applies explicit flag overrides. Throws std::invalid_argument with a
// field diagnostic on bad input.
ExperimentConfig load_config(const std::optional<std::string>& config_path,
                             const std::string& kind);

struct RunManifest {
  ordered_json config_echo;
  std::string version_tag;
  double wall_ms = 0.0;
  std::vector<std::pair<std::string, double>> stage_ms;
  std::vector<std::pair<std::string, std::string>> file_digests;
};

ordered_json to_json(const RunManifest& m);

// Dispatches one experiment, writing outputs then manifest.json into
// config.out_dir (atomically, manifest last). Returns the manifest.
RunManifest run_experiment(const ExperimentConfig& config);

// Closed-form sanity checks; prints one line each to out, returns the
// number of failures.
int run_selftest(std::ostream& out);

}  // namespace trimul
