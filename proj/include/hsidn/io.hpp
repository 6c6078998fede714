#pragma once

#include <optional>
#include <string>

#include "hsidn/cube.hpp"
#include "hsidn/metrics.hpp"
#include "hsidn/noise.hpp"
#include "hsidn/solver.hpp"

namespace hsidn {

// HSR1 container layout (all little-endian):
//   bytes 0-3   magic "HSR1"
//   bytes 4-5   version u16, currently 1
//   byte  6     dtype u8, 1 = float64
//   bytes 7-18  dims, three u32: M, N, B
//   payload     M*N*B float64 in row-major (m, n, b) order, b innermost
HsiCube read_hsr(const std::string& path);
void write_hsr(const HsiCube& cube, const std::string& path);

/// One batch run: where to read, what to corrupt, how to solve, where to
/// write. Parsed strictly; unknown keys are errors.
struct RunConfig {
  std::string input;
  std::string output;
  std::optional<std::string> trace_out;
  std::optional<std::string> spec_out;
  std::optional<int> case_id;           // exactly one of case_id / noise
  std::optional<NoiseSpec> noise;
  std::optional<std::string> preset;    // preset overrides params when set
  SolverParams params;
  std::uint64_t seed = 0;
};

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& config, const std::string& path);

/// FNV-1a 64 over the canonical (sorted-key) JSON serialization.
std::string config_hash(const RunConfig& config);

/// Everything needed to reproduce one results-table row.
struct RunResult {
  std::string config_hash;
  std::optional<NoiseSpec> noise;
  std::optional<MetricsReport> metrics;
  double wall_seconds = 0.0;
  int iterations = 0;
};

void emit_results(const RunResult& result, const std::string& path);
RunResult load_results(const std::string& path);

void write_noise_spec(const NoiseSpec& spec, const std::string& path);
NoiseSpec read_noise_spec(const std::string& path);

void write_metrics(const MetricsReport& report, const std::string& path);

/// Trace CSV: header iter,res_grad1,res_grad2,res_fidelity,rho,psnr; values
/// at 10 significant digits, '.' decimal separator, '\n' line endings, psnr
/// blank without ground truth.
void write_trace_csv(const IterationTrace& trace, const std::string& path);
std::string trace_csv_string(const IterationTrace& trace);

// Strict JSON (de)serialization helpers shared with the CLI.
std::string noise_spec_json(const NoiseSpec& spec);
NoiseSpec noise_spec_from_json(const std::string& text);
std::string metrics_json(const MetricsReport& report);
SolverParams params_from_json_text(const std::string& text);

}  // namespace hsidn
