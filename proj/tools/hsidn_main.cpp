// Batch front end: simulate -> denoise -> evaluate -> benchmark pipelines
// plus raw<->HSR1 conversion. Exit codes are uniform across verbs:
//   0 success, 2 flag/validation error, 3 I/O error,
//   4 non-finite solver state, 5 benchmark with no surviving row.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsidn/io.hpp"
#include "hsidn/metrics.hpp"
#include "hsidn/noise.hpp"
#include "hsidn/rng.hpp"
#include "hsidn/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFlags = 2;
constexpr int kExitIo = 3;
constexpr int kExitNonFinite = 4;
constexpr int kExitAllRowsFailed = 5;

struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void check_fraction_flag(double v, const char* flag) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw FlagError(std::string(flag) + " must lie in [0,1], got " +
                    std::to_string(v));
  }
}

// ---------------------------------------------------------------------- //
// simulate

struct SimulateArgs {
  std::string input, output, spec_out;
  int case_id = 0;
  double gaussian_var = 0.0, impulse = 0.0, deadline = 0.0;
  double affected_bands = 1.0 / 3.0;
  double stripe_offset = 0.0;
  std::uint64_t seed = 0;
  bool sigma_is_stddev = false;
  bool case_given = false;
  bool any_manual = false;
};

int run_simulate(const SimulateArgs& a) {
  hsidn::NoiseSpec spec;
  if (a.case_given) {
    if (a.any_manual) {
      throw FlagError("--case excludes the manual noise flags");
    }
    spec = hsidn::case_spec(a.case_id, a.seed);
  } else {
    check_fraction_flag(a.impulse, "--impulse");
    check_fraction_flag(a.deadline, "--deadline");
    check_fraction_flag(a.affected_bands, "--affected-bands");
    if (!(a.gaussian_var >= 0.0)) {
      throw FlagError("--gaussian-var must be nonnegative");
    }
    spec.gaussian_variance = a.gaussian_var;
    spec.impulse_fraction = a.impulse;
    spec.deadline_fraction = a.deadline;
    spec.affected_band_fraction = a.affected_bands;
    spec.seed = a.seed;
  }
  if (a.sigma_is_stddev) {
    // Reinterpret the Gaussian level as a standard deviation.
    spec.gaussian_variance = spec.gaussian_variance * spec.gaussian_variance;
  }

  const hsidn::HsiCube clean = hsidn::read_hsr(a.input);
  const hsidn::HsiCube noisy = hsidn::apply_spec(clean, spec, a.stripe_offset);
  hsidn::write_hsr(noisy, a.output);
  if (!a.spec_out.empty()) hsidn::write_noise_spec(spec, a.spec_out);
  return kExitOk;
}

// ---------------------------------------------------------------------- //
// denoise

struct DenoiseArgs {
  std::string input, output, trace_out, truth, components_prefix, results_out;
  std::string preset, variant = "full";
  double r = -1, tau = -1, beta = -1, gamma = -1;
  double alpha = 1.0, rho0 = 0.0, eta = 2.0, rho_max = 0.0, eps = 1e-5;
  double w_floor = 1e-3;
  int max_iter = 100;
  bool plain_u_solve = false, l21_bare = false;
  bool has_rho0 = false, has_rho_max = false;
};

hsidn::SolverParams params_from_args(const DenoiseArgs& a) {
  hsidn::SolverParams p;
  const bool quartet = a.r >= 0 || a.tau >= 0 || a.beta >= 0 || a.gamma >= 0;
  if (!a.preset.empty()) {
    if (quartet) {
      throw FlagError("--preset excludes --r/--tau/--beta/--gamma");
    }
    p = hsidn::resolve_preset(a.preset);
  } else {
    if (!(a.r >= 0 && a.tau >= 0 && a.beta >= 0 && a.gamma >= 0)) {
      throw FlagError("either --preset or all of --r --tau --beta --gamma");
    }
    p.rank = static_cast<int>(a.r);
    p.set_tau(a.tau);
    p.beta = a.beta;
    p.gamma = a.gamma;
  }
  p.alpha = a.alpha;
  p.eta = a.eta;
  p.eps = a.eps;
  p.max_iter = a.max_iter;
  p.w_floor = a.w_floor;
  if (a.has_rho0) p.rho0 = a.rho0;
  if (a.has_rho_max) p.rho_max = a.rho_max;
  p.variant = hsidn::parse_variant(a.variant);
  p.plain_u_operator = a.plain_u_solve;
  p.l21_bare_gamma = a.l21_bare;
  return p;
}

int run_denoise(const DenoiseArgs& a) {
  const hsidn::SolverParams params = params_from_args(a);
  const hsidn::HsiCube noisy = hsidn::read_hsr(a.input);
  std::optional<hsidn::HsiCube> truth;
  if (!a.truth.empty()) truth = hsidn::read_hsr(a.truth);

  const auto t0 = std::chrono::steady_clock::now();
  const hsidn::SolveResult result =
      hsidn::solve(noisy, params, truth ? &*truth : nullptr);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  hsidn::write_hsr(result.x_hat, a.output);
  if (!a.trace_out.empty()) hsidn::write_trace_csv(result.trace, a.trace_out);
  if (!a.components_prefix.empty()) {
    hsidn::write_hsr(result.s_hat, a.components_prefix + "_s.hsr");
    hsidn::write_hsr(result.d_hat, a.components_prefix + "_d.hsr");
    hsidn::write_hsr(result.w_hat, a.components_prefix + "_w.hsr");
  }
  if (!a.results_out.empty()) {
    hsidn::RunConfig config;
    config.input = a.input;
    config.output = a.output;
    if (!a.trace_out.empty()) config.trace_out = a.trace_out;
    if (!a.preset.empty()) {
      config.preset = a.preset;
    }
    config.params = params;
    hsidn::RunResult run;
    run.config_hash = hsidn::config_hash(config);
    if (truth) run.metrics = hsidn::evaluate_all(*truth, result.x_hat);
    run.wall_seconds = seconds;
    run.iterations = result.iterations;
    hsidn::emit_results(run, a.results_out);
  }

  const auto& last = result.trace.records.back();
  std::printf(
      "iters=%d converged=%s res_grad1=%s res_grad2=%s res_fid=%s seconds=%s\n",
      result.iterations, result.converged ? "yes" : "no",
      fmt10(last.res_grad1).c_str(), fmt10(last.res_grad2).c_str(),
      fmt10(last.res_fidelity).c_str(), fmt10(seconds).c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------- //
// evaluate

int run_evaluate(const std::string& ref_path, const std::string& test_path,
                 const std::string& json_out) {
  const hsidn::HsiCube ref = hsidn::read_hsr(ref_path);
  const hsidn::HsiCube test = hsidn::read_hsr(test_path);
  const hsidn::MetricsReport report = hsidn::evaluate_all(ref, test);
  if (!json_out.empty()) hsidn::write_metrics(report, json_out);
  std::printf("PSNR=%s SSIM=%s SAM=%s\n",
              std::isinf(report.psnr_db) ? "inf" : fmt10(report.psnr_db).c_str(),
              fmt10(report.ssim).c_str(), fmt10(report.sam_rad).c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------- //
// benchmark

struct BenchRow {
  std::string case_label;
  const hsidn::HsiCube* noisy = nullptr;  // shared per case across variants
  hsidn::Variant variant = hsidn::Variant::Full;
  hsidn::SolverParams params;
};

struct BenchOutcome {
  std::string case_label, variant;
  bool ok = false;
  double psnr = 0.0, ssim = 0.0, sam = 0.0, seconds = 0.0;
  int iters = 0;
  std::string error;
};

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out += c;
    }
  }
  out += '"';
  return out;
}

std::vector<int> parse_case_list(const std::string& text) {
  std::vector<int> cases;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const auto dash = tok.find('-');
    try {
      if (dash != std::string::npos) {
        const int lo = std::stoi(tok.substr(0, dash));
        const int hi = std::stoi(tok.substr(dash + 1));
        for (int k = lo; k <= hi; ++k) cases.push_back(k);
      } else {
        cases.push_back(std::stoi(tok));
      }
    } catch (const std::exception&) {
      throw FlagError("--cases entry '" + tok + "' is not a case number");
    }
  }
  for (int k : cases) {
    if (k < 1 || k > 5) throw FlagError("--cases entries must be 1..5");
  }
  if (cases.empty()) throw FlagError("--cases resolved to an empty list");
  return cases;
}

hsidn::SolverParams preset_map_lookup(const nlohmann::json& map,
                                      const std::string& key) {
  const nlohmann::json* entry = nullptr;
  if (map.contains(key)) {
    entry = &map[key];
  } else if (map.contains("default")) {
    entry = &map["default"];
  } else {
    throw FlagError("preset map has no entry for '" + key +
                    "' and no 'default'");
  }
  if (entry->is_string()) {
    return hsidn::resolve_preset(entry->get<std::string>());
  }
  return hsidn::params_from_json_text(entry->dump());
}

struct BenchmarkArgs {
  std::string input, cases, preset_map, table_out, traces_dir;
  std::string variants = "full";
  std::uint64_t seed = 0;
  int workers = 1;
};

int run_benchmark(const BenchmarkArgs& a) {
  if (a.cases.empty()) throw FlagError("--cases must not be empty");

  std::vector<hsidn::Variant> variants;
  {
    std::stringstream ss(a.variants);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) variants.push_back(hsidn::parse_variant(tok));
    }
    if (variants.empty()) throw FlagError("--variants must not be empty");
  }

  nlohmann::json preset_map = nlohmann::json::object();
  if (!a.preset_map.empty()) {
    std::ifstream in(a.preset_map);
    if (!in) throw hsidn::IoFailure("cannot open preset map " + a.preset_map);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      preset_map = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw FlagError(std::string("preset map: ") + e.what());
    }
  }

  int workers = a.workers;
  if (const char* cap_env = std::getenv("HSIDN_THREADS")) {
    const int cap = std::atoi(cap_env);
    if (cap >= 1 && workers > cap) workers = cap;
  }
  if (workers < 1) throw FlagError("--workers must be >= 1");

  const hsidn::HsiCube clean = hsidn::read_hsr(a.input);

  // Materialize (case/sweep point, variant) rows up front; each row's seed
  // is pre-derived, so the worker count never changes outputs.
  std::vector<hsidn::HsiCube> noisy_pool;
  std::vector<std::string> labels;
  if (a.cases.rfind("sweep:", 0) == 0) {
    const auto kind = hsidn::parse_sweep(a.cases.substr(6));
    auto points = hsidn::gradient_sweep(clean, kind, a.seed);
    const char* prefix =
        kind == hsidn::SweepKind::Impulse ? "impulse" : "gaussian";
    for (std::size_t i = 0; i < points.size(); ++i) {
      char label[48];
      std::snprintf(label, sizeof(label), "%s-%.2f", prefix,
                    0.05 * static_cast<double>(i + 1));
      labels.emplace_back(label);
      noisy_pool.push_back(std::move(points[i].first));
    }
  } else {
    for (const int k : parse_case_list(a.cases)) {
      auto seeded =
          hsidn::apply_case(clean, k, hsidn::derive_seed(a.seed, 1000 + k));
      labels.push_back("case" + std::to_string(k));
      noisy_pool.push_back(std::move(seeded.first));
    }
  }

  std::vector<BenchRow> rows;
  const bool sweep = a.cases.rfind("sweep:", 0) == 0;
  for (std::size_t i = 0; i < noisy_pool.size(); ++i) {
    const std::string key =
        sweep ? std::string("default") : labels[i].substr(4);  // "caseK" -> K
    for (const auto v : variants) {
      BenchRow row;
      row.case_label = labels[i];
      row.noisy = &noisy_pool[i];
      row.variant = v;
      row.params = preset_map_lookup(preset_map, key);
      row.params.variant = v;
      rows.push_back(std::move(row));
    }
  }

  std::vector<BenchOutcome> outcomes(rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      const BenchRow& row = rows[i];
      BenchOutcome& out = outcomes[i];
      out.case_label = row.case_label;
      out.variant = hsidn::variant_name(row.variant);
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const hsidn::SolveResult solved = hsidn::solve(*row.noisy, row.params);
        out.seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        const hsidn::MetricsReport m = hsidn::evaluate_all(clean, solved.x_hat);
        out.psnr = m.psnr_db;
        out.ssim = m.ssim;
        out.sam = m.sam_rad;
        out.iters = solved.iterations;
        if (!a.traces_dir.empty()) {
          hsidn::write_trace_csv(solved.trace, a.traces_dir + "/" +
                                                   row.case_label + "-" +
                                                   out.variant + ".csv");
        }
        out.ok = true;
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::string csv = "case,variant,psnr_db,ssim,sam_rad,seconds,iters,error\n";
  std::size_t succeeded = 0;
  for (const auto& out : outcomes) {
    csv += out.case_label + ',' + out.variant + ',';
    if (out.ok) {
      ++succeeded;
      csv += fmt10(out.psnr) + ',' + fmt10(out.ssim) + ',' + fmt10(out.sam) +
             ',' + fmt10(out.seconds) + ',' + std::to_string(out.iters) + ",\n";
    } else {
      csv += ",,,,," + csv_escape(out.error) + "\n";
    }
  }
  if (!a.table_out.empty()) {
    std::ofstream out(a.table_out, std::ios::binary | std::ios::trunc);
    if (!out) throw hsidn::IoFailure("cannot open " + a.table_out);
    out << csv;
  } else {
    std::fputs(csv.c_str(), stdout);
  }
  return succeeded > 0 ? kExitOk : kExitAllRowsFailed;
}

// ---------------------------------------------------------------------- //
// convert

struct ConvertArgs {
  std::string raw_input, hsr_input, output, raw_output;
  std::string dims, order = "pixel-major";
};

void parse_dims(const std::string& text, int& m, int& n, int& b) {
  if (std::sscanf(text.c_str(), "%d,%d,%d", &m, &n, &b) != 3 || m <= 0 ||
      n <= 0 || b <= 0) {
    throw FlagError("--dims must be M,N,B with positive integers");
  }
}

int run_convert(const ConvertArgs& a) {
  const bool band_major = a.order == "band-major";
  if (!band_major && a.order != "pixel-major") {
    throw FlagError("--order must be band-major or pixel-major");
  }
  if (!a.raw_input.empty()) {
    if (a.output.empty()) throw FlagError("--raw-input requires --output");
    int m, n, b;
    parse_dims(a.dims, m, n, b);
    std::ifstream in(a.raw_input, std::ios::binary);
    if (!in) throw hsidn::IoFailure("cannot open " + a.raw_input);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    const std::size_t expect =
        static_cast<std::size_t>(m) * n * b * sizeof(double);
    if (bytes.size() != expect) {
      throw FlagError("--dims declare " + std::to_string(expect) +
                      " bytes but file has " + std::to_string(bytes.size()));
    }
    std::vector<double> flat(static_cast<std::size_t>(m) * n * b);
    std::memcpy(flat.data(), bytes.data(), bytes.size());
    hsidn::HsiCube cube(m, n, b);
    std::size_t idx = 0;
    if (band_major) {
      for (int band = 0; band < b; ++band)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) cube(i, j, band) = flat[idx++];
    } else {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          for (int band = 0; band < b; ++band) cube(i, j, band) = flat[idx++];
    }
    hsidn::write_hsr(cube, a.output);
    return kExitOk;
  }
  if (a.hsr_input.empty() || a.raw_output.empty()) {
    throw FlagError(
        "convert needs --raw-input/--output or --hsr-input/--raw-output");
  }
  const hsidn::HsiCube cube = hsidn::read_hsr(a.hsr_input);
  std::vector<double> flat;
  flat.reserve(cube.size());
  if (band_major) {
    for (int band = 0; band < cube.bands(); ++band)
      for (int i = 0; i < cube.rows(); ++i)
        for (int j = 0; j < cube.cols(); ++j) flat.push_back(cube(i, j, band));
  } else {
    flat.assign(cube.data().begin(), cube.data().end());
  }
  std::ofstream out(a.raw_output, std::ios::binary | std::ios::trunc);
  if (!out) throw hsidn::IoFailure("cannot open " + a.raw_output);
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!out) throw hsidn::IoFailure("write failed for " + a.raw_output);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FRHD hyperspectral mixed-noise denoising toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "inject mixed noise");
  simulate->add_option("--input", sim.input)->required();
  simulate->add_option("--output", sim.output)->required();
  simulate->add_option("--spec-out", sim.spec_out);
  auto* case_opt = simulate->add_option("--case", sim.case_id);
  auto* gv = simulate->add_option("--gaussian-var", sim.gaussian_var);
  auto* im = simulate->add_option("--impulse", sim.impulse);
  auto* dl = simulate->add_option("--deadline", sim.deadline);
  auto* ab = simulate->add_option("--affected-bands", sim.affected_bands);
  simulate->add_option("--stripe-offset", sim.stripe_offset);
  simulate->add_option("--seed", sim.seed);
  simulate->add_flag("--sigma-is-stddev", sim.sigma_is_stddev,
                     "treat Gaussian levels as std dev, not variance");

  DenoiseArgs den;
  auto* denoise = app.add_subcommand("denoise", "run the FRHD solver");
  denoise->add_option("--input", den.input)->required();
  denoise->add_option("--output", den.output)->required();
  denoise->add_option("--preset", den.preset);
  denoise->add_option("--r", den.r);
  denoise->add_option("--tau", den.tau);
  denoise->add_option("--beta", den.beta);
  denoise->add_option("--gamma", den.gamma);
  denoise->add_option("--alpha", den.alpha);
  auto* rho0_opt = denoise->add_option("--rho0", den.rho0);
  denoise->add_option("--eta", den.eta);
  auto* rho_max_opt = denoise->add_option("--rho-max", den.rho_max);
  denoise->add_option("--eps", den.eps);
  denoise->add_option("--max-iter", den.max_iter);
  denoise->add_option("--w-floor", den.w_floor);
  denoise->add_option("--variant", den.variant);
  denoise->add_flag("--plain-u-solve", den.plain_u_solve,
                    "drop the tau weights from the U solve");
  denoise->add_flag("--l21-bare-gamma", den.l21_bare,
                    "threshold D columns by gamma instead of gamma/rho");
  denoise->add_option("--trace-out", den.trace_out);
  denoise->add_option("--truth", den.truth);
  denoise->add_option("--emit-components", den.components_prefix);
  denoise->add_option("--results-out", den.results_out);

  std::string ref_path, test_path, json_out;
  auto* evaluate = app.add_subcommand("evaluate", "full-reference metrics");
  evaluate->add_option("--ref", ref_path)->required();
  evaluate->add_option("--test", test_path)->required();
  evaluate->add_option("--json-out", json_out);

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "case/sweep matrix");
  benchmark->add_option("--input", bench.input)->required();
  benchmark->add_option("--cases", bench.cases)->required();
  benchmark->add_option("--preset-map", bench.preset_map);
  benchmark->add_option("--variants", bench.variants);
  benchmark->add_option("--seed", bench.seed);
  benchmark->add_option("--table-out", bench.table_out);
  benchmark->add_option("--traces-dir", bench.traces_dir);
  benchmark->add_option("--workers", bench.workers);

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert", "raw float64 <-> HSR1");
  convert->add_option("--raw-input", conv.raw_input);
  convert->add_option("--dims", conv.dims);
  convert->add_option("--order", conv.order);
  convert->add_option("--output", conv.output);
  convert->add_option("--hsr-input", conv.hsr_input);
  convert->add_option("--raw-output", conv.raw_output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitFlags;
  }

  try {
    if (*simulate) {
      sim.case_given = case_opt->count() > 0;
      sim.any_manual = gv->count() || im->count() || dl->count() || ab->count();
      return run_simulate(sim);
    }
    if (*denoise) {
      den.has_rho0 = rho0_opt->count() > 0;
      den.has_rho_max = rho_max_opt->count() > 0;
      return run_denoise(den);
    }
    if (*evaluate) return run_evaluate(ref_path, test_path, json_out);
    if (*benchmark) return run_benchmark(bench);
    if (*convert) return run_convert(conv);
  } catch (const FlagError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFlags;
  } catch (const hsidn::NonFiniteState& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNonFinite;
  } catch (const hsidn::BadMagic& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const hsidn::UnsupportedVersion& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const hsidn::UnsupportedDtype& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const hsidn::TruncatedPayload& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const hsidn::DimOverflow& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const hsidn::IoFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const hsidn::NonFiniteData& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const hsidn::Error& e) {
    // Remaining library errors are validation failures: bad fractions,
    // unknown cases/presets/sweeps, rank or dim mismatches, parse errors.
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFlags;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFlags;
  }
  return kExitOk;
}
