#include "hsidn/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace hsidn {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'H', 'S', 'R', '1'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeFloat64 = 1;
constexpr std::size_t kHeaderBytes = 19;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  }
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw IoFailure("read failed for '" + path + "'");
  }
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("write failed for '" + path + "'");
}

// Formats one CSV value at 10 significant digits, locale-independent.
std::string fmt10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

json parse_json(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; convert to line/column.
    std::size_t line = 1, col = 1;
    const std::size_t stop =
        std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(context + ": invalid JSON at line " +
                     std::to_string(line) + ", column " + std::to_string(col) +
                     ": " + e.what());
  }
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ParseError(context + ": unknown key '" + it.key() + "'");
    }
  }
}

double require_number(const json& obj, const char* key,
                      const std::string& context) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw ParseError(context + ": missing or non-numeric '" +
                     std::string(key) + "'");
  }
  return obj[key].get<double>();
}

// +inf round trips as the string "inf" (JSON has no inf literal).
json number_or_inf(double v) {
  if (std::isinf(v)) return json("inf");
  return json(v);
}

double parse_number_or_inf(const json& j, const std::string& context) {
  if (j.is_string() && j.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (!j.is_number()) {
    throw ParseError(context + ": expected number or \"inf\"");
  }
  return j.get<double>();
}

json noise_spec_to_json(const NoiseSpec& spec) {
  json j;
  j["gaussian_variance"] = spec.gaussian_variance;
  j["impulse_fraction"] = spec.impulse_fraction;
  j["deadline_fraction"] = spec.deadline_fraction;
  j["affected_band_fraction"] = spec.affected_band_fraction;
  j["seed"] = spec.seed;
  return j;
}

NoiseSpec noise_spec_from(const json& j, const std::string& context) {
  if (!j.is_object()) throw ParseError(context + ": expected an object");
  reject_unknown_keys(j,
                      {"gaussian_variance", "impulse_fraction",
                       "deadline_fraction", "affected_band_fraction", "seed"},
                      context);
  NoiseSpec spec;
  spec.gaussian_variance = require_number(j, "gaussian_variance", context);
  spec.impulse_fraction = require_number(j, "impulse_fraction", context);
  spec.deadline_fraction = require_number(j, "deadline_fraction", context);
  spec.affected_band_fraction =
      require_number(j, "affected_band_fraction", context);
  if (!j.contains("seed") || !j["seed"].is_number_unsigned()) {
    throw ParseError(context + ": missing or non-unsigned 'seed'");
  }
  spec.seed = j["seed"].get<std::uint64_t>();
  return spec;
}

json params_to_json(const SolverParams& p) {
  json j;
  j["r"] = p.rank;
  if (p.tau1 == p.tau2) {
    j["tau"] = p.tau1;
  } else {
    j["tau"] = json::array({p.tau1, p.tau2});
  }
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["gamma"] = p.gamma;
  j["rho0"] = p.rho0 ? json(*p.rho0) : json("auto");
  j["eta"] = p.eta;
  j["rho_max"] = p.rho_max ? json(*p.rho_max) : json("auto");
  j["eps"] = p.eps;
  j["max_iter"] = p.max_iter;
  j["w_floor"] = p.w_floor;
  j["variant"] = variant_name(p.variant);
  j["plain_u_operator"] = p.plain_u_operator;
  j["l21_bare_gamma"] = p.l21_bare_gamma;
  return j;
}

SolverParams params_from(const json& j, const std::string& context) {
  if (!j.is_object()) throw ParseError(context + ": expected an object");
  reject_unknown_keys(
      j,
      {"r", "tau", "alpha", "beta", "gamma", "rho0", "eta", "rho_max", "eps",
       "max_iter", "w_floor", "variant", "plain_u_operator", "l21_bare_gamma"},
      context);
  SolverParams p;
  if (j.contains("r")) p.rank = j["r"].get<int>();
  if (j.contains("tau")) {
    if (j["tau"].is_array()) {
      if (j["tau"].size() != 2) {
        throw ParseError(context + ": 'tau' array must have two entries");
      }
      p.tau1 = j["tau"][0].get<double>();
      p.tau2 = j["tau"][1].get<double>();
    } else {
      p.set_tau(j["tau"].get<double>());
    }
  }
  if (j.contains("alpha")) p.alpha = j["alpha"].get<double>();
  if (j.contains("beta")) p.beta = j["beta"].get<double>();
  if (j.contains("gamma")) p.gamma = j["gamma"].get<double>();
  if (j.contains("rho0") && !(j["rho0"].is_string())) {
    p.rho0 = j["rho0"].get<double>();
  }
  if (j.contains("eta")) p.eta = j["eta"].get<double>();
  if (j.contains("rho_max") && !(j["rho_max"].is_string())) {
    p.rho_max = j["rho_max"].get<double>();
  }
  if (j.contains("eps")) p.eps = j["eps"].get<double>();
  if (j.contains("max_iter")) p.max_iter = j["max_iter"].get<int>();
  if (j.contains("w_floor")) p.w_floor = j["w_floor"].get<double>();
  if (j.contains("variant")) {
    p.variant = parse_variant(j["variant"].get<std::string>());
  }
  if (j.contains("plain_u_operator")) {
    p.plain_u_operator = j["plain_u_operator"].get<bool>();
  }
  if (j.contains("l21_bare_gamma")) {
    p.l21_bare_gamma = j["l21_bare_gamma"].get<bool>();
  }
  return p;
}

json metrics_to_json(const MetricsReport& r) {
  json j;
  j["psnr_db"] = number_or_inf(r.psnr_db);
  j["ssim"] = r.ssim;
  j["sam_rad"] = r.sam_rad;
  json per_band;
  per_band["psnr"] = json::array();
  for (double v : r.per_band_psnr) per_band["psnr"].push_back(number_or_inf(v));
  per_band["ssim"] = r.per_band_ssim;
  j["per_band"] = per_band;
  j["psnr_infinite_bands"] = r.psnr_infinite_bands;
  j["sam_skipped_pixels"] = r.sam_skipped_pixels;
  return j;
}

MetricsReport metrics_from(const json& j, const std::string& context) {
  reject_unknown_keys(j,
                      {"psnr_db", "ssim", "sam_rad", "per_band",
                       "psnr_infinite_bands", "sam_skipped_pixels"},
                      context);
  MetricsReport r;
  r.psnr_db = parse_number_or_inf(j.at("psnr_db"), context);
  r.ssim = j.at("ssim").get<double>();
  r.sam_rad = j.at("sam_rad").get<double>();
  if (j.contains("per_band")) {
    for (const auto& v : j["per_band"].at("psnr")) {
      r.per_band_psnr.push_back(parse_number_or_inf(v, context));
    }
    for (const auto& v : j["per_band"].at("ssim")) {
      r.per_band_ssim.push_back(v.get<double>());
    }
  }
  if (j.contains("psnr_infinite_bands")) {
    r.psnr_infinite_bands = j["psnr_infinite_bands"].get<int>();
  }
  if (j.contains("sam_skipped_pixels")) {
    r.sam_skipped_pixels = j["sam_skipped_pixels"].get<long>();
  }
  return r;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["input"] = c.input;
  j["output"] = c.output;
  if (c.trace_out) j["trace_out"] = *c.trace_out;
  if (c.spec_out) j["spec_out"] = *c.spec_out;
  if (c.case_id) j["case"] = *c.case_id;
  if (c.noise) j["noise"] = noise_spec_to_json(*c.noise);
  if (c.preset) {
    j["preset"] = *c.preset;
  } else {
    j["params"] = params_to_json(c.params);
  }
  j["seed"] = c.seed;
  return j;
}

}  // namespace

HsiCube read_hsr(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kHeaderBytes) {
    throw TruncatedPayload("'" + path + "' is shorter than the HSR1 header");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, kMagic, 4) != 0) {
    throw BadMagic("'" + path + "' does not start with HSR1");
  }
  const std::uint16_t version = get_u16(p + 4);
  if (version != kVersion) {
    throw UnsupportedVersion("'" + path + "' has version " +
                             std::to_string(version));
  }
  const std::uint8_t dtype = p[6];
  if (dtype != kDtypeFloat64) {
    throw UnsupportedDtype("'" + path + "' has dtype " +
                           std::to_string(dtype));
  }
  const std::uint32_t m = get_u32(p + 7);
  const std::uint32_t n = get_u32(p + 11);
  const std::uint32_t b = get_u32(p + 15);
  if (m == 0 || n == 0 || b == 0) {
    throw DimOverflow("'" + path + "' declares a zero dimension");
  }
  const std::uint64_t count =
      static_cast<std::uint64_t>(m) * n * b;
  if (count > (std::numeric_limits<std::uint64_t>::max() / 8) ||
      count * 8 > static_cast<std::uint64_t>(
                      std::numeric_limits<std::streamsize>::max()) ||
      m > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
      n > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
      b > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw DimOverflow("'" + path + "' dims exceed addressable size");
  }
  if (bytes.size() != kHeaderBytes + count * 8) {
    throw TruncatedPayload("'" + path + "' payload size " +
                           std::to_string(bytes.size() - kHeaderBytes) +
                           " does not match 8*" + std::to_string(count));
  }
  std::vector<double> values(count);
  const unsigned char* payload = p + kHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i) {
    values[i] = get_f64(payload + i * 8);
  }
  return HsiCube(static_cast<int>(m), static_cast<int>(n),
                 static_cast<int>(b), std::move(values));
}

void write_hsr(const HsiCube& cube, const std::string& path) {
  std::string bytes;
  bytes.reserve(kHeaderBytes + cube.size() * 8);
  bytes.append(kMagic, 4);
  put_u16(bytes, kVersion);
  bytes.push_back(static_cast<char>(kDtypeFloat64));
  put_u32(bytes, static_cast<std::uint32_t>(cube.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(cube.cols()));
  put_u32(bytes, static_cast<std::uint32_t>(cube.bands()));
  for (double v : cube.data()) put_f64(bytes, v);
  write_file(path, bytes);
}

RunConfig load_config(const std::string& path) {
  const json j = parse_json(read_file(path), "config '" + path + "'");
  const std::string context = "config '" + path + "'";
  if (!j.is_object()) throw ParseError(context + ": expected an object");
  reject_unknown_keys(j,
                      {"input", "output", "trace_out", "spec_out", "case",
                       "noise", "preset", "params", "seed"},
                      context);
  RunConfig c;
  if (!j.contains("input") || !j["input"].is_string()) {
    throw ParseError(context + ": missing string 'input'");
  }
  if (!j.contains("output") || !j["output"].is_string()) {
    throw ParseError(context + ": missing string 'output'");
  }
  c.input = j["input"].get<std::string>();
  c.output = j["output"].get<std::string>();
  if (j.contains("trace_out")) c.trace_out = j["trace_out"].get<std::string>();
  if (j.contains("spec_out")) c.spec_out = j["spec_out"].get<std::string>();
  if (j.contains("case") && j.contains("noise")) {
    throw ParseError(context + ": 'case' and 'noise' are mutually exclusive");
  }
  if (j.contains("case")) c.case_id = j["case"].get<int>();
  if (j.contains("noise")) {
    c.noise = noise_spec_from(j["noise"], context + ".noise");
  }
  if (j.contains("preset") && j.contains("params")) {
    throw ParseError(context + ": 'preset' and 'params' are mutually exclusive");
  }
  if (j.contains("preset")) {
    c.preset = j["preset"].get<std::string>();
    c.params = resolve_preset(*c.preset);
  } else if (j.contains("params")) {
    c.params = params_from(j["params"], context + ".params");
  }
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  return c;
}

void save_config(const RunConfig& config, const std::string& path) {
  write_file(path, config_to_json(config).dump(2) + "\n");
}

std::string config_hash(const RunConfig& config) {
  const std::string canon = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

void emit_results(const RunResult& result, const std::string& path) {
  json j;
  j["config_hash"] = result.config_hash;
  j["noise_spec"] = result.noise ? noise_spec_to_json(*result.noise) : json();
  j["metrics"] = result.metrics ? metrics_to_json(*result.metrics) : json();
  j["wall_seconds"] = result.wall_seconds;
  j["iterations"] = result.iterations;
  write_file(path, j.dump(2) + "\n");
}

RunResult load_results(const std::string& path) {
  const std::string context = "results '" + path + "'";
  const json j = parse_json(read_file(path), context);
  reject_unknown_keys(
      j, {"config_hash", "noise_spec", "metrics", "wall_seconds", "iterations"},
      context);
  RunResult r;
  r.config_hash = j.at("config_hash").get<std::string>();
  if (!j.at("noise_spec").is_null()) {
    r.noise = noise_spec_from(j["noise_spec"], context + ".noise_spec");
  }
  if (!j.at("metrics").is_null()) {
    r.metrics = metrics_from(j["metrics"], context + ".metrics");
  }
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.iterations = j.at("iterations").get<int>();
  return r;
}

void write_noise_spec(const NoiseSpec& spec, const std::string& path) {
  write_file(path, noise_spec_to_json(spec).dump(2) + "\n");
}

NoiseSpec read_noise_spec(const std::string& path) {
  const std::string context = "noise spec '" + path + "'";
  return noise_spec_from(parse_json(read_file(path), context), context);
}

void write_metrics(const MetricsReport& report, const std::string& path) {
  write_file(path, metrics_to_json(report).dump(2) + "\n");
}

std::string trace_csv_string(const IterationTrace& trace) {
  std::string out = "iter,res_grad1,res_grad2,res_fidelity,rho,psnr\n";
  for (const auto& rec : trace.records) {
    out += std::to_string(rec.iter);
    out += ',' + fmt10(rec.res_grad1);
    out += ',' + fmt10(rec.res_grad2);
    out += ',' + fmt10(rec.res_fidelity);
    out += ',' + fmt10(rec.rho);
    out += ',';
    if (rec.psnr_db) out += fmt10(*rec.psnr_db);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const IterationTrace& trace, const std::string& path) {
  write_file(path, trace_csv_string(trace));
}

std::string noise_spec_json(const NoiseSpec& spec) {
  return noise_spec_to_json(spec).dump(2) + "\n";
}

NoiseSpec noise_spec_from_json(const std::string& text) {
  return noise_spec_from(parse_json(text, "noise spec"), "noise spec");
}

std::string metrics_json(const MetricsReport& report) {
  return metrics_to_json(report).dump(2) + "\n";
}

SolverParams params_from_json_text(const std::string& text) {
  return params_from(parse_json(text, "params"), "params");
}

}  // namespace hsidn
