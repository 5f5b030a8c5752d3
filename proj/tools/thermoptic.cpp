/*
 * Copyright 2026 The thermoptic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Command-line front end. Every file-producing subcommand writes its outputs,
// their sidecars and a <out>.manifest.json that `replay` can re-run.
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 numerical failure (JSON on stderr).

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "thermoptic/thermoptic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace thermoptic;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumerical = 3;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised after the subcommand has already reported its own diagnostics.
struct SilentFailure {
  int code;
};

std::string hex_sha256(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256: digest failed");
  }
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write failed for " + p.string());
}

/// Fails early, before any computation, when `p` cannot be created.
void require_writable(const fs::path& p) {
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("output directory " + dir.string() + " does not exist");
  if (fs::is_directory(p, ec)) throw IoError(p.string() + " is a directory");
  if (::access(dir.c_str(), W_OK) != 0) throw IoError("output directory " + dir.string() + " is not writable");
  if (fs::exists(p, ec) && ::access(p.c_str(), W_OK) != 0) throw IoError(p.string() + " is not writable");
}

fs::path sidecar(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// RFC-4180 text: CRLF line endings, header first.
class CsvBuilder {
 public:
  explicit CsvBuilder(const std::string& header) { line(header); }
  void row(std::initializer_list<std::string> cells) {
    std::string s;
    bool first = true;
    for (const auto& c : cells) {
      if (!first) s += ',';
      s += c;
      first = false;
    }
    line(s);
  }
  [[nodiscard]] const std::string& str() const { return text_; }

 private:
  void line(const std::string& s) { text_ += s + "\r\n"; }
  std::string text_;
};

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

// ---- subcommand bodies: params in, written files out ----

using Runner = std::function<std::vector<fs::path>(const json& params, const fs::path& out)>;

std::vector<fs::path> run_temp_variance(const json& p, const fs::path& out) {
  const BlackbodyScene scene(p.at("temperature_k").get<double>(), p.at("kappa_s2").get<double>());
  const double lo = p.at("nu_min_hz").get<double>(), hi = p.at("nu_max_hz").get<double>();
  const int n = p.at("grid").get<int>();
  const auto map = temperature_variance_map(scene, lo, hi, n);
  CsvBuilder csv("nu1_hz,nu2_hz,ln_var_T");
  const auto nn = static_cast<size_t>(n);
  double max_n = 0.0;
  for (size_t i = 0; i < nn; ++i) {
    max_n = std::max(max_n, mean_photon_number(map.nu[i], scene));
    for (size_t j = 0; j < nn; ++j) csv.row({csv_number(map.nu[i]), csv_number(map.nu[j]), csv_number(map.ln_var[i * nn + j])});
  }
  const double t = scene.temperature();
  json summary = {
      {"temperature_k", t},
      {"kappa_s2", scene.kappa()},
      {"grid", n},
      {"nu_min_hz", lo},
      {"nu_max_hz", hi},
      {"cell_hz", (hi - lo) / (n - 1.0)},
      {"minimum",
       {{"nu1_hz", map.nu[map.min_i]}, {"nu2_hz", map.nu[map.min_j]}, {"ln_var_T", map.min_ln_var},
        {"row", map.min_i}, {"col", map.min_j}}},
      {"frequency_law", {{"nu1_hz", 1.188e10 * t}, {"nu2_hz", 1.118e11 * t}}},
      {"max_mean_photon_number", max_n},
  };
  write_file(out, csv.str());
  write_file(sidecar(out, ".summary.json"), json_text(summary));
  return {out, sidecar(out, ".summary.json")};
}

std::vector<fs::path> run_opt_freq(const json& p, const fs::path& out) {
  json rows = json::array();
  for (double t : p.at("temperatures_k").get<std::vector<double>>()) {
    for (double kappa : p.at("kappas_s2").get<std::vector<double>>()) {
      const auto [nu1, nu2] = optimal_frequencies(BlackbodyScene(t, kappa));
      rows.push_back({{"T", t}, {"kappa", kappa}, {"nu1", nu1}, {"nu2", nu2}, {"nu1_over_T", nu1 / t}, {"nu2_over_T", nu2 / t}});
    }
  }
  write_file(out, json_text(rows));
  return {out};
}

SchemeKind scheme_from(const std::string& s) {
  if (s == "ft") return SchemeKind::ft;
  if (s == "rp") return SchemeKind::rp;
  if (s == "weighted") return SchemeKind::weighted;
  throw DomainError("unknown scheme " + s);
}

std::vector<fs::path> run_spatial_map(const json& p, const fs::path& out) {
  RatioMapSpec spec;
  spec.scheme = scheme_from(p.at("scheme").get<std::string>());
  spec.grid = p.at("grid").get<int>();
  spec.n_mean = p.at("n_mean").get<double>();
  spec.seed = p.at("seed").get<std::uint64_t>();
  spec.n_phases = p.at("n_phases").get<int>();
  spec.n_trials = p.at("n_trials").get<int>();
  const auto map = ratio_map(spec);
  CsvBuilder csv("gamma_cos,gamma_sin,ratio");
  int present = 0;
  for (const auto& c : map.cells) {
    csv.row({csv_number(c.gamma_cos), csv_number(c.gamma_sin), c.value ? csv_number(*c.value) : ""});
    present += c.value ? 1 : 0;
  }
  json meta = {
      {"scheme", to_string(spec.scheme)},
      {"quantity", spec.scheme == SchemeKind::weighted ? "V_op" : "V_op / V_scheme"},
      {"n_mean", spec.n_mean},
      {"grid", spec.grid},
      {"max_gamma", spec.max_gamma},
      {"seed", spec.seed},
      {"n_phases", spec.n_phases},
      {"n_trials", spec.n_trials},
      {"cells_present", present},
  };
  if (spec.scheme == SchemeKind::rp) {
    json se = json::array();
    for (const auto& c : map.cells) se.push_back(c.std_error ? json(*c.std_error) : json(nullptr));
    meta["std_error"] = se;
  }
  write_file(out, csv.str());
  write_file(sidecar(out, ".meta.json"), json_text(meta));
  return {out, sidecar(out, ".meta.json")};
}

PovmReference reference_from(const std::string& s) {
  if (s == "gaussian") return PovmReference::gaussian;
  if (s == "truncated") return PovmReference::truncated;
  throw DomainError("unknown reference " + s);
}

std::vector<fs::path> run_povm_search(const json& p, const fs::path& out) {
  const SpatialParams params(p.at("n_mean").get<double>(), p.at("gamma").get<double>(), p.at("phi").get<double>());
  const auto ref = reference_from(p.at("reference").get<std::string>());
  const auto r = optimize_povm(params, p.at("restarts").get<int>(), p.at("seed").get<std::uint64_t>(), ref);
  const double weighted = weighted_scheme(params, false).cost_star;
  json doc = {
      {"best_cost", r.best_cost},
      {"weighted_cost", weighted},
      {"gap", r.best_cost / weighted - 1.0},
      {"povm_parameters", r.best_parameters},
      {"reference", p.at("reference")},
      {"restart_costs", r.restart_costs},
      {"gill_massar_value", r.gill_massar_value},
      {"gill_massar_lower_bound", gill_massar_bounds(3, 3).lower},
      {"gaussian_reference_cost", r.gaussian_reference_cost},
      {"truncated_reference_cost", r.truncated_reference_cost},
      {"trace_deficit", r.trace_deficit},
  };
  write_file(out, json_text(doc));
  return {out};
}

Runner runner_for(const std::string& name) {
  if (name == "temp-variance") return run_temp_variance;
  if (name == "opt-freq") return run_opt_freq;
  if (name == "spatial-map") return run_spatial_map;
  if (name == "povm-search") return run_povm_search;
  throw DomainError("no replayable subcommand named " + name);
}

/// Runs a subcommand and records its manifest next to `out`.
void produce(const std::string& name, const json& params, const fs::path& out) {
  require_writable(out);
  const auto files = runner_for(name)(params, out);
  json outputs = json::array();
  for (const auto& f : files) outputs.push_back({{"file", f.filename().string()}, {"sha256", hex_sha256(read_file(f))}});
  json manifest = {
      {"tool", "thermoptic"},
      {"version", THERMOPTIC_VERSION},
      {"subcommand", name},
      {"params", params},
      {"seed", params.contains("seed") ? params.at("seed") : json(nullptr)},
      {"outputs", outputs},
  };
  write_file(sidecar(out, ".manifest.json"), json_text(manifest));
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  std::cout << "wrote " << sidecar(out, ".manifest.json").string() << "\n";
}

int replay(const fs::path& manifest_path) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw DomainError(std::string("manifest is not valid JSON: ") + e.what());
  }
  const std::string name = m.at("subcommand").get<std::string>();
  const json& params = m.at("params");
  const fs::path dir = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
  const fs::path out = dir / (fs::path(params.at("out").get<std::string>()).filename().string() + ".replay");
  require_writable(out);
  const auto files = runner_for(name)(params, out);
  const auto& recorded = m.at("outputs");
  json mismatches = json::array();
  if (files.size() != recorded.size()) mismatches.push_back({{"reason", "output count differs"}});
  for (size_t k = 0; k < std::min(files.size(), recorded.size()); ++k) {
    const std::string digest = hex_sha256(read_file(files[k]));
    const std::string want = recorded[k].at("sha256").get<std::string>();
    const bool same = digest == want;
    std::cout << (same ? "identical " : "DIFFERS   ") << recorded[k].at("file").get<std::string>() << "  " << digest << "\n";
    if (!same) mismatches.push_back({{"file", recorded[k].at("file")}, {"expected", want}, {"actual", digest}});
  }
  if (mismatches.empty()) {
    for (const auto& f : files) fs::remove(f);
    return 0;
  }
  std::cerr << json{{"error", "replay_mismatch"}, {"manifest", manifest_path.string()}, {"mismatches", mismatches}}.dump()
            << "\n";
  throw SilentFailure{kExitNumerical};
}

int verify(const std::string& suite_name, std::uint64_t seed, double tolerance_scale) {
  VerifySuite suite = VerifySuite::all;
  if (suite_name == "core") suite = VerifySuite::core;
  else if (suite_name == "oracle") suite = VerifySuite::oracle;
  VerifyOptions opt;
  opt.seed = seed;
  opt.tolerance_scale = tolerance_scale;
  const auto checks = run_verify(suite, opt);
  std::printf("%-6s %-5s %-58s %12s %12s\n", "result", "group", "check", "value", "bound");
  json failed = json::array();
  for (const auto& c : checks) {
    std::printf("%-6s %-5c %-58s %12.4g %2s%10.4g\n", c.pass ? "PASS" : "FAIL", c.group, (c.suite + "/" + c.name).c_str(),
                c.value, c.upper ? "<=" : ">=", c.bound);
    if (!c.pass) failed.push_back({{"check", c.suite + "/" + c.name}, {"value", c.value}, {"bound", c.bound}});
  }
  std::printf("%zu checks, %zu failed\n", checks.size(), failed.size());
  if (failed.empty()) return 0;
  std::cerr << json{{"error", "verify_failed"}, {"seed", seed}, {"failed", failed}}.dump() << "\n";
  throw SilentFailure{kExitNumerical};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal-light parameter estimation: spectral thermometry and spatial coherence"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(THERMOPTIC_VERSION));

  std::string name;
  json params;
  std::string out;
  std::function<int()> action;

  // temp-variance
  double tv_temp = 1e4, tv_kappa = 1e-32, tv_lo = 1e13, tv_hi = 3e15;
  int tv_grid = 64;
  auto* tv = app.add_subcommand("temp-variance", "ln Var(T) bound over a two-frequency grid");
  tv->add_option("--temp", tv_temp, "temperature [K]")->check(CLI::PositiveNumber)->capture_default_str();
  tv->add_option("--kappa", tv_kappa, "geometry factor [s^2]")->check(CLI::PositiveNumber)->capture_default_str();
  tv->add_option("--nu-min", tv_lo, "lowest frequency [Hz]")->check(CLI::PositiveNumber)->capture_default_str();
  tv->add_option("--nu-max", tv_hi, "highest frequency [Hz]")->check(CLI::PositiveNumber)->capture_default_str();
  tv->add_option("--grid", tv_grid, "points per axis")->check(CLI::Range(8, 100000))->capture_default_str();
  tv->add_option("--out", out, "CSV output path")->required();
  tv->callback([&] {
    if (!(tv_hi > tv_lo)) throw CLI::ValidationError("--nu-max", "must exceed --nu-min");
    name = "temp-variance";
    params = {{"temperature_k", tv_temp}, {"kappa_s2", tv_kappa}, {"nu_min_hz", tv_lo},
              {"nu_max_hz", tv_hi},       {"grid", tv_grid},      {"out", out}};
  });

  // opt-freq
  std::vector<double> of_temps{5e3, 1e4, 2e4}, of_kappas{1e-32};
  auto* of = app.add_subcommand("opt-freq", "frequencies minimizing the temperature variance");
  of->add_option("--temp", of_temps, "temperature [K], repeatable")->check(CLI::PositiveNumber)->capture_default_str();
  of->add_option("--kappa", of_kappas, "geometry factor [s^2], repeatable")->check(CLI::PositiveNumber)->capture_default_str();
  of->add_option("--out", out, "JSON output path")->required();
  of->callback([&] {
    name = "opt-freq";
    params = {{"temperatures_k", of_temps}, {"kappas_s2", of_kappas}, {"out", out}};
  });

  // spatial-map
  std::string sm_scheme;
  double sm_n = 0.01;
  int sm_grid = 41, sm_phases = 1000, sm_trials = 400;
  std::uint64_t sm_seed = 0;
  auto* sm = app.add_subcommand("spatial-map", "scheme cost ratio over the coherence disk");
  sm->add_option("--scheme", sm_scheme, "ft, rp or weighted")->required()->check(CLI::IsMember({"ft", "rp", "weighted"}));
  sm->add_option("--n-mean", sm_n, "mean photon number per mode")->check(CLI::PositiveNumber)->capture_default_str();
  sm->add_option("--grid", sm_grid, "points per axis")->check(CLI::Range(2, 10000))->capture_default_str();
  sm->add_option("--seed", sm_seed, "random-phase seed")->capture_default_str();
  sm->add_option("--n-phases", sm_phases, "random phases per trial")->check(CLI::PositiveNumber)->capture_default_str();
  sm->add_option("--n-trials", sm_trials, "random-phase trials per cell")->check(CLI::PositiveNumber)->capture_default_str();
  sm->add_option("--out", out, "CSV output path")->required();
  sm->callback([&] {
    name = "spatial-map";
    params = {{"scheme", sm_scheme}, {"n_mean", sm_n},        {"grid", sm_grid}, {"seed", sm_seed},
              {"n_phases", sm_phases}, {"n_trials", sm_trials}, {"out", out}};
  });

  // povm-search
  double ps_n = 0.01, ps_gamma = 0.5, ps_phi = kPi / 4.0;
  int ps_restarts = 32;
  std::uint64_t ps_seed = 0;
  std::string ps_ref = "gaussian";
  auto* ps = app.add_subcommand("povm-search", "six-element POVM optimization on the one-photon truncation");
  ps->add_option("--n-mean", ps_n, "mean photon number per mode")->check(CLI::NonNegativeNumber)->capture_default_str();
  ps->add_option("--gamma", ps_gamma, "|gamma|")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  ps->add_option("--phi", ps_phi, "coherence phase [rad]")->capture_default_str();
  ps->add_option("--restarts", ps_restarts, "Nelder-Mead restarts")->check(CLI::PositiveNumber)->capture_default_str();
  ps->add_option("--seed", ps_seed, "restart seed")->capture_default_str();
  ps->add_option("--reference", ps_ref, "QFI the cost is scored against")
      ->check(CLI::IsMember({"gaussian", "truncated"}))
      ->capture_default_str();
  ps->add_option("--out", out, "JSON output path")->required();
  ps->callback([&] {
    name = "povm-search";
    params = {{"n_mean", ps_n},           {"gamma", ps_gamma}, {"phi", ps_phi}, {"restarts", ps_restarts},
              {"seed", ps_seed},          {"reference", ps_ref}, {"out", out}};
  });

  // verify
  std::string vf_suite = "all";
  std::uint64_t vf_seed = 0;
  double vf_scale = 1.0;
  auto* vf = app.add_subcommand("verify", "run the invariant and oracle suites");
  vf->add_option("--suite", vf_suite, "core, oracle or all")->check(CLI::IsMember({"core", "oracle", "all"}))->capture_default_str();
  vf->add_option("--seed", vf_seed, "seed for the randomized checks")->capture_default_str();
  vf->add_option("--tolerance-scale", vf_scale, "multiply every tolerance (harness self-test)")
      ->check(CLI::PositiveNumber)
      ->group("");
  vf->callback([&] { action = [&] { return verify(vf_suite, vf_seed, vf_scale); }; });

  // replay
  std::string rp_manifest;
  auto* rp = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  rp->add_option("--manifest", rp_manifest, "path to <out>.manifest.json")->required()->check(CLI::ExistingFile);
  rp->callback([&] { action = [&] { return replay(rp_manifest); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (action) return action();
    produce(name, params, out);
    return 0;
  } catch (const SilentFailure& f) {
    return f.code;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed manifest: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    // NumericalError and anything else the library raises mid-computation.
    std::cerr << json{{"error", "numerical_failure"}, {"subcommand", name}, {"message", e.what()}, {"params", params}}.dump()
              << "\n";
    return kExitNumerical;
  }
}
