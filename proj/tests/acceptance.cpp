// Acceptance run: one PASS/FAIL line per criterion. Presets run on the
// built-in defaults and are then re-run from their manifests.
//   acceptance [--out DIR] [--only N]...

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <set>

#include "CLI11.hpp"
#include "chaosqfc/defaults.hpp"
#include "chaosqfc/detection.hpp"
#include "chaosqfc/presets.hpp"
#include "chaosqfc/propagation.hpp"
#include "chaosqfc/scenario.hpp"
#include "chaosqfc/units.hpp"
#include "desk.hpp"
#include "oracles.hpp"

using namespace chaosqfc;
namespace fs = std::filesystem;

namespace {

int failures = 0;
double worst_drift = 0.0;
std::vector<std::string> drift_sources;

void verdict(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

void note_drift(const std::string& where, double d) {
  if (!(d <= worst_drift)) worst_drift = std::isnan(d) ? d : std::max(worst_drift, d);
  drift_sources.push_back(fmt("%s %.1e", where.c_str(), d));
}

struct PresetRun {
  RunManifest m;
  bool ran = false;
};

class Runs {
 public:
  explicit Runs(fs::path root) : root_(std::move(root)) {}
  const RunManifest& get(const std::string& preset) {
    auto& r = runs_[preset];
    if (!r.ran) {
      const auto t0 = std::chrono::steady_clock::now();
      r.m = run_preset(preset, std::map<std::string, std::string>{}, root_ / preset);
      r.ran = true;
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("  [%s ran in %.1f s]\n", preset.c_str(), s);
      if (auto it = r.m.metrics.find("max_manley_rowe_drift"); it != r.m.metrics.end()) note_drift(preset, it->second);
    }
    return r.m;
  }
  const std::map<std::string, PresetRun>& all() const { return runs_; }
  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::map<std::string, PresetRun> runs_;
};

double metric(const RunManifest& m, const std::string& k) {
  const auto it = m.metrics.find(k);
  return it == m.metrics.end() ? std::nan("") : it->second;
}

// 1: worked enhancement for the 7.5 nm source and a 10 Hz rbw
void worked_number() {
  const double sigma = oracle::c0 * 7.5e-9 / (1560e-9 * 1560e-9) / (2 * std::sqrt(2 * std::log(2.0)));
  const auto f = snr_formulas(1.0, 100.0, sigma, 10.0);
  const double want = oracle::enhancement_db(sigma, 10.0);
  verdict(1, std::abs(f.enhancement_db - 111.0) <= 1.0 && std::abs(f.enhancement_db - want) < 1e-9,
          "enhancement for 7.5 nm at 10 Hz rbw", fmt("%.3f dB (target 111 +/- 1)", f.enhancement_db));
}

void efficiency_peak(Runs& runs) {
  const auto& m = runs.get("efficiency-sweep");
  const double c = metric(m, "peak_csfg_eff"), t = metric(m, "peak_total_eff");
  const double trials = metric(m, "trials_per_point");
  verdict(2, trials >= 200 && within(c, 0.89, 0.95) && t > c, "Monte Carlo c-SFG efficiency peak",
          fmt("c-SFG %.4f +/- %.4f, total %.4f at %.3f W, %g trials/point (target 0.92 +/- 0.03)", c,
              metric(m, "peak_csfg_eff_se"), t, metric(m, "peak_reference_power"), trials));
}

void cw_limit() {
  const auto d = default_config().scenario;
  WaveguideSpec wg = d.wg;
  wg.delta_beta = 0.0;
  const double pr = d.source.reference_flux(), pp = 1e-6 * pr;
  auto flat = [](double flux) {
    ComplexEnvelope e = ComplexEnvelope::zeros(16, 1e-13);
    for (auto& v : e.samples) v = std::sqrt(flux);
    return e;
  };
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double theta = 2 * oracle::pi * i / 49.0;
    wg.gamma = gamma_for_angle(theta, pr, wg.length);
    const auto r = solve_three_wave(flat(pp), flat(pr), nullptr, wg);
    worst = std::max(worst, std::abs(r.flux_out.sfg / pp - oracle::cw_efficiency(theta)));
    note_drift(i == 0 ? "cw" : "", r.manley_rowe_drift);
  }
  drift_sources.erase(std::remove(drift_sources.begin(), drift_sources.end(), std::string()), drift_sources.end());
  verdict(3, worst <= 1e-3, "CW zero walk-off efficiency vs sin^2, 50 points", fmt("max |d eta| = %.2e", worst));
}

void small_signal_spectrum(Runs& runs) {
  const auto& m = runs.get("sfg-spectrum");
  const double cr = metric(m, "coherent_ratio"), ir = metric(m, "isfg_ratio"), nb = metric(m, "null_max_offset_bins");
  verdict(4, metric(m, "trials") >= 1000 && std::abs(cr - 1) <= 0.05 && std::abs(ir - 1) <= 0.05 && nb <= 1.0,
          "small-signal SFG spectrum",
          fmt("coherent %.4f, i-SFG %.4f of closed form, sinc nulls within %.2f bins, %g trials", cr, ir, nb,
              metric(m, "trials")));
}

void desk_noise_rejection() {
  std::string detail;
  bool ok = true;
  for (double ratio : {1e3, 1e4}) {
    const double sigma = 1e9;
    auto c = desk::scenario(sigma, sigma / ratio, 96.0);
    c.noise_flux = 100.0 * c.source.probe_flux;
    c.mode = LinkMode::direct;
    const auto r = simulate_link(c);
    const double want = oracle::enhancement_db(sigma, c.det.electrical_rbw);
    const double got = r.summary.enhancement_db;
    ok = ok && std::abs(got - want) <= 1.0 && r.summary.peak_detected;
    note_drift(fmt("desk-%g", ratio), r.summary.manley_rowe_drift);
    detail += fmt("%ssigma/rbw %g: %.2f dB vs %.2f dB%s", detail.empty() ? "" : "; ", ratio, got, want,
                  r.summary.peak_detected ? "" : " (no line)");
  }
  verdict(5, ok, "desk-scale enhancement follows the 1/rbw law", detail);
}

void ranging(Runs& runs) {
  const auto& m = runs.get("range-scan");
  const double fr = metric(m, "fwhm_ratio"), err = metric(m, "center_error"), step = metric(m, "delay_step");
  const double res = metric(m, "distance_resolution_m");
  verdict(6, std::abs(fr - 1) <= 0.05 && std::abs(err) <= step && within(res, 100e-6 / 3, 300e-6),
          "range scan width, centre and resolution",
          fmt("FWHM ratio %.4f, centre error %.2e s (step %.2e s), resolution %.1f um (target ~100, within 3x)", fr, err, step,
              res * 1e6));
}

void vibration(Runs& runs) {
  const auto& m = runs.get("vibration");
  const double drop = metric(m, "peak_drop_db"), fr = metric(m, "fwhm_ratio");
  verdict(7, drop >= 10.0 && std::abs(fr - 1) <= 0.3, "vibration over-filtering",
          fmt("peak drop %.2f dB, line FWHM %.0f Hz (ratio %.3f) at rbw %g Hz", drop, metric(m, "vibrating_fwhm_hz"),
              fr, metric(m, "rbw_hz")));
}

void indistinguishable() {
  auto c = default_config().scenario;
  c.noise_flux = c.source.probe_flux;
  c.n_trials = 32;
  const auto r = direct_detection(c);
  const double want = r.probe_flux / (r.probe_flux + r.noise_flux);
  verdict(8, r.probe_vs_noise.indistinguishable(0.95) && std::abs(r.snr_measured / want - 1) <= 0.05,
          "probe and noise indistinguishable without the reference",
          fmt("two-sample p = %.3f, direct SNR %.4f vs %.4f", r.probe_vs_noise.p_value, r.snr_measured, want));
}

void heralding(Runs& runs) {
  const auto& m = runs.get("heralding-map");
  const double corner = metric(m, "corner_probability"), viol = metric(m, "monotonic_violations");
  const double lo = metric(m, "min_single_realization"), hi = metric(m, "max_single_realization");
  const double half = metric(m, "max_halving_change");
  verdict(9, corner >= 0.95 && viol == 0 && lo >= 0 && hi <= 1 && half <= 1e-2, "heralding map",
          fmt("corner %.4f, %g/%g trend violations, realizations in [%.3g, %.6f], halving change %.2e", corner, viol,
              metric(m, "monotonic_steps_checked"), lo, hi, half));
}

void conservation_and_determinism(Runs& runs) {
  std::vector<std::string> bad;
  for (const auto& name : preset_names()) runs.get(name);
  std::size_t files = 0;
  for (const auto& [name, r] : runs.all()) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = rerun_manifest(runs.root() / name / "manifest.json", runs.root() / name / "rerun");
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  [%s rerun in %.1f s]\n", name.c_str(), s);
    files += rep.original.outputs.size();
    for (const auto& f : rep.mismatches) bad.push_back(name + "/" + f);
    if (auto it = rep.rerun.metrics.find("max_manley_rowe_drift"); it != rep.rerun.metrics.end())
      note_drift(name + " rerun", it->second);
  }
  std::string detail = fmt("worst drift %.2e over %zu runs; %zu outputs re-run", worst_drift, drift_sources.size(), files);
  if (!bad.empty()) {
    detail += ", mismatched:";
    for (const auto& b : bad) detail += " " + b;
  } else {
    detail += ", all identical";
  }
  verdict(10, worst_drift <= 1e-6 && bad.empty(), "Manley-Rowe drift and manifest re-runs", detail);
}

void filter(Runs& runs) {
  const double t = bandpass_transmission(0.12e-9, 3.7e-9);
  const double p = metric(runs.get("selectivity"), "isfg_transmitted_fraction");
  verdict(11, std::abs(t - 0.032) <= 0.005 && p == t, "0.12 nm grating on 3.7 nm i-SFG",
          fmt("transmits %.3f%% (target 3.2 +/- 0.5%%)", 100 * t));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string out = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--out", out, "scratch directory for preset runs");
  app.add_option("--only", only, "run these criteria only");
  CLI11_PARSE(app, argc, argv);
  fs::remove_all(out);
  Runs runs{out};
  const std::set<int> pick(only.begin(), only.end());
  auto want = [&](int i) { return pick.empty() || pick.count(i); };
  const auto t0 = std::chrono::steady_clock::now();
  if (want(1)) worked_number();
  if (want(2)) efficiency_peak(runs);
  if (want(3)) cw_limit();
  if (want(4)) small_signal_spectrum(runs);
  if (want(5)) desk_noise_rejection();
  if (want(6)) ranging(runs);
  if (want(7)) vibration(runs);
  if (want(8)) indistinguishable();
  if (want(9)) heralding(runs);
  if (want(10)) conservation_and_determinism(runs);
  if (want(11)) filter(runs);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d failed, %.0f s\n", failures, s);
  return failures == 0 ? 0 : 1;
}
