// Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "difflab/autocorr.hpp"
#include "difflab/diffraction.hpp"
#include "difflab/ergodic.hpp"
#include "difflab/error.hpp"
#include "difflab/io.hpp"
#include "difflab/runner.hpp"
#include "difflab/transfer.hpp"

using namespace difflab;

namespace {

const double kTau = (1.0 + std::sqrt(5.0)) / 2.0;
const double kFibDensity = kTau / std::sqrt(5.0);

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> body;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

Comb integers(double lo, double hi) {
  return Comb::from_patch(model_set(CutProjectScheme::lattice(), Window(-0.5, 0.5), {lo, hi}));
}

std::vector<double> range_ints(int lo, int hi) {
  std::vector<double> v;
  for (int k = lo; k <= hi; ++k) v.push_back(k);
  return v;
}

Outcome poisson_benchmark() {
  const auto z = integers(-1000, 1000);
  const auto est = split_pp_cont(z, VanHoveSequence({250, 500, 1000}), range_ints(0, 3), {0, 3, 0.01});
  double atom_err = 0.0;
  int found = 0;
  for (int k = 0; k <= 3; ++k)
    if (const auto a = est.atom_near(k)) {
      ++found;
      atom_err = std::max(atom_err, std::fabs(a->intensity - 1.0));
    }
  std::size_t spurious = 0;
  for (const auto& a : est.atoms)
    if (a.kind == AtomKind::Atom && std::fabs(a.omega - std::round(a.omega)) > 1e-6) ++spurious;
  const double dens = est.max_abs_density();
  return {found == 4 && atom_err <= 1e-3 && dens <= 5e-3 && spurious == 0,
          "atoms found " + std::to_string(found) + "/4, max |I-1| " + fmt(atom_err) + " (tol 1e-3), max |density| " +
              fmt(dens) + " (tol 5e-3) over " + std::to_string(est.density_samples.size()) + " samples, spurious atoms " +
              std::to_string(spurious)};
}

Outcome diffraction_identity() {
  const auto phi = TestFunction::tent(0, 1.0);
  const double band = fourier_band(phi);
  const auto z = integers(-2000, 2000);
  const VanHoveSequence seq({500, 1000, 2000});
  SpectralOptions opt;
  opt.scan = false;
  const int kmax = static_cast<int>(band) + 4;
  const auto est = split_pp_cont(z, seq, range_ints(-kmax, kmax), {-band, band, 1.0 / 16.0}, opt);
  const auto id = verify_diffraction_identity(z, seq, 2, est, phi);
  const double closed = 2.0 / 3.0 + 2.0 * (1.0 / 6.0);
  const bool pass = std::fabs(id.lhs - closed) <= 0.01 * closed && std::fabs(id.rhs - closed) <= 0.01 * closed;
  return {pass, "lhs " + fmt(id.lhs) + ", rhs " + fmt(id.rhs) + ", closed form " + fmt(closed) + " (tol 1%)"};
}

Outcome decomposition_theorem() {
  const RandomWeightModel model{BaseSet::lattice(), WeightLaw::bernoulli(0.5)};
  const Interval region{-500000, 499999};
  const VanHoveSequence seq({500, 1000, 2000});
  const FrequencyGrid grid{0.05, 2.5, 0.05};
  const auto r = verify_decomposition(model, 1, region, seq, range_ints(0, 3), grid);
  double atom_err = 0.0;
  int found = 0;
  for (int k = 0; k <= 3; ++k)
    if (const auto a = r.gamma_hat_p.atom_near(k)) {
      ++found;
      atom_err = std::max(atom_err, std::fabs(a->intensity - 0.25) / 0.25);
    }
  double dens_err = 0.0;
  for (const auto& s : r.gamma_hat_c.density_samples) dens_err = std::max(dens_err, std::fabs(s.density - 0.25) / 0.25);
  const bool pass = r.sample_points >= 1000000 && r.bitwise_additive && found == 4 && atom_err <= 0.03 &&
                    r.gamma_hat_c.density_samples.size() == 50 && dens_err <= 0.03 && r.pp_purity < 0.01 &&
                    r.additivity_gap < 0.03;
  return {pass, std::to_string(r.sample_points) + " points; (a) bit-exact " + (r.bitwise_additive ? "yes" : "no") +
                    "; (b) p-atoms " + std::to_string(found) + "/4 worst " + fmt(atom_err) +
                    " (tol 3%); (c) c-density worst " + fmt(dens_err) + " over " +
                    std::to_string(r.gamma_hat_c.density_samples.size()) + " samples (tol 3%); (d) pp_purity " +
                    fmt(r.pp_purity) + " (tol 0.01); (e) additivity gap " + fmt(r.additivity_gap) + " (tol 3%, " +
                    std::to_string(r.atoms_compared) + " atoms, " + std::to_string(r.densities_compared) +
                    " densities)"};
}

Outcome meyer_support() {
  const RandomWeightModel model{BaseSet::fibonacci(), WeightLaw::two_point(0.0, 1.0, 0.5)};
  const Interval region{-10000, 10000};
  const auto comb = sample(model, 1, region);
  const auto parts = decompose(comb, model);
  const auto patch = model_set(CutProjectScheme::fibonacci(), Window::fibonacci(), region);
  const bool tags_equal = parts.pure_point.tags == patch.tags && parts.continuous.tags == patch.tags;
  const std::size_t vp = support_violations(parts.pure_point, model.base);
  const std::size_t vc = support_violations(parts.continuous, model.base);

  SpectralOptions opt;
  opt.scan = false;
  opt.taper_scale = 8.0;
  const auto est = split_pp_cont(parts.continuous, VanHoveSequence({2500, 5000, 10000}),
                                 dual_frequencies(CutProjectScheme::fibonacci(), {-3.95, 6.5}, 8),
                                 {0.05, 2.5, 0.05}, opt);
  const double expected = 0.25 * kFibDensity;
  double worst = 0.0;
  for (const auto& s : est.density_samples) worst = std::max(worst, std::fabs(s.density - expected) / expected);
  return {tags_equal && vp == 0 && vc == 0 && worst <= 0.05,
          "tags equal to model set " + std::string(tags_equal ? "yes" : "no") + ", violations p=" + std::to_string(vp) +
              " c=" + std::to_string(vc) + "; c-density expected " + fmt(expected) + ", worst deviation " + fmt(worst) +
              " (tol 5%)"};
}

Outcome fibonacci_zero_peak() {
  const Interval region{-5000, 5000};
  const auto patch = model_set(CutProjectScheme::fibonacci(), Window::fibonacci(), region);
  const auto comb = Comb::from_patch(patch);
  std::size_t count = 0;
  for (double x : patch.points) count += region.contains_half_open(x);
  const double measured = static_cast<double>(count) / region.length();
  const double zero = bragg_intensity(comb, 0.0, VanHoveSequence({5000}), 0);
  const double peak_gap = std::fabs(zero - measured * measured) / (measured * measured);
  const double dens_gap = std::fabs(measured - kFibDensity) / kFibDensity;
  return {peak_gap <= 0.01 && dens_gap <= 1e-3,
          "I(0) " + fmt(zero) + " vs density^2 " + fmt(measured * measured) + " gap " + fmt(peak_gap) +
              " (tol 1%); density " + fmt(measured) + " vs tau/sqrt5 gap " + fmt(dens_gap) + " (tol 0.1%)"};
}

Outcome torus() {
  const auto scheme = CutProjectScheme::fibonacci();
  const auto w = Window::fibonacci();
  const Interval region{-200, 200};
  const auto shifted = model_set(scheme, w.shifted(scheme, InternalValue{1, 0, 10}), region);
  const auto c = torus_parametrize(shifted, scheme, w);
  const bool shifted_ok = std::fabs(c.w - 0.1) <= c.width / 2 && c.width < 1e-2 && c.t == 0.0;
  const auto plain = torus_parametrize(model_set(scheme, w, region), scheme, w);
  const bool plain_ok = plain.t == 0.0 && plain.w_lo <= 0.0 && plain.w_hi >= 0.0 && plain.width < 1e-2;
  return {shifted_ok && plain_ok, "shifted: w " + fmt(c.w) + " half-width " + fmt(c.width / 2) + " (width tol 1e-2)" +
                                      "; unshifted: w in [" + fmt(plain.w_lo) + ", " + fmt(plain.w_hi) + "], t " + fmt(plain.t)};
}

Outcome convolution_factor() {
  const auto sigma = BoundedAtomicMeasure::parse("0:0.5,0.5:0.5");
  const VanHoveSequence seq({500, 1000, 2000});
  const auto lat = verify_sigma_diffraction(integers(-4000, 4000), sigma, seq, 2, range_ints(0, 3), {});
  double extinguished = 0.0, even_err = 0.0;
  for (const auto& r : lat.rows) {
    if (std::lround(r.omega) % 2) extinguished = std::max(extinguished, r.transformed);
    else even_err = std::max(even_err, std::fabs(r.transformed - 1.0));
  }
  const RandomWeightModel model{BaseSet::lattice(), WeightLaw::bernoulli(0.5)};
  const auto b = sample(model, 1, {-100000, 100000});
  std::vector<double> omegas;
  for (int k = 1; k <= 60; ++k) omegas.push_back(0.05 * k - 0.025);
  const auto ber = verify_sigma_diffraction(b, sigma, seq, 2, {}, omegas);
  double worst = 0.0;
  std::size_t used = 0;
  for (const auto& r : ber.rows) {
    const double factor = std::pow(std::cos(M_PI * r.omega / 2.0), 2);
    if (factor < 1e-3) continue;
    ++used;
    worst = std::max(worst, std::fabs(r.transformed - factor * r.base) / (factor * r.base));
  }
  return {extinguished < 1e-3 && even_err <= 0.01 && worst <= 0.05 && used > 0,
          "lattice: odd atoms max " + fmt(extinguished) + " (tol 1e-3), even |I-1| " + fmt(even_err) +
              " (tol 1%); Bernoulli: cos^2 law worst " + fmt(worst) + " over " + std::to_string(used) +
              " frequencies (tol 5%)"};
}

Outcome support_density_criterion() {
  const VanHoveSequence seq({1000});
  auto even = integers(-501, 501);
  for (auto& x : even.positions) x *= 2.0;
  even.region = {-1002, 1002};
  even.tags.clear();
  even.finalize();
  const double d2 = support_density(even, 1.0, seq, 0);
  const RandomWeightModel model{BaseSet::lattice(), WeightLaw::bernoulli(0.5)};
  const auto b = sample(model, 1, {-1001, 1001});
  const double dp = support_density(decompose(b, model).pure_point, 1.0, seq, 0);
  return {d2 == 0.5 && dp == 1.0, "2Z: " + fmt(d2) + " (exact 0.5); Bernoulli p-part: " + fmt(dp) + " (exact 1)"};
}

Outcome property_suites() {
  std::vector<std::string> failures;
  const VanHoveSequence seq({250, 500, 1000});
  const std::vector<std::pair<std::string, Comb>> combs = {
      {"lattice", integers(-1000, 1000)},
      {"bernoulli", sample({BaseSet::lattice(), WeightLaw::bernoulli(0.5)}, 2, {-1000, 1000})},
      {"fibonacci", Comb::from_patch(model_set(CutProjectScheme::fibonacci(), Window::fibonacci(), {-1000, 1000}))},
      {"complex", sample({BaseSet::fibonacci(), WeightLaw::uniform_complex(1.0)}, 3, {-1000, 1000})},
  };
  std::size_t gammas = 0;
  double cross_worst = 0.0;
  std::size_t cross_count = 0;
  for (const auto& [name, comb] : combs) {
    for (std::size_t n = 0; n < seq.size(); ++n) {
      const auto g = windowed_autocorr(comb, seq.window(n), 0.5 * seq.volume(n));
      ++gammas;
      if (hermitian_defect(g.comb) > 1e-12) failures.push_back(name + " hermitian n=" + std::to_string(n));
      if (!check_positive_definite(g, standard_test_battery()).pass)
        failures.push_back(name + " positive-definite n=" + std::to_string(n));
      if (name == "bernoulli" || name == "complex") continue;  // single-window fluctuations differ
      for (double omega : {0.0, 1.0, kTau, 1.0 / kTau}) {
        const double direct = bragg_intensity(comb, omega, seq, n);
        if (direct < 1e-2) continue;
        const double via = atom_from_autocorr(g, omega, 0.45 * seq.volume(n));
        const double gap = std::fabs(direct - via);
        const double tol = std::max(0.02 * direct, 5.0 / seq.volume(n));
        cross_worst = std::max(cross_worst, gap / tol);
        ++cross_count;
        if (gap > tol) failures.push_back(name + " cross-consistency omega=" + fmt(omega));
      }
    }
  }

  const RandomWeightModel model{BaseSet::lattice(), WeightLaw::bernoulli(0.5)};
  SpectralOptions opt;
  opt.scan = false;
  const auto reports = verify_decomposition(model, {1, 2, 3}, {-40000, 40000}, VanHoveSequence({1000, 2000, 4000}),
                                            range_ints(0, 2), {0.1, 1.9, 0.1}, opt);
  const auto consistency = check_seed_consistency(reports);
  if (!consistency.consistent) failures.push_back("seed stability: " + consistency.detail);

  // Determinism: two full pipeline runs into separate directories.
  const auto root = std::filesystem::temp_directory_path() / "difflab_acceptance";
  std::filesystem::remove_all(root);
  auto config = parse_config("scenario=bernoulli-lattice seeds=5 L0=100 n_list=1,2,4 grid=0.1,1,0.1");
  std::size_t files = 0;
  std::vector<std::string> runs[2];
  for (int i = 0; i < 2; ++i) {
    config.output_dir = root / ("run" + std::to_string(i));
    std::ostringstream log, err;
    execute("run", config, false, log, err);
    for (const auto& e : std::filesystem::directory_iterator(config.output_dir))
      if (e.path().filename() != "summary.txt") runs[i].push_back(e.path().filename().string());
  }
  std::sort(runs[0].begin(), runs[0].end());
  std::sort(runs[1].begin(), runs[1].end());
  if (runs[0] != runs[1] || runs[0].empty()) failures.push_back("determinism: artifact sets differ");
  for (const auto& name : runs[0]) {
    ++files;
    if (read_text(root / "run0" / name) != read_text(root / "run1" / name))
      failures.push_back("determinism: " + name + " differs");
  }

  std::string detail = std::to_string(gammas) + " autocorrelations hermitian+PD; cross-consistency worst gap/tol " +
                       fmt(cross_worst) + " over " + std::to_string(cross_count) +
                       " deterministic atoms (tol max(2% I, 5/|A|)); seed spread atoms " +
                       fmt(consistency.atom_spread) + " density " + fmt(consistency.density_spread) +
                       " (tol 5%); " + std::to_string(files) + " artifacts byte-identical";
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "Poisson benchmark", 5, poisson_benchmark},
      {2, "Diffraction identity", 5, diffraction_identity},
      {3, "Decomposition theorem", 60, decomposition_theorem},
      {4, "Meyer-support inheritance", 60, meyer_support},
      {5, "Fibonacci zero-peak", 30, fibonacci_zero_peak},
      {6, "Torus parametrization", 2, torus},
      {7, "Convolution-factor law", 60, convolution_factor},
      {8, "Support density", 2, support_density_criterion},
      {9, "Property suites", 120, property_suites},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::printf("[%s] %d %s: %s; runtime %.2f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                out.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
