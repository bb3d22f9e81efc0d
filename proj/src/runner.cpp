#include "difflab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "difflab/error.hpp"
#include "difflab/exact_cps.hpp"
#include "difflab/io.hpp"

namespace difflab {

namespace {

const std::vector<std::string> kScenarios = {"lattice", "bernoulli-lattice", "fibonacci",
                                             "bernoulli-fibonacci", "custom-comb-file"};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v))
    throw Error(ErrorKind::InvalidConfig, key + ": bad number '" + value + "'");
  return v;
}

std::vector<double> numbers(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& s : split(value, ',')) out.push_back(number(key, s));
  return out;
}

bool boolean(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw Error(ErrorKind::InvalidConfig, key + ": expected a boolean, got '" + value + "'");
}

// Decimal string as an exact rational num / 10^k.
InternalValue decimal(const std::string& text) {
  std::string s = text;
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s = s.substr(1);
  }
  const auto dot = s.find('.');
  std::string digits = s;
  std::size_t frac = 0;
  if (dot != std::string::npos) {
    digits = s.substr(0, dot) + s.substr(dot + 1);
    frac = s.size() - dot - 1;
  }
  if (digits.empty() || frac > 9 || digits.size() > 17 ||
      !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw Error(ErrorKind::InvalidConfig, "window_shift: expected a short decimal, got '" + text + "'");
  std::int64_t num = std::stoll(digits);
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac; ++i) den *= 10;
  return {negative ? -num : num, 0, den};
}

Window config_window(const ExperimentConfig& c) {
  const auto scheme = CutProjectScheme::fibonacci();
  Window w = Window::fibonacci();
  if (!c.window_text.empty()) {
    const auto v = numbers("window", c.window_text);
    if (v.size() != 2) throw Error(ErrorKind::InvalidConfig, "window: expected lo,hi");
    if (!(v[0] < v[1])) throw Error(ErrorKind::InvalidConfig, "window: lo must be below hi");
    const bool standard = std::fabs(v[0] - w.lo()) < 1e-9 && std::fabs(v[1] - w.hi()) < 1e-9;
    if (!standard) w = Window(v[0], v[1]);
  }
  if (!c.window_shift.empty()) w = w.shifted(scheme, decimal(c.window_shift));
  return w;
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

SpectralOptions spectral_options(const ExperimentConfig& c) {
  SpectralOptions o;
  o.taper_scale = c.taper;
  o.scan = c.scan.value_or(c.scenario != "fibonacci" && c.scenario != "bernoulli-fibonacci");
  return o;
}

std::string seed_tag(const ExperimentConfig& c, std::uint64_t seed) {
  return is_random(c) ? "seed" + std::to_string(seed) : std::string("base");
}

// ---------------------------------------------------------------------------
// Pipeline state shared by the stages.

struct Pipeline {
  const ExperimentConfig& config;
  std::ostream& log;
  fs::path dir;
  RunResult result;
  VanHoveSequence seq;
  std::vector<double> candidates;
  bool patch_written = false;

  Pipeline(const ExperimentConfig& c, std::ostream& l)
      : config(c), log(l), dir(c.output_dir), seq(van_hove(c)), candidates(candidate_frequencies(c)) {}

  fs::path artifact(const std::string& name) {
    fs::path p = dir / name;
    result.artifacts.push_back(p);
    return p;
  }

  void check(std::string name, bool pass, std::string detail, const fs::path& backing) {
    log << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    result.checks.push_back({std::move(name), pass, std::move(detail), backing.filename().string()});
  }
};

Comb stage_generate(Pipeline& p, std::uint64_t seed) {
  const Comb comb = generate(p.config, seed);
  const std::string tag = seed_tag(p.config, seed);
  write_comb(comb, p.artifact("comb_" + tag + ".txt"));
  if (p.config.scenario == "fibonacci" || p.config.scenario == "bernoulli-fibonacci") {
    if (!p.patch_written) {
      write_patch(base_set(p.config).points(sample_region(p.config)), p.artifact("patch.txt"));
      p.patch_written = true;
    }
  }
  p.log << "generated " << comb.size() << " atoms (" << tag << ")\n";
  return comb;
}

void stage_autocorr(Pipeline& p, const Comb& comb, const std::string& tag) {
  bool hermitian = true;
  bool positive = true;
  std::string worst;
  fs::path last;
  for (std::size_t n = 0; n < p.seq.size(); ++n) {
    const Autocorr gamma = block_autocorr(comb, p.seq, n, p.config.autocorr_max_lag);
    last = p.artifact("autocorr_" + tag + "_n" + std::to_string(n) + ".txt");
    write_autocorr(gamma, last);
    const double defect = hermitian_defect(gamma.comb);
    if (!(defect <= 1e-12)) {
      hermitian = false;
      worst = "index " + std::to_string(n) + " defect " + fmt(defect);
    }
    const auto verdict = check_positive_definite(gamma, standard_test_battery());
    if (!verdict.pass) {
      positive = false;
      worst = "index " + std::to_string(n) + ": " + verdict.violation;
    }
  }
  p.check("hermitian-" + tag, hermitian, hermitian ? "all indices symmetric" : worst, last);
  p.check("positive-definite-" + tag, positive, positive ? "no violation found" : worst, last);
}

DiffractionEstimate stage_diffract(Pipeline& p, const Comb& comb, const std::string& tag) {
  const auto est = split_pp_cont(comb, p.seq, p.candidates, p.config.grid, spectral_options(p.config));
  write_diffraction_csv(est, p.artifact("diffraction_" + tag + ".csv"));
  const auto [a, d] = emit_plot_data(est, p.dir / ("plot_" + tag));
  p.result.artifacts.push_back(a);
  p.result.artifacts.push_back(d);
  for (const auto& w : est.warnings) p.log << "warning (" << tag << "): " << w << "\n";
  return est;
}

void check_lattice_oracle(Pipeline& p, const DiffractionEstimate& est, complex mean, double variance,
                          const std::string& tag, double atom_tol, double density_tol,
                          bool relative_density) {
  const fs::path csv = p.dir / ("diffraction_" + tag + ".csv");
  const double s = p.config.lattice_spacing;
  const double expected_atom = std::norm(mean) / (s * s);
  const double expected_density = variance / s;
  double worst_atom = 0.0;
  std::size_t missing = 0;
  for (double k = std::ceil(p.config.grid.lo * s); k <= p.config.grid.hi * s + 1e-9; k += 1.0) {
    const auto a = est.atom_near(k / s, 1e-6);
    if (!a) {
      ++missing;
      continue;
    }
    const double err = std::fabs(a->intensity - expected_atom);
    worst_atom = std::max(worst_atom, expected_atom > 0.0 ? err / expected_atom : err);
  }
  p.check("bragg-atoms-" + tag, missing == 0 && worst_atom <= atom_tol,
          "expected " + fmt(expected_atom) + ", worst deviation " + fmt(worst_atom) + ", missing " +
              std::to_string(missing),
          csv);
  double worst_density = 0.0;
  for (const auto& d : est.density_samples) {
    if (relative_density && d.near_atom) continue;
    const double err = std::fabs(d.density - expected_density);
    worst_density = std::max(worst_density, relative_density ? err / expected_density : err);
  }
  p.check("density-" + tag, worst_density <= density_tol,
          "expected " + fmt(expected_density) + ", worst deviation " + fmt(worst_density), csv);
}

void stage_identity(Pipeline& p, const Comb& comb, const std::string& tag) {
  const auto phi = TestFunction::tent(0.0, p.config.phi_half_width);
  const double band = fourier_band(phi) + 1.0;
  ExperimentConfig local = p.config;
  local.grid = {-band, band, std::min(p.config.grid.step, 1.0 / (8.0 * phi.half_width))};
  SpectralOptions opt = spectral_options(p.config);
  opt.scan = false;
  const auto cand = candidate_frequencies(local);
  const auto est = split_pp_cont(comb, p.seq, cand, local.grid, opt);
  const auto id = verify_diffraction_identity(comb, p.seq, p.seq.size() - 1, est, phi);
  const fs::path path = p.artifact("identity_" + tag + ".txt");
  std::ostringstream os;
  os.precision(17);
  os << "lhs " << id.lhs << "\nrhs " << id.rhs << "\natom_part " << id.atom_part << "\ndensity_part "
     << id.density_part << "\nrelative_gap " << id.relative_gap << "\n";
  write_text(path, os.str());
  p.check("diffraction-identity-" + tag, id.relative_gap <= 0.01,
          "lhs " + fmt(id.lhs) + " rhs " + fmt(id.rhs) + " gap " + fmt(id.relative_gap), path);
}

void stage_cross_consistency(Pipeline& p, const Comb& comb, const DiffractionEstimate& est,
                             const std::string& tag) {
  const std::size_t n = p.seq.size() - 1;
  const double vol = p.seq.volume(n);
  if (static_cast<double>(comb.size()) * vol > 5e7) return;
  const Autocorr gamma = windowed_autocorr(comb, p.seq.window(n), 0.5 * vol);
  const double radius = 0.45 * vol;
  double worst = 0.0;
  std::size_t compared = 0;
  const fs::path path = p.artifact("cross_consistency_" + tag + ".csv");
  std::string csv = "omega,bragg,autocorr\n";
  for (const auto& a : est.atoms) {
    if (a.kind != AtomKind::Atom || a.intensity < 1e-2) continue;
    const double direct = bragg_intensity(comb, a.omega, p.seq, n);
    const double via = atom_from_autocorr(gamma, a.omega, radius);
    worst = std::max(worst, std::fabs(direct - via) / std::max(0.02 * direct, 5.0 / vol));
    csv += format_double(a.omega) + "," + format_double(direct) + "," + format_double(via) + "\n";
    ++compared;
  }
  write_text(path, csv);
  p.check("cross-consistency-" + tag, worst <= 1.0,
          std::to_string(compared) + " atoms, worst gap / max(2% I, 5/|A|) " + fmt(worst),
          path);
}

void stage_fibonacci_checks(Pipeline& p, const Comb& comb, const std::string& tag) {
  const std::size_t n = p.seq.size() - 1;
  const Interval a = p.seq.window(n);
  std::size_t count = 0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < comb.size(); ++i) {
    if (comb.positions[i] >= a.lo && comb.positions[i] < a.hi) {
      ++count;
      weighted += comb.weights[i].real();
    }
  }
  const double density = static_cast<double>(count) / a.length();
  const Window w = config_window(p.config);
  const double expected = w.length() / CutProjectScheme::fibonacci().covolume();
  const double zero = bragg_intensity(comb, 0.0, p.seq, n);
  const double mean_density = weighted / a.length();
  const fs::path path = p.artifact("zero_peak_" + tag + ".txt");
  std::ostringstream os;
  os.precision(17);
  os << "points " << count << "\nvolume " << a.length() << "\ndensity " << density << "\nexpected "
     << expected << "\nweighted_density " << mean_density << "\nintensity_at_zero " << zero << "\n";
  write_text(path, os.str());
  const double dens_gap = std::fabs(density - expected) / expected;
  p.check("point-density-" + tag, dens_gap <= 1e-3,
          fmt(density, 8) + " vs " + fmt(expected, 8) + " (gap " + fmt(dens_gap) + ")", path);
  const double zero_gap = std::fabs(zero - mean_density * mean_density) / (mean_density * mean_density);
  p.check("zero-peak-" + tag, zero_gap <= 0.01,
          "I(0) " + fmt(zero, 8) + " vs density^2 " + fmt(mean_density * mean_density, 8), path);
}

void stage_torus(Pipeline& p) {
  const auto scheme = CutProjectScheme::fibonacci();
  const Window shifted = config_window(p.config);
  ExperimentConfig plain = p.config;
  plain.window_shift.clear();
  const Window window = config_window(plain);
  const PointPatch patch = model_set(scheme, shifted, {-200.0, 200.0});
  const TorusClass tc = torus_parametrize(patch, scheme, window);
  const double expected = p.config.window_shift.empty() ? 0.0 : decimal(p.config.window_shift).value(scheme);
  const fs::path path = p.artifact("torus.txt");
  std::ostringstream os;
  os.precision(17);
  os << "t " << tc.t << "\nw " << tc.w << "\nw_lo " << tc.w_lo << "\nw_hi " << tc.w_hi << "\nwidth "
     << tc.width << "\nalpha " << tc.alpha << "\nbeta " << tc.beta << "\n";
  write_text(path, os.str());
  const auto target = torus_coordinates(scheme, expected, 0.0);
  const double dist = torus_distance({tc.alpha, tc.beta}, target);
  const bool pass = tc.t == 0.0 && expected >= tc.w_lo - 1e-12 && expected <= tc.w_hi + 1e-12 &&
                    tc.width < 1e-2;
  p.check("torus", pass,
          "w " + fmt(tc.w, 8) + " expected " + fmt(expected, 8) + " width " + fmt(tc.width) +
              " torus distance " + fmt(dist),
          path);
}

void stage_decompose(Pipeline& p) {
  const auto model = weight_model(p.config);
  std::vector<DecompositionReport> reports;
  for (auto seed : p.config.seeds) {
    reports.push_back(verify_decomposition(model, seed, sample_region(p.config), p.seq, p.candidates,
                                           p.config.grid, spectral_options(p.config)));
    const auto& r = reports.back();
    const std::string tag = seed_tag(p.config, seed);
    write_diffraction_csv(r.gamma_hat, p.artifact("diffraction_" + tag + ".csv"));
    write_diffraction_csv(r.gamma_hat_p, p.artifact("diffraction_" + tag + "_p.csv"));
    write_diffraction_csv(r.gamma_hat_c, p.artifact("diffraction_" + tag + "_c.csv"));
    for (const auto* e : {&r.gamma_hat, &r.gamma_hat_p, &r.gamma_hat_c}) {
      const std::string suffix = e == &r.gamma_hat ? "" : (e == &r.gamma_hat_p ? "_p" : "_c");
      const auto [a, d] = emit_plot_data(*e, p.dir / ("plot_" + tag + suffix));
      p.result.artifacts.push_back(a);
      p.result.artifacts.push_back(d);
    }
  }
  const auto consistency = check_seed_consistency(reports);
  const fs::path csv = p.artifact("decomposition.csv");
  write_decomposition_csv(reports, csv);
  write_text(p.artifact("decomposition_summary.txt"), decomposition_summary(reports, consistency));

  const bool lattice = p.config.scenario == "bernoulli-lattice";
  const double dens = base_set(p.config).density();
  for (const auto& r : reports) {
    const std::string tag = seed_tag(p.config, r.seed);
    p.check("bitwise-additivity-" + tag, r.bitwise_additive, r.bitwise_additive ? "exact" : "mismatch", csv);
    const bool support = r.support_violations_p == 0 && r.support_violations_c == 0;
    p.check("support-inheritance-" + tag, support,
            std::to_string(r.support_violations_p) + "/" + std::to_string(r.support_violations_c) +
                " violations",
            csv);
    p.check("additivity-gap-" + tag, r.additivity_gap < 0.03, "gap " + fmt(r.additivity_gap) + " over " + std::to_string(r.atoms_compared) + " atoms and " +
                std::to_string(r.densities_compared) + " density samples",
            csv);
    p.check("pp-purity-" + tag, r.pp_purity < 0.01, "largest atom in continuous part " + fmt(r.pp_purity), csv);
    if (lattice) {
      check_lattice_oracle(p, r.gamma_hat_p, model.mean(), 0.0, tag + "_p", 0.03, 1e-2, false);
    }
    // Continuous part: flat density Var * dens away from atoms.
    const double expected = model.variance() * dens;
    double worst = 0.0;
    for (const auto& s : r.gamma_hat_c.density_samples)
      if (!s.near_atom) worst = std::max(worst, std::fabs(s.density - expected) / std::max(expected, 1e-12));
    const double tol = lattice ? 0.03 : 0.05;
    p.check("continuous-density-" + tag, worst <= tol,
            "expected " + fmt(expected) + ", worst relative deviation " + fmt(worst),
            p.dir / ("diffraction_" + tag + "_c.csv"));
  }
  if (reports.size() > 1) p.check("seed-consistency", consistency.consistent, consistency.detail, csv);
}

void stage_sigma(Pipeline& p, const Comb& comb, const std::string& tag) {
  const auto& sigma = *p.config.sigma;
  std::vector<double> atoms;
  for (double c : p.candidates)
    if (c >= p.config.grid.lo - 1e-9 && c <= p.config.grid.hi + 1e-9) atoms.push_back(c);
  std::vector<double> densities;
  if (is_random(p.config)) {
    const auto grid = p.config.grid.points();
    const std::size_t stride = std::max<std::size_t>(1, grid.size() / 60);
    const double guard = 2.0 / p.seq.volume(p.seq.size() - 1);
    for (std::size_t k = 0; k < grid.size(); k += stride) {
      const bool near = std::any_of(p.candidates.begin(), p.candidates.end(),
                                    [&](double c) { return std::fabs(c - grid[k]) < guard; });
      if (!near) densities.push_back(grid[k]);
    }
  }
  const auto report = verify_sigma_diffraction(comb, sigma, p.seq, p.seq.size() - 1, atoms, densities);
  const fs::path path = p.artifact("sigma_" + tag + ".csv");
  write_sigma_csv(report, path);
  double worst_atom = 0.0;
  double worst_density = 0.0;
  double extinguished = 0.0;
  for (const auto& r : report.rows) {
    if (r.excluded) {
      if (r.atom) extinguished = std::max(extinguished, r.transformed);
      continue;
    }
    (r.atom ? worst_atom : worst_density) = std::max(r.atom ? worst_atom : worst_density, r.relative_gap);
  }
  const double atom_tol = is_random(p.config) ? 0.05 : 0.01;
  p.check("sigma-atoms-" + tag, worst_atom <= atom_tol && extinguished < 1e-3,
          "worst relative gap " + fmt(worst_atom) + ", largest extinguished atom " + fmt(extinguished),
          path);
  if (!densities.empty())
    p.check("sigma-density-" + tag, worst_density <= 0.05, "worst relative gap " + fmt(worst_density), path);
}

void write_summary(Pipeline& p, const std::string& command) {
  std::ostringstream os;
  os << "# difflab " << command << " summary generated " << timestamp() << "\n";
  os << "scenario " << p.config.scenario << "\n";
  for (const auto& c : p.result.checks)
    os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << " [" << c.artifact << "]\n";
  write_text(p.dir / "summary.txt", os.str());
  p.result.artifacts.push_back(p.dir / "summary.txt");
}

Comb input_comb(const ExperimentConfig& c, std::uint64_t seed) { return generate(c, seed); }

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "scenario") {
    if (std::find(kScenarios.begin(), kScenarios.end(), value) == kScenarios.end())
      throw Error(ErrorKind::InvalidConfig, "unknown scenario '" + value + "'");
    c.scenario = value;
  } else if (key == "comb_file") {
    c.comb_file = value;
  } else if (key == "region") {
    const auto v = numbers(key, value);
    if (v.size() != 2) throw Error(ErrorKind::InvalidConfig, "region: expected lo,hi");
    c.region = Interval{v[0], v[1]};
  } else if (key == "L0" || key == "l0") {
    c.l0 = number(key, value);
  } else if (key == "n_list" || key == "n") {
    c.n_list = numbers(key, value);
  } else if (key == "grid") {
    const auto v = numbers(key, value);
    if (v.size() != 3) throw Error(ErrorKind::InvalidConfig, "grid: expected lo,hi,step");
    c.grid = {v[0], v[1], v[2]};
  } else if (key == "candidates") {
    c.candidates = value == "auto" ? std::vector<double>{} : numbers(key, value);
  } else if (key == "max_coeff") {
    c.max_coeff = static_cast<int>(number(key, value));
  } else if (key == "sigma") {
    c.sigma = BoundedAtomicMeasure::parse(value);
  } else if (key == "seed" || key == "seeds") {
    c.seeds.clear();
    for (double s : numbers(key, value)) {
      if (s < 0 || s != std::floor(s)) throw Error(ErrorKind::InvalidConfig, "seeds must be nonnegative integers");
      c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  } else if (key == "out" || key == "output_dir") {
    c.output_dir = value;
  } else if (key == "law") {
    if (value == "bernoulli") c.law = WeightLaw::bernoulli(c.law.p);
    else if (value == "two-point") c.law = WeightLaw::two_point(c.law.a, c.law.b, c.law.p);
    else if (value == "uniform-complex") c.law = WeightLaw::uniform_complex(c.law.radius);
    else throw Error(ErrorKind::InvalidConfig, "unknown law '" + value + "'");
  } else if (key == "p") {
    c.law.p = number(key, value);
  } else if (key == "a") {
    c.law.a = number(key, value);
  } else if (key == "b") {
    c.law.b = number(key, value);
  } else if (key == "radius" || key == "r") {
    c.law.radius = number(key, value);
  } else if (key == "base") {
    if (value == "lattice") {
      if (c.scenario == "bernoulli-fibonacci") c.scenario = "bernoulli-lattice";
      if (c.scenario == "fibonacci") c.scenario = "lattice";
    } else if (value == "fibonacci") {
      if (c.scenario == "bernoulli-lattice") c.scenario = "bernoulli-fibonacci";
      if (c.scenario == "lattice") c.scenario = "fibonacci";
    } else {
      throw Error(ErrorKind::InvalidConfig, "unknown base '" + value + "'");
    }
  } else if (key == "window") {
    c.window_text = value;
  } else if (key == "window_shift") {
    c.window_shift = value;
  } else if (key == "spacing") {
    c.lattice_spacing = number(key, value);
  } else if (key == "taper") {
    c.taper = number(key, value);
  } else if (key == "scan") {
    c.scan = boolean(key, value);
  } else if (key == "identity") {
    c.identity = boolean(key, value);
  } else if (key == "phi_half_width") {
    c.phi_half_width = number(key, value);
  } else if (key == "autocorr_max_lag") {
    c.autocorr_max_lag = number(key, value);
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::string token;
    while (words >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0)
        throw Error(ErrorKind::InvalidConfig, "expected key=value, got '" + token + "'");
      apply_setting(c, token.substr(0, eq), token.substr(eq + 1));
    }
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::InvalidConfig, m); };
  if (std::find(kScenarios.begin(), kScenarios.end(), c.scenario) == kScenarios.end())
    bad("unknown scenario '" + c.scenario + "'");
  if (c.n_list.empty()) bad("n_list is empty");
  for (std::size_t i = 0; i < c.n_list.size(); ++i) {
    if (!(c.n_list[i] > 0)) bad("n_list entries must be positive");
    if (i && !(c.n_list[i] > c.n_list[i - 1])) bad("n_list must be increasing");
  }
  if (!(c.l0 > 0)) bad("L0 must be positive");
  if (!(c.grid.step > 0)) bad("grid spacing must be positive");
  if (!(c.grid.hi >= c.grid.lo)) bad("grid hi must not be below lo");
  if (!(c.taper > 0)) bad("taper must be positive");
  if (!(c.phi_half_width > 0)) bad("phi_half_width must be positive");
  if (!(c.autocorr_max_lag > 0)) bad("autocorr_max_lag must be positive");
  if (!(c.lattice_spacing > 0)) bad("spacing must be positive");
  if (c.seeds.empty()) bad("no seeds");
  if (c.region && !(c.region->hi > c.region->lo)) bad("region lo must be below hi");
  try {
    (void)c.law.mean();
    if (c.law.kind != WeightLaw::Kind::UniformComplex && !(c.law.p >= 0 && c.law.p <= 1))
      bad("law p must lie in [0,1]");
    if (c.law.kind == WeightLaw::Kind::UniformComplex && !(c.law.radius >= 0)) bad("radius must be nonnegative");
    if (!c.window_text.empty() || c.scenario == "fibonacci" || c.scenario == "bernoulli-fibonacci")
      (void)config_window(c);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidConfig) throw;
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  if (c.scenario == "custom-comb-file") {
    if (c.comb_file.empty()) bad("custom-comb-file needs comb_file=");
    if (!fs::exists(c.comb_file)) bad("comb file " + c.comb_file.string() + " does not exist");
  }
  const VanHoveSequence seq = van_hove(c);
  const Interval region = c.scenario == "custom-comb-file" ? Interval{} : sample_region(c);
  if (c.scenario != "custom-comb-file" && !region.contains(seq.window(seq.size() - 1)))
    bad("region does not contain the largest Van Hove window");
}

VanHoveSequence van_hove(const ExperimentConfig& c) {
  std::vector<double> half;
  for (double n : c.n_list) half.push_back(c.l0 * n);
  while (half.size() < 3) half.insert(half.begin(), half.front() / 2.0);
  return VanHoveSequence(half);
}

Interval sample_region(const ExperimentConfig& c) {
  if (c.region) return *c.region;
  const double l = c.l0 * c.n_list.back();
  Interval r{-l, l};
  if (c.sigma && !c.sigma->atoms().empty()) {
    // Room for the shrink of the region under convolution by sigma.
    r.lo -= std::max(0.0, std::ceil(c.sigma->max_position()));
    r.hi += std::max(0.0, std::ceil(-c.sigma->min_position()));
  }
  return r;
}

BaseSet base_set(const ExperimentConfig& c) {
  if (c.scenario == "fibonacci" || c.scenario == "bernoulli-fibonacci")
    return BaseSet::model_set(CutProjectScheme::fibonacci(), config_window(c));
  return BaseSet::lattice(c.lattice_spacing);
}

bool is_random(const ExperimentConfig& c) {
  return c.scenario == "bernoulli-lattice" || c.scenario == "bernoulli-fibonacci";
}

RandomWeightModel weight_model(const ExperimentConfig& c) {
  RandomWeightModel m;
  m.base = base_set(c);
  m.law = is_random(c) ? c.law : WeightLaw::bernoulli(1.0);
  return m;
}

Comb generate(const ExperimentConfig& c, std::uint64_t seed) {
  if (c.scenario == "custom-comb-file") return read_comb(c.comb_file);
  const auto model = weight_model(c);
  Comb comb = sample(model, seed, sample_region(c));
  return comb;
}

std::vector<double> candidate_frequencies(const ExperimentConfig& c) {
  if (!c.candidates.empty()) return c.candidates;
  const double margin = SpectralOptions{}.atom_margin;
  const Interval range{c.grid.lo - margin, c.grid.hi + margin};
  if (c.scenario == "fibonacci" || c.scenario == "bernoulli-fibonacci")
    return dual_frequencies(CutProjectScheme::fibonacci(), range, c.max_coeff);
  if (c.scenario == "custom-comb-file") return {};
  std::vector<double> out;
  const double s = c.lattice_spacing;
  for (double k = std::ceil(range.lo * s); k <= range.hi * s; k += 1.0) out.push_back(k / s);
  return out;
}

std::string error_record(const std::string& kind, const std::string& message, const std::string& stage) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  j["stage"] = stage;
  return j.dump();
}

RunResult execute(const std::string& command, const ExperimentConfig& config, bool dry_run,
                  std::ostream& log, std::ostream& err) {
  RunResult failed;
  std::string stage = "validate";
  try {
    validate(config);
    const std::vector<std::string> commands = {"generate", "autocorr", "diffract", "decompose",
                                               "verify-sigma", "run"};
    if (std::find(commands.begin(), commands.end(), command) == commands.end())
      throw Error(ErrorKind::InvalidConfig, "unknown command '" + command + "'");
    if (command == "decompose" && !is_random(config))
      throw Error(ErrorKind::InvalidConfig, "decompose needs a random-weight scenario");
    if (command == "verify-sigma" && !config.sigma)
      throw Error(ErrorKind::InvalidConfig, "verify-sigma needs sigma=");
    if (dry_run) {
      log << "config valid: scenario " << config.scenario << ", " << van_hove(config).size()
          << " Van Hove indices, " << config.seeds.size() << " seed(s)\n";
      return {};
    }

    Pipeline p(config, log);
    std::error_code ec;
    fs::create_directories(p.dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + p.dir.string());

    const bool random = is_random(config);
    const std::vector<std::uint64_t> seeds =
        random ? config.seeds : std::vector<std::uint64_t>{config.seeds.front()};

    if (command == "decompose") {
      stage = "decompose";
      stage_decompose(p);
    } else {
      for (auto seed : seeds) {
        const std::string tag = seed_tag(config, seed);
        stage = "generate";
        const Comb comb = command == "generate" || command == "run" ? stage_generate(p, seed)
                                                                     : input_comb(config, seed);
        if (command == "autocorr" || command == "run") {
          stage = "autocorr";
          stage_autocorr(p, comb, tag);
        }
        if (command == "diffract" || (command == "run" && !random)) {
          stage = "diffract";
          const auto est = stage_diffract(p, comb, tag);
          if (command == "run") {
            if (config.scenario == "lattice")
              check_lattice_oracle(p, est, 1.0, 0.0, tag, 1e-3, 5e-3, false);
            if (config.scenario != "custom-comb-file") stage_cross_consistency(p, comb, est, tag);
          }
        }
        if (command == "run" && config.identity && !random) {
          stage = "identity";
          stage_identity(p, comb, tag);
        }
        if (command == "run" && config.scenario == "fibonacci") {
          stage = "fibonacci";
          stage_fibonacci_checks(p, comb, tag);
          stage_torus(p);
        }
        if (command == "verify-sigma" || (command == "run" && config.sigma)) {
          stage = "verify-sigma";
          stage_sigma(p, comb, tag);
        }
      }
      if (command == "run" && random) {
        stage = "decompose";
        stage_decompose(p);
      }
    }
    stage = "summary";
    write_summary(p, command);
    const bool all = std::all_of(p.result.checks.begin(), p.result.checks.end(),
                                 [](const CheckResult& c) { return c.pass; });
    p.result.exit_code = all ? kExitOk : kExitCheckFailed;
    return p.result;
  } catch (const Error& e) {
    err << error_record(std::string(to_string(e.kind())), e.what(), stage) << "\n";
    failed.exit_code = e.kind() == ErrorKind::InvalidConfig ? kExitInvalidConfig
                       : e.kind() == ErrorKind::Io          ? kExitIoError
                                                            : kExitModuleError;
  } catch (const std::exception& e) {
    err << error_record("internal", e.what(), stage) << "\n";
    failed.exit_code = kExitModuleError;
  }
  return failed;
}

}  // namespace difflab
