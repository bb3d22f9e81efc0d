#include "difflab/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "difflab/error.hpp"
#include "difflab/parallel.hpp"

namespace difflab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// d with fl(p + d) == c, starting from fl(c - p).
double exact_difference(double c, double p) {
  double d = c - p;
  for (int i = 0; i < 64 && p + d != c; ++i)
    d = std::nextafter(d, (p + d < c) ? INFINITY : -INFINITY);
  return d;
}

double trapezoid_abs(const std::vector<DensitySample>& s) {
  double total = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i)
    total += 0.5 * (std::fabs(s[i].density) + std::fabs(s[i - 1].density)) *
             (s[i].omega - s[i - 1].omega);
  return total;
}

double intensity_near(const DiffractionEstimate& est, double omega, double tol) {
  const auto a = est.atom_near(omega, tol);
  return a ? a->intensity : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Laws

WeightLaw WeightLaw::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "bernoulli p must lie in [0,1]");
  return {Kind::Bernoulli, p, 0.0, 1.0, 0.0};
}

WeightLaw WeightLaw::two_point(double a, double b, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "two-point p must lie in [0,1]");
  return {Kind::TwoPoint, p, a, b, 0.0};
}

WeightLaw WeightLaw::uniform_complex(double radius) {
  if (!(radius >= 0.0)) throw Error(ErrorKind::InvalidArgument, "modulus bound must be nonnegative");
  return {Kind::UniformComplex, 0.0, 0.0, 0.0, radius};
}

complex WeightLaw::mean() const {
  if (kind == Kind::UniformComplex) return 0.0;
  return a + (b - a) * p;
}

double WeightLaw::variance() const {
  if (kind == Kind::UniformComplex) return radius * radius / 2.0;
  return (b - a) * (b - a) * p * (1.0 - p);
}

bool WeightLaw::nonnegative() const {
  if (kind == Kind::UniformComplex) return radius == 0.0;
  return (a >= 0.0 || p == 1.0) && (b >= 0.0 || p == 0.0);
}

std::string WeightLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::Bernoulli: os << "bernoulli p=" << p; break;
    case Kind::TwoPoint: os << "two-point a=" << a << " b=" << b << " p=" << p; break;
    case Kind::UniformComplex: os << "uniform-complex r=" << radius; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Base sets

BaseSet BaseSet::lattice(double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorKind::InvalidArgument, "lattice spacing must be positive");
  return BaseSet(CutProjectScheme::lattice(), std::nullopt, spacing);
}

BaseSet BaseSet::model_set(CutProjectScheme scheme, Window window) {
  if (scheme.is_lattice()) return lattice(1.0);
  return BaseSet(std::move(scheme), std::move(window), 1.0);
}

const Window& BaseSet::window() const {
  if (!window_) throw Error(ErrorKind::InvalidArgument, "lattice base has no window");
  return *window_;
}

double BaseSet::density() const {
  if (is_lattice()) return 1.0 / spacing_;
  return window_->length() / scheme_.covolume();
}

std::string BaseSet::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (is_lattice()) {
    os << "lattice spacing=" << spacing_;
  } else {
    os << scheme_.name() << " window=" << window_->lo() << "," << window_->hi();
  }
  return os.str();
}

PointPatch BaseSet::points(const Interval& region) const {
  if (!is_lattice()) return difflab::model_set(scheme_, *window_, region);
  PointPatch patch = difflab::model_set(scheme_, Window(-0.5, 0.5),
                                        {region.lo / spacing_, region.hi / spacing_});
  patch.region = region;
  if (spacing_ != 1.0) {
    patch.points.clear();
    for (const auto& t : patch.tags) {
      const double x = static_cast<double>(t.m) * spacing_;
      if (x >= region.lo && x <= region.hi) patch.points.push_back(x);
    }
    if (patch.points.size() != patch.tags.size()) {
      // Rounding at the region edges: keep tags aligned with the points.
      std::vector<CpsPoint> tags;
      for (const auto& t : patch.tags) {
        const double x = static_cast<double>(t.m) * spacing_;
        if (x >= region.lo && x <= region.hi) tags.push_back(t);
      }
      patch.tags = std::move(tags);
    }
  }
  return patch;
}

bool BaseSet::contains(CpsPoint tag, double position) const {
  if (is_lattice()) {
    return tag.n == 0 && std::fabs(static_cast<double>(tag.m) * spacing_ - position) <= kMergeTolerance;
  }
  if (!window_->contains(scheme_, tag).inside) return false;
  return std::fabs(scheme_.physical(tag) - position) <= kMergeTolerance * std::max(1.0, std::fabs(position));
}

// ---------------------------------------------------------------------------

std::uint64_t point_hash(std::uint64_t seed, CpsPoint tag) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag.m));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(tag.n) * 0xD1B54A32D192ED03ULL));
  return h;
}

Comb sample(const RandomWeightModel& model, std::uint64_t seed, const Interval& region) {
  if (!std::isfinite(region.lo) || !std::isfinite(region.hi))
    throw Error(ErrorKind::InvalidArgument, "sample region must be bounded");
  const PointPatch patch = model.base.points(region);
  Comb comb;
  comb.positions = patch.points;
  comb.tags = patch.tags;
  comb.region = region;
  comb.weights.resize(patch.points.size());
  const WeightLaw& law = model.law;
  parallel_for(patch.points.size(), [&](std::size_t i) {
    const std::uint64_t h = point_hash(seed, patch.tags[i]);
    const double u = unit(h);
    switch (law.kind) {
      case WeightLaw::Kind::Bernoulli:
      case WeightLaw::Kind::TwoPoint:
        comb.weights[i] = u < law.p ? law.b : law.a;
        break;
      case WeightLaw::Kind::UniformComplex: {
        const double v = unit(splitmix64(h));
        comb.weights[i] = std::polar(law.radius * std::sqrt(u), 2.0 * std::numbers::pi * v);
        break;
      }
    }
  });
  comb.finalize();
  return comb;
}

std::size_t support_violations(const Comb& comb, const BaseSet& base) {
  if (!comb.exact()) {
    if (comb.empty()) return 0;
    throw Error(ErrorKind::NotInSystem, "support check needs exact tags");
  }
  std::size_t bad = 0;
  for (std::size_t i = 0; i < comb.size(); ++i)
    if (comb.weights[i] != complex{0.0} && !base.contains(comb.tags[i], comb.positions[i])) ++bad;
  return bad;
}

Decomposition decompose(const Comb& comb, const RandomWeightModel& model) {
  const PointPatch base = model.base.points(comb.region);
  // Map every atom of the comb to a base point.
  std::vector<complex> weights(base.size(), complex{0.0});
  std::size_t j = 0;
  for (std::size_t i = 0; i < comb.size(); ++i) {
    const double x = comb.positions[i];
    while (j < base.size() && base.points[j] < x - kMergeTolerance) ++j;
    const bool hit = j < base.size() && std::fabs(base.points[j] - x) <= kMergeTolerance &&
                     (!comb.exact() || comb.tags[i] == base.tags[j]);
    if (!hit) {
      if (comb.weights[i] == complex{0.0}) continue;
      std::ostringstream os;
      os.precision(17);
      os << "atom at " << x << " is not a point of the base set " << model.base.describe();
      throw Error(ErrorKind::NotInSystem, os.str());
    }
    weights[j] = comb.weights[i];
  }

  const complex mean = model.mean();
  Decomposition out;
  for (Comb* c : {&out.pure_point, &out.continuous}) {
    c->positions = base.points;
    c->tags = base.tags;
    c->region = comb.region;
    c->weights.resize(base.size());
  }
  for (std::size_t k = 0; k < base.size(); ++k) {
    out.pure_point.weights[k] = mean;
    out.continuous.weights[k] = {exact_difference(weights[k].real(), mean.real()),
                                 exact_difference(weights[k].imag(), mean.imag())};
  }
  out.pure_point.finalize();
  out.continuous.finalize();
  return out;
}

bool exactly_additive(const Comb& comb, const Decomposition& parts) {
  const Comb& p = parts.pure_point;
  const Comb& c = parts.continuous;
  if (p.positions != c.positions) return false;
  std::size_t i = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const complex sum{p.weights[k].real() + c.weights[k].real(),
                      p.weights[k].imag() + c.weights[k].imag()};
    complex target = 0.0;
    if (i < comb.size() && std::fabs(comb.positions[i] - p.positions[k]) <= kMergeTolerance) {
      target = comb.weights[i++];
    }
    if (sum.real() != target.real() || sum.imag() != target.imag()) return false;
  }
  // Atoms of the comb that were never matched must carry zero weight.
  for (; i < comb.size(); ++i)
    if (comb.weights[i] != complex{0.0}) return false;
  return true;
}

// ---------------------------------------------------------------------------

DecompositionReport verify_decomposition(const RandomWeightModel& model, std::uint64_t seed,
                                         const Interval& region, const VanHoveSequence& seq,
                                         const std::vector<double>& candidates,
                                         const FrequencyGrid& grid,
                                         const SpectralOptions& options) {
  if (seq.size() < 3) throw Error(ErrorKind::InvalidArgument, "need at least three Van Hove indices");
  DecompositionReport r;
  r.seed = seed;
  for (std::size_t n = 0; n < seq.size(); ++n) r.volumes.push_back(seq.volume(n));

  const Comb comb = sample(model, seed, region);
  r.sample_points = comb.size();
  const Decomposition parts = decompose(comb, model);
  r.bitwise_additive = exactly_additive(comb, parts);
  r.support_violations_p = support_violations(parts.pure_point, model.base);
  r.support_violations_c = support_violations(parts.continuous, model.base);
  if (model.law.nonnegative()) {
    for (const auto& w : parts.pure_point.weights)
      if (w.real() < 0.0 || w.imag() != 0.0) r.positivity_inherited = false;
  }

  r.gamma_hat = split_pp_cont(comb, seq, candidates, grid, options);
  r.gamma_hat_p = split_pp_cont(parts.pure_point, seq, candidates, grid, options);
  r.gamma_hat_c = split_pp_cont(parts.continuous, seq, candidates, grid, options);

  const double tol = 1.0 / seq.volume(seq.size() - 1);
  // Fluctuation level of a block-averaged intensity due to the continuous part;
  // the cross term then has relative size sqrt(2 noise / I).
  double level_c = 0.0;
  std::size_t samples = 0;
  for (const auto& s : r.gamma_hat_c.density_samples) {
    level_c += std::fabs(s.density);
    ++samples;
  }
  level_c = samples ? level_c / static_cast<double>(samples) : 0.0;
  r.atom_noise = level_c / (seq.volume(seq.size() - 1) *
                            static_cast<double>(std::max<std::size_t>(1, r.gamma_hat.blocks_at_n_max)));
  for (const auto& a : r.gamma_hat.atoms) {
    if (a.kind != AtomKind::Atom || a.intensity < 1e4 * r.atom_noise) continue;
    ++r.atoms_compared;
    const double parts_sum =
        intensity_near(r.gamma_hat_p, a.omega, tol) + intensity_near(r.gamma_hat_c, a.omega, tol);
    r.atom_additivity_gap = std::max(r.atom_additivity_gap,
                                     std::fabs(a.intensity - parts_sum) / a.intensity);
  }

  double level = 0.0;
  for (const auto& s : r.gamma_hat.density_samples)
    if (!s.near_atom) level = std::max(level, std::fabs(s.density));
  level = std::max(level, 1e-3);
  for (std::size_t k = 0; k < r.gamma_hat.density_samples.size(); ++k) {
    const auto& s = r.gamma_hat.density_samples[k];
    if (s.near_atom) continue;
    ++r.densities_compared;
    const double sum = r.gamma_hat_p.density_samples[k].density +
                       r.gamma_hat_c.density_samples[k].density;
    r.density_additivity_gap = std::max(r.density_additivity_gap,
                                        std::fabs(s.density - sum) / level);
  }
  r.additivity_gap = std::max(r.atom_additivity_gap, r.density_additivity_gap);

  for (const auto& a : r.gamma_hat_c.atoms) r.pp_purity = std::max(r.pp_purity, a.intensity);
  r.cont_purity = trapezoid_abs(r.gamma_hat_p.density_samples);
  return r;
}

std::vector<DecompositionReport> verify_decomposition(const RandomWeightModel& model,
                                                      const std::vector<std::uint64_t>& seeds,
                                                      const Interval& region,
                                                      const VanHoveSequence& seq,
                                                      const std::vector<double>& candidates,
                                                      const FrequencyGrid& grid,
                                                      const SpectralOptions& options) {
  if (seeds.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one seed");
  std::vector<DecompositionReport> out;
  for (auto s : seeds) out.push_back(verify_decomposition(model, s, region, seq, candidates, grid, options));
  return out;
}

SeedConsistency check_seed_consistency(const std::vector<DecompositionReport>& reports,
                                       double rel_tol) {
  SeedConsistency out;
  if (reports.size() < 2) return out;
  const auto& ref = reports.front();
  const double tol = 1.0 / ref.volumes.back();
  for (const auto& a : ref.gamma_hat.atoms) {
    if (a.kind != AtomKind::Atom) continue;
    for (std::size_t i = 1; i < reports.size(); ++i) {
      const auto b = reports[i].gamma_hat.atom_near(a.omega, tol);
      const double other = b ? b->intensity : 0.0;
      const double spread = std::fabs(other - a.intensity) / std::max(a.intensity, 1e-12);
      if (spread > out.atom_spread) out.atom_spread = spread;
    }
  }
  auto mean_density = [](const DiffractionEstimate& e) {
    double s = 0.0;
    std::size_t k = 0;
    for (const auto& d : e.density_samples) {
      if (d.near_atom) continue;
      s += d.density;
      ++k;
    }
    return k ? s / static_cast<double>(k) : 0.0;
  };
  const double d0 = mean_density(ref.gamma_hat_c);
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const double d = mean_density(reports[i].gamma_hat_c);
    const double spread = std::fabs(d - d0) / std::max(std::fabs(d0), 1e-3);
    out.density_spread = std::max(out.density_spread, spread);
  }
  out.consistent = out.atom_spread <= rel_tol && out.density_spread <= rel_tol;
  std::ostringstream os;
  os << "atom spread " << out.atom_spread << ", density spread " << out.density_spread;
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------

complex Observable::evaluate(const Comb& comb, double t) const {
  // Atoms of comb * delta_t sit at s + t.
  switch (kind) {
    case Kind::Constant: return 1.0;
    case Kind::Tent: {
      const auto phi = TestFunction::tent(0.0, half_width);
      const auto& x = comb.positions;
      auto it = std::upper_bound(x.begin(), x.end(), -t - half_width);
      complex sum = 0.0;
      for (; it != x.end() && *it < -t + half_width; ++it)
        sum += comb.weights[static_cast<std::size_t>(it - x.begin())] * phi(-(*it + t));
      return sum;
    }
    case Kind::SupportIndicator: {
      const auto& x = comb.positions;
      auto it = std::upper_bound(x.begin(), x.end(), -t - half_width);
      for (; it != x.end() && *it < -t + half_width; ++it)
        if (comb.weights[static_cast<std::size_t>(it - x.begin())] != complex{0.0}) return 1.0;
      return 0.0;
    }
  }
  return 0.0;
}

complex birkhoff_average(const Comb& comb, const Observable& f, const Interval& a) {
  if (a.empty()) throw Error(ErrorKind::InvalidArgument, "empty averaging window");
  if (f.kind != Observable::Kind::Constant) {
    const Interval reach{-a.hi - f.half_width, -a.lo + f.half_width};
    if (!comb.region.contains(reach))
      throw Error(ErrorKind::OutOfRegion, "comb does not cover the orbit segment");
  }
  const double h = f.half_width / 64.0;
  const auto steps = static_cast<std::size_t>(std::ceil(a.length() / h));
  const double dt = a.length() / static_cast<double>(steps);
  std::vector<complex> partial(steps);
  parallel_for(steps, [&](std::size_t k) {
    partial[k] = f.evaluate(comb, a.lo + (static_cast<double>(k) + 0.5) * dt);
  });
  complex sum = 0.0;
  for (const auto& v : partial) sum += v;
  return sum * dt / a.length();
}

complex birkhoff_average(const RandomWeightModel& model, std::uint64_t seed, const Observable& f,
                         const VanHoveSequence& seq, std::size_t n) {
  const Interval a = seq.window(n);
  const double pad = f.half_width + 1.0;
  const Comb comb = sample(model, seed, {-a.hi - pad, -a.lo + pad});
  return birkhoff_average(comb, f, a);
}

double support_density(const Comb& comb, double k_len, const VanHoveSequence& seq, std::size_t n) {
  if (!(k_len > 0.0)) throw Error(ErrorKind::InvalidArgument, "k_len must be positive");
  const Interval a = seq.window(n);
  const double h = k_len / 2.0;
  if (!comb.region.contains(Interval{a.lo - h, a.hi + h}))
    throw Error(ErrorKind::OutOfRegion, "comb region does not cover the fattened window");
  double covered = 0.0;
  double cur_lo = 0.0;
  double cur_hi = 0.0;
  bool open = false;
  for (std::size_t i = 0; i < comb.size(); ++i) {
    if (comb.weights[i] == complex{0.0}) continue;
    const double lo = std::max(comb.positions[i] - h, a.lo);
    const double hi = std::min(comb.positions[i] + h, a.hi);
    if (hi <= lo) continue;
    if (open && lo <= cur_hi) {
      cur_hi = std::max(cur_hi, hi);
      continue;
    }
    if (open) covered += cur_hi - cur_lo;
    cur_lo = lo;
    cur_hi = hi;
    open = true;
  }
  if (open) covered += cur_hi - cur_lo;
  return covered / a.length();
}

}  // namespace difflab
