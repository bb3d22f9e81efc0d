#include "difflab/diffraction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "difflab/error.hpp"
#include "difflab/parallel.hpp"

namespace difflab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// e^{-2 pi i omega t}, with the phase reduced modulo 1 in extended precision.
complex character(double omega, double t) {
  const long double x = static_cast<long double>(omega) * static_cast<long double>(t);
  const long double f = x - std::floor(x);
  return std::polar(1.0, -kTwoPi * static_cast<double>(f));
}

double sinc(double x) {
  const double px = std::numbers::pi * x;
  if (std::fabs(px) < 1e-8) return 1.0 - px * px / 6.0;
  return std::sin(px) / px;
}

struct IndexRange {
  std::size_t begin;
  std::size_t end;
};

std::vector<IndexRange> ranges_for(const Comb& comb, const std::vector<Interval>& blocks) {
  std::vector<IndexRange> out;
  out.reserve(blocks.size());
  const auto& x = comb.positions;
  for (const auto& b : blocks) {
    const auto i0 = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), b.lo) - x.begin());
    const auto i1 = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), b.hi) - x.begin());
    out.push_back({i0, i1});
  }
  return out;
}

double averaged_intensity(const Comb& comb, const std::vector<IndexRange>& ranges, double volume,
                          double omega) {
  double total = 0.0;
  for (const auto& r : ranges) {
    complex amp = 0.0;
    for (std::size_t i = r.begin; i < r.end; ++i)
      amp += comb.weights[i] * character(omega, comb.positions[i]);
    total += std::norm(amp) / (volume * volume);
  }
  return ranges.empty() ? 0.0 : total / static_cast<double>(ranges.size());
}

std::vector<Interval> select_blocks(const Comb& comb, const VanHoveSequence& seq, std::size_t n,
                                    std::size_t max_blocks) {
  auto blocks = van_hove_blocks(seq, n, comb.region);
  if (blocks.empty()) throw Error(ErrorKind::OutOfRegion, "Van Hove window exceeds the comb region");
  if (max_blocks > 0 && blocks.size() > max_blocks) {
    std::stable_sort(blocks.begin(), blocks.end(), [](const Interval& a, const Interval& b) {
      return std::fabs(a.lo + a.hi) < std::fabs(b.lo + b.hi);
    });
    blocks.resize(max_blocks);
    std::sort(blocks.begin(), blocks.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  }
  return blocks;
}

double atom_leakage(double omega, double taper_scale, const std::vector<AtomEstimate>& atoms) {
  double s = 0.0;
  for (const auto& a : atoms)
    if (a.kind == AtomKind::Atom) s += a.intensity * fejer_kernel(omega - a.omega, taper_scale);
  return s;
}

template <class F>
double golden_max(F&& f, double a, double b, int iterations = 60) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations && b - a > 1e-13 * std::max(1.0, std::fabs(a)); ++i) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    }
  }
  return fc > fd ? c : d;
}

AtomKind classify(const std::vector<double>& trace, const std::vector<double>& volumes,
                  const SpectralOptions& opt) {
  if (trace.size() < 3) return AtomKind::Unresolved;
  const auto [mn, mx] = std::minmax_element(trace.begin(), trace.end());
  if (*mx <= 1e-14) return AtomKind::ContinuousArtifact;
  const double mean = std::accumulate(trace.begin(), trace.end(), 0.0) / trace.size();
  if ((*mx - *mn) / mean < opt.stable_spread) return AtomKind::Atom;
  // log I = a + slope log |A|
  const std::size_t k = trace.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = std::log(volumes[i]);
    const double y = std::log(std::max(trace[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double cov = sxy - sx * sy / k;
  const double vx = sxx - sx * sx / k;
  const double vy = syy - sy * sy / k;
  const double slope = cov / vx;
  const double r2 = vy > 0 ? cov * cov / (vx * vy) : 1.0;
  if (r2 > opt.decay_r2 && std::fabs(slope + 1.0) < opt.decay_slope_tolerance)
    return AtomKind::ContinuousArtifact;
  return AtomKind::Unresolved;
}

}  // namespace

std::string_view to_string(AtomKind kind) {
  switch (kind) {
    case AtomKind::Atom: return "ATOM";
    case AtomKind::ContinuousArtifact: return "CONTINUOUS";
    case AtomKind::Unresolved: return "UNRESOLVED";
  }
  return "UNRESOLVED";
}

std::vector<double> FrequencyGrid::points() const {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

std::optional<AtomEstimate> DiffractionEstimate::atom_near(double omega, double tol) const {
  std::optional<AtomEstimate> best;
  for (const auto& a : atoms) {
    if (a.kind != AtomKind::Atom || std::fabs(a.omega - omega) > tol) continue;
    if (!best || std::fabs(a.omega - omega) < std::fabs(best->omega - omega)) best = a;
  }
  return best;
}

double DiffractionEstimate::max_abs_density(bool skip_near_atoms) const {
  double m = 0.0;
  for (const auto& s : density_samples)
    if (!(skip_near_atoms && s.near_atom)) m = std::max(m, std::fabs(s.density));
  return m;
}

double bragg_intensity(const Comb& comb, double omega, const VanHoveSequence& seq, std::size_t n) {
  const Interval a = seq.window(n);
  if (!comb.region.contains(a))
    throw Error(ErrorKind::OutOfRegion, "Van Hove window exceeds the comb region");
  return averaged_intensity(comb, ranges_for(comb, {a}), a.length(), omega);
}

double bragg_intensity_averaged(const Comb& comb, double omega, const VanHoveSequence& seq,
                                std::size_t n, std::size_t max_blocks) {
  const auto blocks = select_blocks(comb, seq, n, max_blocks);
  return averaged_intensity(comb, ranges_for(comb, blocks), seq.volume(n), omega);
}

std::vector<double> scan_intensities(const Comb& comb, const std::vector<Interval>& blocks,
                                     double omega0, double step, std::size_t count) {
  std::vector<double> out(count, 0.0);
  if (blocks.empty() || count == 0) return out;
  const auto ranges = ranges_for(comb, blocks);
  const double volume = blocks.front().length();
  constexpr std::size_t kChunk = 512;  // also the phasor reseeding period
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t k0 = c * kChunk;
    const std::size_t k1 = std::min(count, k0 + kChunk);
    const double w0 = omega0 + static_cast<double>(k0) * step;
    std::vector<complex> acc(k1 - k0);
    for (const auto& r : ranges) {
      std::fill(acc.begin(), acc.end(), complex{0.0});
      for (std::size_t i = r.begin; i < r.end; ++i) {
        const double t = comb.positions[i];
        complex z = comb.weights[i] * character(w0, t);
        const complex rot = character(step, t);
        for (auto& a : acc) {
          a += z;
          z *= rot;
        }
      }
      for (std::size_t k = k0; k < k1; ++k) out[k] += std::norm(acc[k - k0]) / (volume * volume);
    }
  });
  for (auto& v : out) v /= static_cast<double>(ranges.size());
  return out;
}

double atom_from_autocorr(const Autocorr& gamma, double omega, double avg_radius) {
  if (!(avg_radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "averaging radius must be positive");
  if (avg_radius > gamma.reliable_radius())
    throw Error(ErrorKind::BoundaryContamination,
                "averaging radius exceeds the reliable radius of the autocorrelation");
  const auto& z = gamma.comb.positions;
  auto it = std::lower_bound(z.begin(), z.end(), -avg_radius);
  complex sum = 0.0;
  for (; it != z.end() && *it <= avg_radius; ++it) {
    const auto i = static_cast<std::size_t>(it - z.begin());
    sum += gamma.debiased(i) * character(omega, *it);
  }
  sum /= 2.0 * avg_radius;
  if (std::fabs(sum.imag()) > 1e-6 * std::abs(sum) + 1e-12)
    throw Error(ErrorKind::InvalidArgument, "character average is not real: gamma not hermitian");
  return sum.real();
}

double fejer_kernel(double nu, double taper_scale) {
  const double s = sinc(taper_scale * nu);
  return taper_scale * s * s;
}

double continuous_density(const Autocorr& gamma, double omega, double taper_scale,
                          const std::vector<AtomEstimate>& atoms) {
  if (!(taper_scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "taper scale must be positive");
  const auto& z = gamma.comb.positions;
  auto it = std::upper_bound(z.begin(), z.end(), -taper_scale);
  complex sum = 0.0;
  for (; it != z.end() && *it < taper_scale; ++it) {
    const auto i = static_cast<std::size_t>(it - z.begin());
    const double w = 1.0 - std::fabs(*it) / taper_scale;
    sum += w * gamma.debiased(i) * character(omega, *it);
  }
  return sum.real() - atom_leakage(omega, taper_scale, atoms);
}

double periodogram_density(const Comb& comb, double omega, const VanHoveSequence& seq,
                           std::size_t n, const std::vector<AtomEstimate>& atoms,
                           std::size_t max_blocks) {
  const double vol = seq.volume(n);
  return vol * bragg_intensity_averaged(comb, omega, seq, n, max_blocks) -
         atom_leakage(omega, vol, atoms);
}

DiffractionEstimate split_pp_cont(const Comb& comb, const VanHoveSequence& seq,
                                  const std::vector<double>& candidates, const FrequencyGrid& grid,
                                  const SpectralOptions& opt) {
  if (seq.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty Van Hove sequence");
  DiffractionEstimate est;
  est.n_max = seq.size() - 1;
  est.taper_scale = opt.taper_scale;
  for (std::size_t n = 0; n < seq.size(); ++n) est.volumes.push_back(seq.volume(n));
  if (seq.size() < 3)
    est.warnings.emplace_back("fewer than three Van Hove indices: atoms stay unresolved");

  const std::size_t full_blocks = opt.block_average ? 0 : 1;
  std::vector<std::vector<IndexRange>> ranges(seq.size());
  for (std::size_t n = 0; n < seq.size(); ++n) {
    const auto blocks = opt.block_average ? select_blocks(comb, seq, n, 0)
                                          : std::vector<Interval>{seq.window(n)};
    if (!comb.region.contains(blocks.front()))
      throw Error(ErrorKind::OutOfRegion, "Van Hove window exceeds the comb region");
    ranges[n] = ranges_for(comb, blocks);
  }
  est.blocks_at_n_max = ranges.back().size();
  (void)full_blocks;

  const double search_lo = grid.lo - opt.atom_margin;
  const double search_hi = grid.hi + opt.atom_margin;

  // Frequencies to trace: candidates first, then significant scan maxima.
  std::vector<std::pair<double, bool>> tracked;
  for (double c : candidates) tracked.push_back({c, true});

  if (opt.scan) {
    const auto scan_blocks = opt.block_average ? select_blocks(comb, seq, 0, opt.max_scan_blocks)
                                               : std::vector<Interval>{seq.window(0)};
    const auto scan_ranges = ranges_for(comb, scan_blocks);
    const double vol0 = seq.volume(0);
    const double step = std::min(grid.step, 1.0 / (4.0 * vol0));
    const auto count = static_cast<std::size_t>(std::ceil((search_hi - search_lo) / step)) + 1;
    const auto levels = scan_intensities(comb, scan_blocks, search_lo, step, count);

    std::vector<double> sorted = levels;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double threshold = std::max(opt.significance * median, opt.min_atom_intensity);

    auto at = [&](std::size_t n, double w) {
      return averaged_intensity(comb, n == 0 ? scan_ranges : ranges[n], seq.volume(n), w);
    };
    // Leakage envelope I / (pi |A| nu)^2 of peaks already accounted for.
    std::vector<std::pair<double, double>> known;
    for (double c : candidates)
      if (c >= search_lo && c <= search_hi) known.push_back({c, at(0, c)});
    auto envelope = [&](double w) {
      double e = 0.0;
      for (const auto& [wk, ik] : known) {
        const double x = std::numbers::pi * vol0 * std::fabs(w - wk);
        e += ik * std::min(1.0, 1.0 / (x * x));
      }
      return 4.0 * e;
    };

    std::vector<std::size_t> maxima;
    for (std::size_t k = 1; k + 1 < count; ++k)
      if (levels[k] >= threshold && levels[k] >= levels[k - 1] && levels[k] >= levels[k + 1])
        maxima.push_back(k);
    std::stable_sort(maxima.begin(), maxima.end(),
                     [&](std::size_t a, std::size_t b) { return levels[a] > levels[b]; });
    constexpr std::size_t kMaxScanPeaks = 256;
    std::size_t accepted = 0;
    for (std::size_t k : maxima) {
      const double w0 = search_lo + static_cast<double>(k) * step;
      if (levels[k] <= envelope(w0)) continue;
      if (accepted == kMaxScanPeaks) {
        est.warnings.emplace_back("scan peak cap reached; weaker maxima were not traced");
        break;
      }
      double w = golden_max([&](double x) { return at(0, x); }, w0 - step, w0 + step);
      known.push_back({w, at(0, w)});
      // Follow the peak as the window grows.
      for (std::size_t n = 1; n < seq.size(); ++n) {
        const double half = 0.5 / seq.volume(n - 1);
        w = golden_max([&](double x) { return at(n, x); }, w - half, w + half);
      }
      tracked.push_back({w, false});
      ++accepted;
    }
  }

  // Deduplicate: scan peaks close to a candidate or to each other.
  const double merge = 2.0 / seq.volume(est.n_max);
  std::vector<std::pair<double, bool>> unique;
  std::stable_sort(tracked.begin(), tracked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& t : tracked) {
    const bool dup = std::any_of(unique.begin(), unique.end(), [&](const auto& u) {
      return std::fabs(u.first - t.first) < merge;
    });
    if (!dup) unique.push_back(t);
  }

  std::vector<AtomEstimate> traced(unique.size());
  parallel_for(unique.size(), [&](std::size_t i) {
    AtomEstimate a;
    a.omega = unique[i].first;
    a.from_candidate = unique[i].second;
    for (std::size_t n = 0; n < seq.size(); ++n)
      a.trace.push_back(averaged_intensity(comb, ranges[n], seq.volume(n), a.omega));
    a.intensity = a.trace.back();
    a.kind = classify(a.trace, est.volumes, opt);
    traced[i] = std::move(a);
  });
  for (auto& a : traced) {
    if (a.kind == AtomKind::ContinuousArtifact) est.rejected.push_back(std::move(a));
    else est.atoms.push_back(std::move(a));
  }
  auto by_omega = [](const AtomEstimate& l, const AtomEstimate& r) { return l.omega < r.omega; };
  std::sort(est.atoms.begin(), est.atoms.end(), by_omega);
  std::sort(est.rejected.begin(), est.rejected.end(), by_omega);

  // Continuous density on the requested grid.
  const Autocorr gamma = opt.block_average
                             ? block_autocorr(comb, seq, est.n_max, opt.taper_scale)
                             : windowed_autocorr(comb, seq.window(est.n_max), opt.taper_scale);
  const auto omegas = grid.points();
  est.density_samples.resize(omegas.size());
  const double exclusion = opt.near_atom_exclusion / opt.taper_scale;
  double strongest = 0.0;
  for (const auto& a : est.atoms)
    if (a.kind == AtomKind::Atom) strongest = std::max(strongest, a.intensity);
  const double flag_level = std::max(1e-6, opt.near_atom_fraction * strongest);
  parallel_for(omegas.size(), [&](std::size_t k) {
    DensitySample s;
    s.omega = omegas[k];
    s.taper_scale = opt.taper_scale;
    s.density = continuous_density(gamma, s.omega, opt.taper_scale, est.atoms);
    for (const auto& a : est.atoms)
      if (a.kind == AtomKind::Atom && a.intensity >= flag_level && std::fabs(a.omega - s.omega) < exclusion)
        s.near_atom = true;
    est.density_samples[k] = s;
  });

  double peak = 0.0;
  for (const auto& s : est.density_samples) peak = std::max(peak, s.density);
  for (const auto& s : est.density_samples) {
    if (!s.near_atom && s.density < -1e-3 * std::max(peak, 1e-12)) {
      est.warnings.emplace_back("negative density dip beyond -1e-3 of the peak");
      break;
    }
  }
  return est;
}

double fourier_band(const TestFunction& phi, double rel) {
  const double peak = std::norm(phi.fourier(0.0));
  if (peak == 0.0) return 0.0;
  const double step = 1.0 / (16.0 * phi.half_width);
  const double limit = 400.0 / phi.half_width;
  double last = 0.0;
  for (double w = 0.0; w <= limit; w += step)
    if (std::norm(phi.fourier(w)) >= rel * peak) last = w;
  return last + step;
}

IdentityCheck verify_diffraction_identity(const Comb& comb, const VanHoveSequence& seq,
                                          std::size_t n, const DiffractionEstimate& estimate,
                                          const TestFunction& phi) {
  IdentityCheck out;
  const Autocorr gamma = windowed_autocorr(comb, seq.window(n), 2.0 * phi.half_width);
  complex rhs = 0.0;
  for (std::size_t i = 0; i < gamma.comb.size(); ++i)
    rhs += gamma.comb.weights[i] * phi.self_correlation(gamma.comb.positions[i]);
  out.rhs = rhs.real();

  const double band = fourier_band(phi);
  const auto& samples = estimate.density_samples;
  if (comb.empty() && samples.empty()) return out;
  if (samples.size() < 2 || samples.front().omega > -band || samples.back().omega < band)
    throw Error(ErrorKind::Resolution, "density samples do not cover the band of |phi^|^2");
  const double max_step = 1.0 / (8.0 * phi.half_width);
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].omega - samples[i - 1].omega > max_step * (1.0 + 1e-9))
      throw Error(ErrorKind::Resolution, "density grid too coarse for the oscillation of phi^");

  for (const auto& a : estimate.atoms)
    if (a.kind == AtomKind::Atom && std::fabs(a.omega) <= band)
      out.atom_part += a.intensity * std::norm(phi.fourier(a.omega));
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const auto& l = samples[i - 1];
    const auto& r = samples[i];
    if (r.omega < -band || l.omega > band) continue;
    const double fl = l.density * std::norm(phi.fourier(l.omega));
    const double fr = r.density * std::norm(phi.fourier(r.omega));
    out.density_part += 0.5 * (fl + fr) * (r.omega - l.omega);
  }
  out.lhs = out.atom_part + out.density_part;
  out.relative_gap = std::fabs(out.lhs - out.rhs) / std::max(std::fabs(out.rhs), 1e-12);
  return out;
}

}  // namespace difflab
