#include "difflab/comb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "difflab/error.hpp"

namespace difflab {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (std::fabs(x) < 1e-8) return 1.0 - (kPi * x) * (kPi * x) / 6.0;
  return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

Comb Comb::from_patch(const PointPatch& patch, complex weight) {
  Comb c;
  c.positions = patch.points;
  c.weights.assign(patch.points.size(), weight);
  c.region = patch.region;
  c.tags = patch.tags;
  c.finalize();
  return c;
}

void Comb::finalize() {
  if (weights.size() != positions.size())
    throw Error(ErrorKind::InvalidArgument, "comb needs one weight per position");
  if (!tags.empty() && tags.size() != positions.size())
    throw Error(ErrorKind::InvalidArgument, "comb tags must match positions");
  for (std::size_t i = 1; i < positions.size(); ++i)
    if (!(positions[i] > positions[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "comb positions must be strictly increasing");
  bound = 0.0;
  for (const auto& w : weights) bound = std::max(bound, std::abs(w));
}

bool identical(const Comb& a, const Comb& b) {
  return a.positions == b.positions && a.weights == b.weights;
}

// ---------------------------------------------------------------------------
// Test functions

double TestFunction::operator()(double x) const {
  const double u = std::fabs(x - center) / half_width;
  if (u >= 1.0) return 0.0;
  if (kind == Kind::Tent) return amplitude * (1.0 - u);
  return amplitude * 0.5 * (1.0 + std::cos(kPi * u));
}

complex TestFunction::fourier(double omega) const {
  const double a = half_width;
  double mag = 0.0;
  if (kind == Kind::Tent) {
    const double s = sinc(a * omega);
    mag = amplitude * a * s * s;
  } else {
    const double v = 2.0 * a * omega;
    mag = amplitude * (a * sinc(v) + 0.5 * a * (sinc(v - 1.0) + sinc(v + 1.0)));
  }
  return mag * std::polar(1.0, -2.0 * kPi * omega * center);
}

double TestFunction::self_correlation(double z) const {
  const double a = half_width;
  const double u = std::fabs(z);
  const double amp2 = amplitude * amplitude;
  if (u >= 2.0 * a) return 0.0;
  if (kind == Kind::Tent) {
    const double v = u / a;
    if (v <= 1.0) return amp2 * a * (2.0 / 3.0 - v * v + 0.5 * v * v * v);
    const double r = 2.0 - v;
    return amp2 * a * r * r * r / 6.0;
  }
  const double len = 2.0 * a - u;
  const double arg = kPi * u / a;
  return amp2 * 0.25 * (len * (1.0 + 0.5 * std::cos(arg)) + 1.5 * a / kPi * std::sin(arg));
}

double TestFunction::integral() const { return amplitude * half_width; }

// ---------------------------------------------------------------------------

complex n_phi(const Comb& comb, const TestFunction& phi, bool* boundary_incomplete) {
  // phi(-t) != 0 only for t in (-center - hw, -center + hw).
  const double lo = -phi.center - phi.half_width;
  const double hi = -phi.center + phi.half_width;
  if (boundary_incomplete) *boundary_incomplete = lo < comb.region.lo || hi > comb.region.hi;
  auto first = std::lower_bound(comb.positions.begin(), comb.positions.end(), lo);
  complex sum = 0.0;
  for (auto it = first; it != comb.positions.end() && *it <= hi; ++it) {
    const auto i = static_cast<std::size_t>(it - comb.positions.begin());
    sum += comb.weights[i] * phi(-*it);
  }
  return sum;
}

double translation_bound(const Comb& comb, double k_len) {
  if (!(k_len > 0.0)) throw Error(ErrorKind::InvalidArgument, "k_len must be positive");
  const auto& x = comb.positions;
  const double last_start = comb.region.hi - k_len;
  double best = 0.0;
  auto window_mass = [&](double start) {
    auto b = std::lower_bound(x.begin(), x.end(), start);
    auto e = std::lower_bound(b, x.end(), start + k_len);
    double s = 0.0;
    for (auto it = b; it != e; ++it)
      s += std::abs(comb.weights[static_cast<std::size_t>(it - x.begin())]);
    return s;
  };
  // An optimal half-open window can start at an atom, or be pushed to the right edge.
  std::size_t j = 0;
  double running = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > last_start) break;
    if (j < i) {
      j = i;
      running = 0.0;
    }
    while (j < x.size() && x[j] < x[i] + k_len) running += std::abs(comb.weights[j++]);
    best = std::max(best, running);
    running -= std::abs(comb.weights[i]);
  }
  if (last_start >= comb.region.lo) best = std::max(best, window_mass(last_start));
  return best;
}

Comb restrict(const Comb& comb, const Interval& a) {
  Comb out;
  out.region = a;
  if (a.empty()) return out;
  if (!comb.region.contains(a))
    throw Error(ErrorKind::OutOfRegion, "restriction interval leaves the comb region");
  auto b = std::lower_bound(comb.positions.begin(), comb.positions.end(), a.lo);
  auto e = std::lower_bound(b, comb.positions.end(), a.hi);
  const auto i0 = static_cast<std::size_t>(b - comb.positions.begin());
  const auto i1 = static_cast<std::size_t>(e - comb.positions.begin());
  out.positions.assign(comb.positions.begin() + i0, comb.positions.begin() + i1);
  out.weights.assign(comb.weights.begin() + i0, comb.weights.begin() + i1);
  if (comb.exact()) out.tags.assign(comb.tags.begin() + i0, comb.tags.begin() + i1);
  out.finalize();
  return out;
}

Comb involute(const Comb& comb) {
  Comb out;
  const std::size_t n = comb.size();
  out.positions.resize(n);
  out.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.positions[i] = -comb.positions[n - 1 - i];
    out.weights[i] = std::conj(comb.weights[n - 1 - i]);
  }
  if (comb.exact()) {
    out.tags.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.tags[i] = -comb.tags[n - 1 - i];
  }
  out.region = {-comb.region.hi, -comb.region.lo};
  out.bound = comb.bound;
  return out;
}

Comb translate(const Comb& comb, double t) {
  Comb out = comb;
  for (auto& x : out.positions) x += t;
  out.region = {comb.region.lo + t, comb.region.hi + t};
  out.tags.clear();
  return out;
}

Comb scale(const Comb& comb, complex factor) {
  Comb out = comb;
  for (auto& w : out.weights) w *= factor;
  out.bound = comb.bound * std::abs(factor);
  return out;
}

Comb merge_atoms(std::vector<std::pair<double, complex>> atoms, Interval region) {
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  Comb out;
  out.region = region;
  double anchor = 0.0;
  for (const auto& [x, w] : atoms) {
    if (!out.positions.empty() && x - anchor <= kMergeTolerance) {
      out.weights.back() += w;
      continue;
    }
    anchor = x;
    out.positions.push_back(x);
    out.weights.push_back(w);
  }
  out.finalize();
  return out;
}

Comb add(const Comb& a, const Comb& b) {
  const Interval region = intersect(a.region, b.region);
  if (a.exact() && b.exact()) {
    std::unordered_map<CpsPoint, std::size_t, CpsPointHash> index;
    Comb out = a;
    out.region = region;
    std::vector<std::pair<double, std::pair<complex, CpsPoint>>> extra;
    for (std::size_t i = 0; i < a.size(); ++i) index.emplace(a.tags[i], i);
    for (std::size_t j = 0; j < b.size(); ++j) {
      auto it = index.find(b.tags[j]);
      if (it != index.end()) {
        out.weights[it->second] += b.weights[j];
      } else {
        extra.push_back({b.positions[j], {b.weights[j], b.tags[j]}});
      }
    }
    if (!extra.empty()) {
      std::vector<std::pair<double, std::pair<complex, CpsPoint>>> all;
      all.reserve(out.size() + extra.size());
      for (std::size_t i = 0; i < out.size(); ++i)
        all.push_back({out.positions[i], {out.weights[i], out.tags[i]}});
      all.insert(all.end(), extra.begin(), extra.end());
      std::sort(all.begin(), all.end(),
                [](const auto& l, const auto& r) { return l.first < r.first; });
      out.positions.clear();
      out.weights.clear();
      out.tags.clear();
      for (const auto& [x, wt] : all) {
        out.positions.push_back(x);
        out.weights.push_back(wt.first);
        out.tags.push_back(wt.second);
      }
    }
    out.finalize();
    return out;
  }
  std::vector<std::pair<double, complex>> atoms;
  atoms.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) atoms.push_back({a.positions[i], a.weights[i]});
  for (std::size_t j = 0; j < b.size(); ++j) atoms.push_back({b.positions[j], b.weights[j]});
  return merge_atoms(std::move(atoms), region);
}

Comb convolve_finite(const Comb& a, const Comb& b, const ConvolveOptions& options) {
  const Interval region{a.region.lo + b.region.lo, a.region.hi + b.region.hi};
  if (a.empty() || b.empty()) {
    Comb out;
    out.region = region;
    return out;
  }
  if (a.size() > options.max_pairs / b.size())
    throw Error(ErrorKind::ResourceLimit, "convolution atom-count product exceeds the cap");

  if (a.exact() && b.exact()) {
    struct Slot {
      double position;
      complex weight;
    };
    std::unordered_map<CpsPoint, Slot, CpsPointHash> acc;
    acc.reserve(std::min<std::size_t>(a.size() * b.size(), 4 * (a.size() + b.size())));
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        const CpsPoint key{a.tags[i].m + b.tags[j].m, a.tags[i].n + b.tags[j].n};
        auto [it, inserted] = acc.try_emplace(key, Slot{a.positions[i] + b.positions[j], 0.0});
        it->second.weight += a.weights[i] * b.weights[j];
      }
    }
    std::vector<std::pair<CpsPoint, Slot>> atoms(acc.begin(), acc.end());
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& l, const auto& r) { return l.second.position < r.second.position; });
    Comb out;
    out.region = region;
    out.positions.reserve(atoms.size());
    out.weights.reserve(atoms.size());
    out.tags.reserve(atoms.size());
    for (const auto& [tag, slot] : atoms) {
      out.positions.push_back(slot.position);
      out.weights.push_back(slot.weight);
      out.tags.push_back(tag);
    }
    out.finalize();
    return out;
  }

  std::vector<std::pair<double, complex>> atoms;
  atoms.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      atoms.push_back({a.positions[i] + b.positions[j], a.weights[i] * b.weights[j]});
  return merge_atoms(std::move(atoms), region);
}

}  // namespace difflab
