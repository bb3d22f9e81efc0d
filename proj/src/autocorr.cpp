#include "difflab/autocorr.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <unordered_map>

#include "difflab/error.hpp"

namespace difflab {

VanHoveSequence::VanHoveSequence(std::vector<double> half_lengths)
    : half_lengths_(std::move(half_lengths)) {
  for (std::size_t i = 0; i < half_lengths_.size(); ++i) {
    if (!(half_lengths_[i] > 0.0))
      throw Error(ErrorKind::InvalidArgument, "Van Hove half-lengths must be positive");
    if (i > 0 && !(half_lengths_[i] > half_lengths_[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "Van Hove half-lengths must increase");
  }
}

VanHoveSequence VanHoveSequence::linear(double base, const std::vector<int>& multipliers) {
  std::vector<double> h;
  h.reserve(multipliers.size());
  for (int k : multipliers) h.push_back(base * k);
  return VanHoveSequence(std::move(h));
}

double VanHoveSequence::half_length(std::size_t n) const {
  if (n >= half_lengths_.size()) throw Error(ErrorKind::InvalidArgument, "Van Hove index out of range");
  return half_lengths_[n];
}

double van_hove_defect(const VanHoveSequence& seq, std::size_t n, double k_len) {
  if (!(k_len > 0.0)) throw Error(ErrorKind::InvalidArgument, "k_len must be positive");
  return 2.0 * k_len / seq.volume(n);
}

std::vector<Interval> van_hove_blocks(const VanHoveSequence& seq, std::size_t n,
                                      const Interval& region) {
  const Interval a = seq.window(n);
  const double len = a.length();
  std::vector<Interval> out;
  const auto j0 = static_cast<long long>(std::ceil((region.lo - a.lo) / len));
  const auto j1 = static_cast<long long>(std::floor((region.hi - a.hi) / len));
  for (long long j = j0; j <= j1; ++j) out.push_back({a.lo + j * len, a.hi + j * len});
  return out;
}

double Autocorr::reliable_radius() const {
  return std::min(max_lag, volume * (1.0 - kReliableMargin));
}

complex Autocorr::debiased(std::size_t i) const {
  const double f = 1.0 - std::fabs(comb.positions[i]) / volume;
  return f > 0.0 ? comb.weights[i] / f : complex{0.0};
}

std::uint64_t comb_hash(const Comb& comb) {
  // FNV-1a over the raw bytes of positions and weights.
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  feed(comb.positions.data(), comb.positions.size() * sizeof(double));
  feed(comb.weights.data(), comb.weights.size() * sizeof(complex));
  return h;
}

Autocorr truncated_autocorr(const Comb& comb, const VanHoveSequence& seq, std::size_t n,
                            const ConvolveOptions& options) {
  const Interval a = seq.window(n);
  if (!comb.region.contains(a))
    throw Error(ErrorKind::OutOfRegion, "Van Hove window exceeds the comb region");
  const Comb part = restrict(comb, a);
  Autocorr out;
  out.comb = scale(convolve_finite(part, involute(part), options), 1.0 / a.length());
  out.n_index = n;
  out.volume = a.length();
  out.source_hash = comb_hash(comb);
  return out;
}

namespace {

// Accumulates pair products keyed on exact tag differences, or on lags
// quantized at the merge tolerance.
class LagAccumulator {
 public:
  explicit LagAccumulator(bool exact) : exact_(exact) {}

  void add_exact(CpsPoint key, double lag, complex w) {
    auto [it, inserted] = exact_slots_.try_emplace(key, Slot{lag, 0.0});
    it->second.weight += w;
  }

  void add_float(double lag, complex w) {
    const auto key = static_cast<long long>(std::llround(lag / kMergeTolerance));
    for (long long k : {key, key - 1, key + 1}) {
      auto it = float_slots_.find(k);
      if (it != float_slots_.end() && std::fabs(it->second.position - lag) <= kMergeTolerance) {
        it->second.weight += w;
        return;
      }
    }
    float_slots_.emplace(key, Slot{lag, w});
  }

  Comb finish(double factor, Interval region) const {
    Comb out;
    out.region = region;
    if (exact_) {
      std::vector<std::pair<CpsPoint, Slot>> v(exact_slots_.begin(), exact_slots_.end());
      std::sort(v.begin(), v.end(),
                [](const auto& l, const auto& r) { return l.second.position < r.second.position; });
      for (const auto& [tag, s] : v) {
        out.positions.push_back(s.position);
        out.weights.push_back(s.weight * factor);
        out.tags.push_back(tag);
      }
    } else {
      std::vector<Slot> v;
      v.reserve(float_slots_.size());
      for (const auto& [k, s] : float_slots_) v.push_back(s);
      std::sort(v.begin(), v.end(), [](const Slot& l, const Slot& r) { return l.position < r.position; });
      for (const auto& s : v) {
        out.positions.push_back(s.position);
        out.weights.push_back(s.weight * factor);
      }
    }
    out.finalize();
    return out;
  }

 private:
  struct Slot {
    double position;
    complex weight;
  };
  bool exact_;
  std::unordered_map<CpsPoint, Slot, CpsPointHash> exact_slots_;
  std::unordered_map<long long, Slot> float_slots_;
};

void accumulate_window(const Comb& comb, const Interval& a, double max_lag, LagAccumulator& acc) {
  const auto& x = comb.positions;
  const auto b = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), a.lo) - x.begin());
  const auto e = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), a.hi) - x.begin());
  const bool exact = comb.exact();
  for (std::size_t i = b; i < e; ++i) {
    const complex ci = comb.weights[i];
    // Lag z = x_i - x_j with conj weight on the involuted side.
    std::size_t j = i;
    while (j > b && x[i] - x[j - 1] <= max_lag) --j;
    for (; j < e && x[j] - x[i] <= max_lag; ++j) {
      const complex w = ci * std::conj(comb.weights[j]);
      const double lag = x[i] - x[j];
      if (exact) {
        acc.add_exact(CpsPoint{comb.tags[i].m - comb.tags[j].m, comb.tags[i].n - comb.tags[j].n},
                      lag, w);
      } else {
        acc.add_float(lag, w);
      }
    }
  }
}

}  // namespace

Autocorr windowed_autocorr(const Comb& comb, const Interval& a, double max_lag) {
  if (!comb.region.contains(a))
    throw Error(ErrorKind::OutOfRegion, "autocorrelation window exceeds the comb region");
  LagAccumulator acc(comb.exact());
  accumulate_window(comb, a, max_lag, acc);
  Autocorr out;
  const double lag_span = std::min(max_lag, a.length());
  out.comb = acc.finish(1.0 / a.length(), {-lag_span, lag_span});
  out.volume = a.length();
  out.max_lag = max_lag;
  out.source_hash = comb_hash(comb);
  return out;
}

Autocorr block_autocorr(const Comb& comb, const VanHoveSequence& seq, std::size_t n,
                        double max_lag) {
  const auto blocks = van_hove_blocks(seq, n, comb.region);
  if (blocks.empty())
    throw Error(ErrorKind::OutOfRegion, "Van Hove window exceeds the comb region");
  LagAccumulator acc(comb.exact());
  for (const auto& blk : blocks) accumulate_window(comb, blk, max_lag, acc);
  Autocorr out;
  const double vol = seq.volume(n);
  const double lag_span = std::min(max_lag, vol);
  out.comb = acc.finish(1.0 / (vol * static_cast<double>(blocks.size())), {-lag_span, lag_span});
  out.n_index = n;
  out.volume = vol;
  out.max_lag = max_lag;
  out.blocks = blocks.size();
  out.source_hash = comb_hash(comb);
  return out;
}

complex integrate(const Autocorr& gamma, const TestFunction& phi) {
  const auto& x = gamma.comb.positions;
  const auto sup = phi.support();
  auto it = std::lower_bound(x.begin(), x.end(), sup.lo);
  complex sum = 0.0;
  for (; it != x.end() && *it <= sup.hi; ++it)
    sum += gamma.comb.weights[static_cast<std::size_t>(it - x.begin())] * phi(*it);
  return sum;
}

std::vector<TestFunction> standard_test_battery(double half_width, int max_center) {
  std::vector<TestFunction> out;
  for (int c = -max_center; c <= max_center; ++c)
    out.push_back(TestFunction::tent(static_cast<double>(c), half_width));
  return out;
}

ConvergenceTable autocorr_convergence(const Comb& comb, const VanHoveSequence& seq,
                                      const std::vector<TestFunction>& phis) {
  double reach = 0.0;
  for (const auto& phi : phis)
    reach = std::max({reach, std::fabs(phi.support().lo), std::fabs(phi.support().hi)});
  ConvergenceTable table;
  double prev_residual = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < seq.size(); ++n) {
    const Autocorr g = windowed_autocorr(comb, seq.window(n), reach);
    ConvergenceRow row;
    row.n = n;
    row.half_length = seq.half_length(n);
    for (const auto& phi : phis) row.values.push_back(integrate(g, phi));
    if (!table.rows.empty()) {
      double r = 0.0;
      for (std::size_t k = 0; k < phis.size(); ++k)
        r = std::max(r, std::abs(row.values[k] - table.rows.back().values[k]));
      row.residual = r;
      if (r > prev_residual) table.residuals_decreasing = false;
      prev_residual = r;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

double hermitian_defect(const Comb& gamma) {
  double scale = 0.0;
  for (const auto& w : gamma.weights) scale = std::max(scale, std::abs(w));
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  const auto& x = gamma.positions;
  if (gamma.exact()) {
    std::unordered_map<CpsPoint, std::size_t, CpsPointHash> index;
    for (std::size_t i = 0; i < x.size(); ++i) index.emplace(gamma.tags[i], i);
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto it = index.find(-gamma.tags[i]);
      if (it == index.end()) {
        if (gamma.weights[i] != complex{0.0}) return std::numeric_limits<double>::infinity();
        continue;
      }
      worst = std::max(worst, std::abs(gamma.weights[it->second] - std::conj(gamma.weights[i])));
    }
    return worst / scale;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto it = std::lower_bound(x.begin(), x.end(), -x[i] - kMergeTolerance);
    if (it == x.end() || std::fabs(*it + x[i]) > kMergeTolerance) {
      if (gamma.weights[i] != complex{0.0}) return std::numeric_limits<double>::infinity();
      continue;
    }
    const auto j = static_cast<std::size_t>(it - x.begin());
    worst = std::max(worst, std::abs(gamma.weights[j] - std::conj(gamma.weights[i])));
  }
  return worst / scale;
}

namespace {

// sum_z gamma(z) (phi * phi~)(z - d) and the matching absolute mass.
std::pair<complex, double> shifted_pairing(const Comb& gamma, const TestFunction& phi, double d) {
  const double reach = 2.0 * phi.half_width;
  const auto& x = gamma.positions;
  auto it = std::lower_bound(x.begin(), x.end(), d - reach);
  complex sum = 0.0;
  double mass = 0.0;
  for (; it != x.end() && *it <= d + reach; ++it) {
    const auto i = static_cast<std::size_t>(it - x.begin());
    const double k = phi.self_correlation(*it - d);
    sum += gamma.weights[i] * k;
    mass += std::abs(gamma.weights[i]) * std::fabs(k);
  }
  return {sum, mass};
}

struct Quadratic {
  double value;
  double mass;
};

// Q(psi) for psi = sum_i a_i phi(. - t_i).
Quadratic quadratic_form(const Comb& gamma, const TestFunction& phi,
                         const std::vector<complex>& a, const std::vector<double>& t) {
  complex q = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const auto [s, m] = shifted_pairing(gamma, phi, t[i] - t[j]);
      q += a[i] * std::conj(a[j]) * s;
      mass += std::abs(a[i] * a[j]) * m;
    }
  }
  return {q.real(), mass};
}

std::string describe(const TestFunction& phi, const std::vector<complex>& a,
                     const std::vector<double>& t, double value) {
  std::ostringstream os;
  os << "tent(center=" << phi.center << ", half_width=" << phi.half_width << ") combination";
  for (std::size_t i = 0; i < a.size(); ++i)
    os << " + (" << a[i].real() << (a[i].imag() < 0 ? "" : "+") << a[i].imag() << "i) at "
       << t[i];
  os << " gives " << value;
  return os.str();
}

}  // namespace

PositiveDefiniteVerdict check_positive_definite(const Autocorr& gamma,
                                                const std::vector<TestFunction>& phis,
                                                const PositiveDefiniteOptions& options) {
  PositiveDefiniteVerdict v;
  if (hermitian_defect(gamma.comb) > 1e-12) {
    v.pass = false;
    v.hermitian = false;
    v.violation = "not hermitian: gamma(-z) != conj(gamma(z))";
    return v;
  }
  auto consider = [&](const TestFunction& phi, const std::vector<complex>& a,
                      const std::vector<double>& t) {
    const auto q = quadratic_form(gamma.comb, phi, a, t);
    if (q.value < v.worst_value) v.worst_value = q.value;
    if (q.value < -options.tolerance * std::max(1.0, q.mass) && v.pass) {
      v.pass = false;
      v.violation = describe(phi, a, t, q.value);
    }
  };

  const std::vector<complex> units{1.0, -1.0, complex{0.0, 1.0}, complex{0.0, -1.0}};
  for (const auto& phi : phis) {
    consider(phi, {1.0}, {0.0});
    for (int k = 1; k <= 8; ++k)
      for (const auto& u : units) consider(phi, {1.0, u}, {0.0, 0.5 * k * phi.half_width});
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> coef(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> count(2, std::max<std::size_t>(2, options.max_translates));
  for (std::size_t trial = 0; trial < options.random_trials && !phis.empty(); ++trial) {
    const auto& phi = phis[trial % phis.size()];
    std::uniform_real_distribution<double> shift(0.0, 4.0 * phi.half_width);
    const std::size_t k = count(rng);
    std::vector<complex> a(k);
    std::vector<double> t(k);
    for (std::size_t i = 0; i < k; ++i) {
      a[i] = {coef(rng), coef(rng)};
      t[i] = shift(rng);
    }
    consider(phi, a, t);
  }
  return v;
}

}  // namespace difflab
