#include "difflab/exact_cps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "difflab/error.hpp"

namespace difflab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidWindow: return "invalid-window";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::OutOfRegion: return "out-of-region";
    case ErrorKind::NotRepresentable: return "not-representable";
    case ErrorKind::NotInSystem: return "not-in-system";
    case ErrorKind::ResourceLimit: return "resource-limit";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::BoundaryContamination: return "boundary-contamination";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::Io: return "io";
    case ErrorKind::InvalidConfig: return "invalid-config";
  }
  return "unknown";
}

namespace {

using i128 = __int128;

// Exact sign of p + q * sqrt(d), d > 0 not a perfect square.
int sign_surd(i128 p, i128 q, std::int64_t d) {
  if (p >= 0 && q >= 0) return (p > 0 || q > 0) ? 1 : 0;
  if (p <= 0 && q <= 0) return -1;
  const i128 p2 = p * p;
  const i128 q2d = q * q * d;
  if (p > 0) return p2 > q2d ? 1 : -1;
  return q2d > p2 ? 1 : -1;
}

bool is_perfect_square(std::int64_t d) {
  if (d < 0) return false;
  auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<long double>(d))));
  for (std::int64_t c = std::max<std::int64_t>(0, r - 2); c <= r + 2; ++c)
    if (c * c == d) return true;
  return false;
}

void check_coordinate(std::int64_t v) {
  if (v <= -kCoordinateCap || v >= kCoordinateCap)
    throw Error(ErrorKind::Overflow, "lattice coordinate exceeds the 2^31 cap");
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorKind::Overflow, "64-bit overflow");
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw Error(ErrorKind::Overflow, "64-bit overflow");
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// QuadraticField

QuadraticField::QuadraticField(std::string name, std::int64_t trace, std::int64_t norm,
                               int root_sign)
    : name_(std::move(name)), trace_(trace), norm_(norm), root_sign_(root_sign >= 0 ? 1 : -1) {
  disc_ = checked_add(checked_mul(trace, trace), -checked_mul(4, norm));
  if (disc_ <= 0 || is_perfect_square(disc_))
    throw Error(ErrorKind::InvalidArgument,
                "quadratic field needs a positive non-square discriminant");
  const long double root = std::sqrt(static_cast<long double>(disc_));
  theta_ = (static_cast<long double>(trace) + root_sign_ * root) / 2.0L;
  theta_conj_ = (static_cast<long double>(trace) - root_sign_ * root) / 2.0L;
}

QuadraticField QuadraticField::golden() { return QuadraticField("golden", 1, -1, +1); }

int QuadraticField::sign_physical(std::int64_t x, std::int64_t y) const {
  // 2(x + y theta) = (2x + y T) + y s sqrt(D)
  const i128 p = i128{2} * x + i128{y} * trace_;
  const i128 q = i128{y} * root_sign_;
  return sign_surd(p, q, disc_);
}

int QuadraticField::sign_internal(std::int64_t x, std::int64_t y) const {
  const i128 p = i128{2} * x + i128{y} * trace_;
  const i128 q = -i128{y} * root_sign_;
  return sign_surd(p, q, disc_);
}

// ---------------------------------------------------------------------------
// CpsPoint

CpsPoint operator+(CpsPoint a, CpsPoint b) {
  CpsPoint out{checked_add(a.m, b.m), checked_add(a.n, b.n)};
  check_coordinate(out.m);
  check_coordinate(out.n);
  return out;
}

CpsPoint operator-(CpsPoint a, CpsPoint b) {
  CpsPoint out{checked_add(a.m, -b.m), checked_add(a.n, -b.n)};
  check_coordinate(out.m);
  check_coordinate(out.n);
  return out;
}

std::size_t CpsPointHash::operator()(const CpsPoint& p) const noexcept {
  auto h = static_cast<std::uint64_t>(p.m) * 0x9E3779B97F4A7C15ULL;
  h ^= static_cast<std::uint64_t>(p.n) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------------------
// CutProjectScheme

CutProjectScheme CutProjectScheme::lattice() { return CutProjectScheme{}; }

CutProjectScheme CutProjectScheme::quadratic(QuadraticField field) {
  CutProjectScheme s;
  s.field_ = std::move(field);
  return s;
}

const QuadraticField& CutProjectScheme::field() const {
  if (!field_) throw Error(ErrorKind::InvalidArgument, "lattice scheme has no quadratic field");
  return *field_;
}

std::string CutProjectScheme::name() const { return field_ ? field_->name() : "lattice"; }

long double CutProjectScheme::physical_ld(CpsPoint p) const {
  if (!field_) return static_cast<long double>(p.m);
  return static_cast<long double>(p.m) + static_cast<long double>(p.n) * field_->theta_ld();
}

long double CutProjectScheme::internal_ld(CpsPoint p) const {
  if (!field_) return 0.0L;
  return static_cast<long double>(p.m) + static_cast<long double>(p.n) * field_->theta_conj_ld();
}

double CutProjectScheme::physical(CpsPoint p) const { return static_cast<double>(physical_ld(p)); }
double CutProjectScheme::internal(CpsPoint p) const { return static_cast<double>(internal_ld(p)); }

double CutProjectScheme::covolume() const {
  if (!field_) return 1.0;
  return static_cast<double>(std::fabs(field_->theta_ld() - field_->theta_conj_ld()));
}

// ---------------------------------------------------------------------------
// Window

double InternalValue::value(const CutProjectScheme& scheme) const {
  const long double conj = scheme.is_lattice() ? 0.0L : scheme.field().theta_conj_ld();
  return static_cast<double>((static_cast<long double>(num) + coef * conj) /
                             static_cast<long double>(den));
}

InternalValue operator+(const InternalValue& a, const InternalValue& b) {
  const std::int64_t g = std::gcd(a.den, b.den);
  const std::int64_t den = checked_mul(a.den / g, b.den);
  const std::int64_t fa = den / a.den;
  const std::int64_t fb = den / b.den;
  InternalValue out{checked_add(checked_mul(a.num, fa), checked_mul(b.num, fb)),
                    checked_add(checked_mul(a.coef, fa), checked_mul(b.coef, fb)), den};
  const std::int64_t r = std::gcd(std::gcd(out.num, out.coef), out.den);
  if (r > 1) {
    out.num /= r;
    out.coef /= r;
    out.den /= r;
  }
  return out;
}

Window::Window(double lo, double hi, Closure closure) : lo_(lo), hi_(hi), closure_(closure) {
  if (!(lo < hi)) throw Error(ErrorKind::InvalidWindow, "window requires lo < hi");
}

Window::Window(const CutProjectScheme& scheme, InternalValue lo, InternalValue hi, Closure closure)
    : lo_(lo.value(scheme)), hi_(hi.value(scheme)), closure_(closure) {
  if (lo.den <= 0 || hi.den <= 0)
    throw Error(ErrorKind::InvalidWindow, "window endpoint denominators must be positive");
  if (!(lo_ < hi_)) throw Error(ErrorKind::InvalidWindow, "window requires lo < hi");
  exact_ = std::make_pair(lo, hi);
}

Window Window::fibonacci() {
  // [-1, tau - 1) = [-1, -tau')
  return Window(CutProjectScheme::fibonacci(), InternalValue{-1, 0, 1}, InternalValue{0, -1, 1});
}

Window Window::shifted(const CutProjectScheme& scheme, InternalValue offset) const {
  if (!exact_) return shifted(offset.value(scheme));
  return Window(scheme, exact_->first + offset, exact_->second + offset, closure_);
}

Window Window::shifted(double offset) const { return Window(lo_ + offset, hi_ + offset, closure_); }

Window::Membership Window::contains(const CutProjectScheme& scheme, CpsPoint p) const {
  Membership out;
  if (scheme.is_lattice()) {
    // Internal group {0}: every structure-group element maps to 0.
    out.inside = lo_ <= 0.0 && (closure_ == Closure::Closed ? 0.0 <= hi_ : 0.0 < hi_);
    return out;
  }
  if (exact_) {
    const auto& f = scheme.field();
    // sign of (m + n theta') - (num + coef theta') / den, den > 0
    auto cmp = [&](const InternalValue& v) {
      const std::int64_t x = checked_add(checked_mul(v.den, p.m), -v.num);
      const std::int64_t y = checked_add(checked_mul(v.den, p.n), -v.coef);
      return f.sign_internal(x, y);
    };
    const int s_lo = cmp(exact_->first);
    const int s_hi = cmp(exact_->second);
    out.boundary_hit = s_lo == 0 || s_hi == 0;
    out.inside = s_lo >= 0 && (closure_ == Closure::Closed ? s_hi <= 0 : s_hi < 0);
    return out;
  }
  const long double y = scheme.internal_ld(p);
  constexpr long double kEdge = 1e-12L;
  out.boundary_hit = std::fabs(y - lo_) < kEdge || std::fabs(y - hi_) < kEdge;
  out.inside = y >= lo_ && (closure_ == Closure::Closed ? y <= hi_ : y < hi_);
  return out;
}

// ---------------------------------------------------------------------------
// Model sets

PointPatch model_set(const CutProjectScheme& scheme, const Window& window, const Interval& region) {
  PointPatch patch;
  patch.region = region;
  if (!(region.hi >= region.lo)) return patch;
  if (!std::isfinite(region.lo) || !std::isfinite(region.hi))
    throw Error(ErrorKind::InvalidArgument, "model_set needs a bounded region");

  std::vector<std::pair<long double, CpsPoint>> found;
  bool boundary_hit = false;

  if (scheme.is_lattice()) {
    const auto lo = static_cast<std::int64_t>(std::ceil(region.lo));
    const auto hi = static_cast<std::int64_t>(std::floor(region.hi));
    check_coordinate(lo);
    check_coordinate(hi);
    if (window.contains(scheme, CpsPoint{0, 0}).inside) {
      for (std::int64_t m = lo; m <= hi; ++m) found.push_back({static_cast<long double>(m), {m, 0}});
    }
  } else {
    const auto& f = scheme.field();
    const long double th = f.theta_ld();
    const long double tc = f.theta_conj_ld();
    const long double diff = th - tc;
    // n (theta - theta') = x - y with x in region, y in window.
    long double a = (static_cast<long double>(region.lo) - window.hi()) / diff;
    long double b = (static_cast<long double>(region.hi) - window.lo()) / diff;
    if (a > b) std::swap(a, b);
    const auto n_lo = static_cast<std::int64_t>(std::floor(a)) - 1;
    const auto n_hi = static_cast<std::int64_t>(std::ceil(b)) + 1;
    check_coordinate(n_lo);
    check_coordinate(n_hi);
    for (std::int64_t n = n_lo; n <= n_hi; ++n) {
      const long double nl = static_cast<long double>(n);
      const long double m_lo = std::max(region.lo - nl * th, window.lo() - nl * tc);
      const long double m_hi = std::min(region.hi - nl * th, window.hi() - nl * tc);
      if (m_hi < m_lo - 2.0L) continue;
      const auto m0 = static_cast<std::int64_t>(std::floor(m_lo)) - 1;
      const auto m1 = static_cast<std::int64_t>(std::ceil(m_hi)) + 1;
      for (std::int64_t m = m0; m <= m1; ++m) {
        check_coordinate(m);
        const CpsPoint p{m, n};
        const long double x = scheme.physical_ld(p);
        if (x < region.lo || x > region.hi) continue;
        const auto member = window.contains(scheme, p);
        boundary_hit = boundary_hit || member.boundary_hit;
        if (member.inside) found.push_back({x, p});
      }
    }
  }

  std::sort(found.begin(), found.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  patch.points.reserve(found.size());
  patch.tags.reserve(found.size());
  for (const auto& [x, p] : found) {
    patch.points.push_back(static_cast<double>(x));
    patch.tags.push_back(p);
  }
  if (boundary_hit)
    patch.warnings.emplace_back("boundary-hit: a star image lies on the window boundary");
  return patch;
}

PointPatch translate(const PointPatch& patch, const CutProjectScheme& scheme, CpsPoint g) {
  if (!patch.exact())
    throw Error(ErrorKind::InvalidArgument, "lattice translation needs a tagged patch");
  PointPatch out;
  const double shift = scheme.physical(g);
  out.region = {patch.region.lo + shift, patch.region.hi + shift};
  out.points.reserve(patch.size());
  out.tags.reserve(patch.size());
  for (const auto& tag : patch.tags) {
    const CpsPoint q = tag + g;
    out.tags.push_back(q);
    out.points.push_back(scheme.physical(q));
  }
  out.warnings = patch.warnings;
  return out;
}

std::vector<double> dual_frequencies(const CutProjectScheme& scheme, const Interval& range,
                                     int max_coeff) {
  std::vector<double> out;
  if (scheme.is_lattice()) {
    for (auto k = static_cast<std::int64_t>(std::ceil(range.lo)); k <= std::floor(range.hi); ++k)
      out.push_back(static_cast<double>(k));
    return out;
  }
  const auto& f = scheme.field();
  const long double diff = f.theta_ld() - f.theta_conj_ld();
  for (int a = -max_coeff; a <= max_coeff; ++a) {
    for (int b = -max_coeff; b <= max_coeff; ++b) {
      const long double k = (b - a * f.theta_conj_ld()) / diff;
      if (k >= range.lo && k <= range.hi) out.push_back(static_cast<double>(k));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
            out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Discreteness and Meyer checks

DiscretenessVerdict check_uniformly_discrete(const PointPatch& patch, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "discreteness radius must be positive");
  DiscretenessVerdict v;
  v.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < patch.points.size(); ++i) {
    const double gap = patch.points[i] - patch.points[i - 1];
    if (gap < v.min_gap) {
      v.min_gap = gap;
      if (gap < r) v.counterexample = std::make_pair(patch.points[i - 1], patch.points[i]);
    }
  }
  v.pass = !v.counterexample.has_value();
  return v;
}

PointPatch difference_patch(const PointPatch& patch, double radius) {
  constexpr double kMerge = 1e-9;
  PointPatch out;
  out.region = {-radius, radius};
  if (radius > patch.region.length())
    out.warnings.emplace_back("boundary-incomplete: radius exceeds the patch region length");
  const auto& pts = patch.points;
  const std::size_t n = pts.size();

  if (!patch.tags.empty()) {
    // Exact-mode: deduplicate integer pairs; positions follow the tags.
    std::unordered_set<CpsPoint, CpsPointHash> seen;
    std::vector<std::pair<double, CpsPoint>> diffs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n && pts[j] - pts[i] <= radius; ++j) {
        const CpsPoint d = patch.tags[j] - patch.tags[i];
        if (seen.insert(d).second) diffs.push_back({pts[j] - pts[i], d});
        const CpsPoint nd = -d;
        if (seen.insert(nd).second) diffs.push_back({pts[i] - pts[j], nd});
      }
    }
    std::sort(diffs.begin(), diffs.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    for (const auto& [x, d] : diffs) {
      out.points.push_back(x);
      out.tags.push_back(d);
    }
    return out;
  }

  std::vector<double> diffs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n && pts[j] - pts[i] <= radius; ++j) {
      diffs.push_back(pts[j] - pts[i]);
      if (j != i) diffs.push_back(pts[i] - pts[j]);
    }
  }
  std::sort(diffs.begin(), diffs.end());
  for (double d : diffs) {
    if (out.points.empty() || d - out.points.back() > kMerge) out.points.push_back(d);
  }
  return out;
}

MeyerVerdict check_meyer(const PointPatch& patch, double r_candidate, double R_candidate,
                         double diff_radius, const MeyerOptions& options) {
  MeyerVerdict v;
  const Interval& reg = patch.region;
  if (reg.length() < 2.0 * R_candidate || patch.points.empty()) {
    v.status = MeyerVerdict::Status::Inconclusive;
    v.reason = "region too small relative to the relative-density radius";
    return v;
  }

  const auto disc = check_uniformly_discrete(patch, r_candidate);
  if (!disc.pass) {
    v.status = MeyerVerdict::Status::Failure;
    v.reason = "not uniformly discrete at r";
    return v;
  }

  // Largest point-free stretch, including the two region edges.
  double hole = patch.points.front() - reg.lo;
  for (std::size_t i = 1; i < patch.points.size(); ++i)
    hole = std::max(hole, patch.points[i] - patch.points[i - 1]);
  hole = std::max(hole, reg.hi - patch.points.back());
  v.max_hole = hole;
  if (hole > R_candidate) {
    v.status = MeyerVerdict::Status::Failure;
    v.reason = "relative density fails: a window of length R contains no point";
    return v;
  }

  const PointPatch diffs = difference_patch(patch, diff_radius);
  double r_prime = std::numeric_limits<double>::infinity();
  double near = 0.0;
  for (std::size_t i = 1; i < diffs.points.size(); ++i) {
    const double gap = diffs.points[i] - diffs.points[i - 1];
    if (gap < r_prime) {
      r_prime = gap;
      near = diffs.points[i];
    }
  }
  v.r_prime = r_prime;
  if (r_prime < options.difference_gap_floor) {
    v.status = MeyerVerdict::Status::Failure;
    v.reason = "difference set accumulates near " + std::to_string(near) +
               " (gap " + std::to_string(r_prime) + ")";
    return v;
  }
  v.status = MeyerVerdict::Status::Consistent;
  v.reason = "finite-patch evidence: Delone with uniformly discrete differences";
  return v;
}

// ---------------------------------------------------------------------------
// Torus parametrization

std::pair<double, double> torus_coordinates(const CutProjectScheme& scheme, double w, double t) {
  auto frac = [](long double x) {
    long double f = x - std::floor(x);
    if (f >= 1.0L) f = 0.0L;
    return static_cast<double>(f);
  };
  if (scheme.is_lattice()) return {frac(-static_cast<long double>(t)), 0.0};
  // (w, t) = alpha (1, -1) + beta (theta', -theta)
  const auto& f = scheme.field();
  const long double beta = (static_cast<long double>(w) + t) / (f.theta_conj_ld() - f.theta_ld());
  const long double alpha = w - beta * f.theta_conj_ld();
  return {frac(alpha), frac(beta)};
}

double torus_distance(std::pair<double, double> a, std::pair<double, double> b) {
  auto circ = [](double x, double y) {
    double d = std::fabs(x - y);
    return std::min(d, 1.0 - d);
  };
  return std::max(circ(a.first, b.first), circ(a.second, b.second));
}

TorusClass torus_parametrize(const PointPatch& patch, const CutProjectScheme& scheme,
                             const Window& window, std::optional<std::size_t> anchor_index) {
  if (patch.points.empty())
    throw Error(ErrorKind::InvalidArgument, "torus parametrization needs a nonempty patch");
  if (patch.tags.size() != patch.points.size())
    throw Error(ErrorKind::NotRepresentable, "patch points are not resolvable in the structure group");

  std::size_t anchor = 0;
  if (anchor_index) {
    if (*anchor_index >= patch.size()) throw Error(ErrorKind::InvalidArgument, "anchor out of range");
    anchor = *anchor_index;
  } else {
    for (std::size_t i = 1; i < patch.size(); ++i)
      if (std::fabs(patch.points[i]) < std::fabs(patch.points[anchor])) anchor = i;
  }

  TorusClass out;
  out.t_tag = patch.tags[anchor];
  out.t = scheme.physical(out.t_tag);

  // w in s(p) - W  <=>  s(p) - w in [lo, hi)  <=>  w in (s(p) - hi, s(p) - lo]
  long double s_max = -std::numeric_limits<long double>::infinity();
  long double s_min = std::numeric_limits<long double>::infinity();
  for (const auto& tag : patch.tags) {
    const long double s = scheme.internal_ld(tag - out.t_tag);
    s_max = std::max(s_max, s);
    s_min = std::min(s_min, s);
  }
  const long double lo = s_max - window.hi();
  const long double hi = s_min - window.lo();
  if (!(lo < hi))
    throw Error(ErrorKind::NotRepresentable,
                "patch is not contained in any translated model set of this window");
  out.w_lo = static_cast<double>(lo);
  out.w_hi = static_cast<double>(hi);
  out.w = static_cast<double>((lo + hi) / 2.0L);
  out.width = static_cast<double>(hi - lo);
  std::tie(out.alpha, out.beta) = torus_coordinates(scheme, out.w, out.t);
  return out;
}

}  // namespace difflab
