#pragma once

// Exact cut-and-project arithmetic over real quadratic orders, model-set
// generation and finite-patch checks of discreteness / Meyer properties.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "difflab/interval.hpp"

namespace difflab {

/// Real quadratic order Z[theta] with theta^2 = trace * theta - norm.
/// theta = (trace + root_sign * sqrt(D)) / 2 and its conjugate takes the
/// other sign, D = trace^2 - 4 norm.
class QuadraticField {
 public:
  QuadraticField(std::string name, std::int64_t trace, std::int64_t norm, int root_sign = +1);

  /// Z[tau], tau the golden ratio; tau' = 1 - tau.
  static QuadraticField golden();

  const std::string& name() const noexcept { return name_; }
  std::int64_t trace() const noexcept { return trace_; }
  std::int64_t norm() const noexcept { return norm_; }
  std::int64_t discriminant() const noexcept { return disc_; }
  int root_sign() const noexcept { return root_sign_; }
  double theta() const noexcept { return static_cast<double>(theta_); }
  double theta_conj() const noexcept { return static_cast<double>(theta_conj_); }
  long double theta_ld() const noexcept { return theta_; }
  long double theta_conj_ld() const noexcept { return theta_conj_; }

  /// Exact sign of x + y * theta.
  int sign_physical(std::int64_t x, std::int64_t y) const;
  /// Exact sign of x + y * theta'.
  int sign_internal(std::int64_t x, std::int64_t y) const;

 private:
  std::string name_;
  std::int64_t trace_;
  std::int64_t norm_;
  std::int64_t disc_;
  int root_sign_;
  long double theta_;
  long double theta_conj_;
};

/// Element m + n*theta of the structure group; its star image is m + n*theta'.
struct CpsPoint {
  std::int64_t m = 0;
  std::int64_t n = 0;

  friend CpsPoint operator+(CpsPoint a, CpsPoint b);
  friend CpsPoint operator-(CpsPoint a, CpsPoint b);
  friend CpsPoint operator-(CpsPoint a) { return CpsPoint{0, 0} - a; }
  friend auto operator<=>(const CpsPoint&, const CpsPoint&) = default;
};

struct CpsPointHash {
  std::size_t operator()(const CpsPoint& p) const noexcept;
};

/// Coordinates are capped at |m|, |n| < 2^31 so all products fit in 64 bits.
inline constexpr std::int64_t kCoordinateCap = std::int64_t{1} << 31;

/// One-dimensional irredundant cut-and-project scheme. Either the trivial
/// lattice scheme (internal group {0}, structure group Z) or a quadratic
/// scheme (internal group R, structure group Z[theta], star map the Galois
/// conjugation).
class CutProjectScheme {
 public:
  static CutProjectScheme lattice();
  static CutProjectScheme quadratic(QuadraticField field);
  static CutProjectScheme fibonacci() { return quadratic(QuadraticField::golden()); }

  bool is_lattice() const noexcept { return !field_.has_value(); }
  const QuadraticField& field() const;
  std::string name() const;

  double physical(CpsPoint p) const;
  double internal(CpsPoint p) const;
  long double physical_ld(CpsPoint p) const;
  long double internal_ld(CpsPoint p) const;

  /// Covolume |theta - theta'| of the lifted lattice (1 for the lattice scheme).
  double covolume() const;

 private:
  CutProjectScheme() = default;
  std::optional<QuadraticField> field_;
};

/// Exact window endpoint (num + coef * theta') / den in internal space.
struct InternalValue {
  std::int64_t num = 0;
  std::int64_t coef = 0;
  std::int64_t den = 1;

  double value(const CutProjectScheme& scheme) const;
  friend InternalValue operator+(const InternalValue& a, const InternalValue& b);
};

/// Interval window [lo, hi) in internal space, half-open by default.
/// When exact endpoints are present, membership is decided in integer
/// arithmetic; otherwise a long-double comparison is used and points within
/// 1e-12 of an endpoint raise a boundary-hit warning.
class Window {
 public:
  enum class Closure { HalfOpen, Closed };

  /// Float window. Throws InvalidWindow when lo >= hi.
  Window(double lo, double hi, Closure closure = Closure::HalfOpen);
  /// Exact window; `scheme` is used only to evaluate the endpoints.
  Window(const CutProjectScheme& scheme, InternalValue lo, InternalValue hi,
         Closure closure = Closure::HalfOpen);

  /// Window [-1, tau - 1) producing the Fibonacci chain.
  static Window fibonacci();

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double length() const noexcept { return hi_ - lo_; }
  Closure closure() const noexcept { return closure_; }
  bool is_exact() const noexcept { return exact_.has_value(); }
  const std::optional<std::pair<InternalValue, InternalValue>>& exact_bounds() const noexcept {
    return exact_;
  }

  Window shifted(const CutProjectScheme& scheme, InternalValue offset) const;
  Window shifted(double offset) const;

  struct Membership {
    bool inside = false;
    bool boundary_hit = false;
  };
  Membership contains(const CutProjectScheme& scheme, CpsPoint p) const;

 private:
  double lo_;
  double hi_;
  Closure closure_;
  std::optional<std::pair<InternalValue, InternalValue>> exact_;
};

/// Finite patch of a point set, exhaustive over `region`.
struct PointPatch {
  std::vector<double> points;   // strictly increasing
  Interval region;              // closed interval of exhaustiveness
  std::vector<CpsPoint> tags;   // empty, or one exact tag per point
  std::vector<std::string> warnings;

  bool exact() const noexcept { return !tags.empty() || points.empty(); }
  std::size_t size() const noexcept { return points.size(); }
};

/// All points m + n*theta inside the closed `region` whose star image lies in
/// the window. Membership in the window is exact whenever the window is.
PointPatch model_set(const CutProjectScheme& scheme, const Window& window, const Interval& region);

/// Translation of a tagged patch by a structure-group element.
PointPatch translate(const PointPatch& patch, const CutProjectScheme& scheme, CpsPoint g);

/// Bragg frequencies k = (b - a theta') / (theta - theta') of the dual module,
/// |a|, |b| <= max_coeff, restricted to `range`. Integers for the lattice scheme.
std::vector<double> dual_frequencies(const CutProjectScheme& scheme, const Interval& range,
                                     int max_coeff);

struct DiscretenessVerdict {
  bool pass = true;
  std::optional<std::pair<double, double>> counterexample;
  double min_gap = 0.0;  // +inf for fewer than two points
};

DiscretenessVerdict check_uniformly_discrete(const PointPatch& patch, double r);

/// Differences t - t' with |t - t'| <= radius. Exact patches deduplicate on
/// integer pairs, float patches merge within 1e-9.
PointPatch difference_patch(const PointPatch& patch, double radius);

struct MeyerVerdict {
  enum class Status { Consistent, Failure, Inconclusive };
  Status status = Status::Inconclusive;
  std::string reason;
  double r_prime = 0.0;       // smallest gap of the difference patch
  double max_hole = 0.0;      // largest point-free stretch inside the region
  /// Always true: the verdict is evidence on a finite patch, not a proof.
  bool finite_patch_evidence = true;
};

struct MeyerOptions {
  /// Difference sets whose smallest gap falls below this floor are reported
  /// as accumulating (not uniformly discrete).
  double difference_gap_floor = 1e-4;
};

MeyerVerdict check_meyer(const PointPatch& patch, double r_candidate, double R_candidate,
                         double diff_radius, const MeyerOptions& options = {});

/// Result of locating a tagged patch inside a translated model set
/// P(W + w) + t. The admissible internal offsets form the interval
/// (w_lo, w_hi]; its midpoint is the canonical w.
struct TorusClass {
  double t = 0.0;
  CpsPoint t_tag;
  double w_lo = 0.0;
  double w_hi = 0.0;
  double w = 0.0;
  double width = 0.0;
  /// Coordinates in [0,1)^2 of [w, t] on the torus (H x R) / L, where
  /// L = {(s(h), -h) : h in the structure group}.
  double alpha = 0.0;
  double beta = 0.0;
};

/// Coordinates on the parametrization torus of an arbitrary pair (w, t).
std::pair<double, double> torus_coordinates(const CutProjectScheme& scheme, double w, double t);

/// Circular sup-distance between two torus coordinate pairs.
double torus_distance(std::pair<double, double> a, std::pair<double, double> b);

/// Anchor defaults to the patch point closest to 0. Requires exact tags.
TorusClass torus_parametrize(const PointPatch& patch, const CutProjectScheme& scheme,
                             const Window& window, std::optional<std::size_t> anchor_index = {});

}  // namespace difflab
