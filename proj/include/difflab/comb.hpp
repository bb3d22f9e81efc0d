#pragma once

// Weighted Dirac combs on a finite window and their elementary calculus.

#include <complex>
#include <cstddef>
#include <vector>

#include "difflab/exact_cps.hpp"
#include "difflab/interval.hpp"

namespace difflab {

using complex = std::complex<double>;

inline constexpr double kMergeTolerance = 1e-9;

/// Finite patch of a weighted Dirac comb sum_t c_t delta_t, exhaustive over
/// `region`. Positions are strictly increasing. When `tags` is non-empty it
/// holds the exact structure-group element of every atom.
struct Comb {
  std::vector<double> positions;
  std::vector<complex> weights;
  Interval region;
  std::vector<CpsPoint> tags;
  double bound = 0.0;  // max |c_t|

  std::size_t size() const noexcept { return positions.size(); }
  bool empty() const noexcept { return positions.empty(); }
  bool exact() const noexcept { return !tags.empty() && tags.size() == positions.size(); }

  /// Unit weights on every point of the patch; tags are carried over.
  static Comb from_patch(const PointPatch& patch, complex weight = 1.0);

  /// Recomputes `bound` and checks the ordering / region invariants.
  void finalize();
};

bool identical(const Comb& a, const Comb& b);  // bit-exact positions and weights

/// Compactly supported test function on [center - half_width, center + half_width].
struct TestFunction {
  enum class Kind { Tent, RaisedCosine };

  Kind kind = Kind::Tent;
  double center = 0.0;
  double half_width = 1.0;
  double amplitude = 1.0;

  static TestFunction tent(double center, double half_width, double amplitude = 1.0) {
    return {Kind::Tent, center, half_width, amplitude};
  }
  static TestFunction raised_cosine(double center, double half_width, double amplitude = 1.0) {
    return {Kind::RaisedCosine, center, half_width, amplitude};
  }

  double operator()(double x) const;
  /// Fourier transform  phi^(omega) = int phi(x) e^{-2 pi i omega x} dx.
  complex fourier(double omega) const;
  /// (phi * phi~)(z) = int phi(x) conj(phi(x - z)) dx, closed form.
  double self_correlation(double z) const;
  double integral() const;
  Interval support() const { return {center - half_width, center + half_width}; }
};

/// N_phi(comb) = sum_t c_t phi(-t). Sets *boundary_incomplete when the
/// support of phi(-.) leaves the comb region.
complex n_phi(const Comb& comb, const TestFunction& phi, bool* boundary_incomplete = nullptr);

/// sup over half-open windows [x, x + k_len) inside the region of sum |c_t|.
double translation_bound(const Comb& comb, double k_len);

/// Atoms in the half-open interval [a.lo, a.hi). Throws OutOfRegion if a is
/// not inside the comb region.
Comb restrict(const Comb& comb, const Interval& a);

/// Positions negated, weights conjugated.
Comb involute(const Comb& comb);

/// comb * delta_t.
Comb translate(const Comb& comb, double t);

Comb scale(const Comb& comb, complex factor);

/// Atom-wise sum; atoms closer than the merge tolerance (or with equal tags)
/// are combined. The region is the intersection of the two regions.
Comb add(const Comb& a, const Comb& b);

struct ConvolveOptions {
  std::size_t max_pairs = 20'000'000;
};

/// Finite convolution; sums of positions merged within 1e-9, or on exact tag
/// sums when both operands are tagged. Throws ResourceLimit beyond max_pairs.
Comb convolve_finite(const Comb& a, const Comb& b, const ConvolveOptions& options = {});

/// Sorts (position, weight) pairs and merges runs within the merge tolerance.
Comb merge_atoms(std::vector<std::pair<double, complex>> atoms, Interval region);

}  // namespace difflab
