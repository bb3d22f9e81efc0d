#pragma once

// Convolution by a finite atomic measure sigma and the |sigma^|^2 law for
// the diffraction of Lambda * sigma.

#include <string>
#include <utility>
#include <vector>

#include "difflab/autocorr.hpp"
#include "difflab/comb.hpp"

namespace difflab {

/// sigma = sum_j w_j delta_{x_j}, finitely many atoms.
class BoundedAtomicMeasure {
 public:
  BoundedAtomicMeasure() = default;
  /// Atoms are sorted and merged within 1e-9; zero weights are dropped.
  explicit BoundedAtomicMeasure(std::vector<std::pair<double, complex>> atoms);

  static BoundedAtomicMeasure dirac(double x = 0.0) { return BoundedAtomicMeasure({{x, 1.0}}); }
  /// Inline form "x1:w1,x2:w2,...". Weights may be complex as re/im.
  static BoundedAtomicMeasure parse(const std::string& text);
  std::string to_string() const;

  const std::vector<std::pair<double, complex>>& atoms() const noexcept { return atoms_; }
  double total_variation() const noexcept { return total_variation_; }
  double min_position() const;
  double max_position() const;

 private:
  std::vector<std::pair<double, complex>> atoms_;
  double total_variation_ = 0.0;
};

/// Lambda * sigma on the shrunk region [lo + max x_j, hi + min x_j), where
/// the patch is exhaustive. Coincident atoms merge within 1e-9.
Comb apply_sigma(const Comb& comb, const BoundedAtomicMeasure& sigma);

complex sigma_fourier(const BoundedAtomicMeasure& sigma, double omega);

/// sigma * rho.
BoundedAtomicMeasure convolve(const BoundedAtomicMeasure& sigma, const BoundedAtomicMeasure& rho);

struct SigmaRow {
  double omega = 0.0;
  bool atom = false;           // atom intensity row, else density row
  double base = 0.0;           // estimate for Lambda
  double transformed = 0.0;    // estimate for Lambda * sigma
  double factor = 0.0;         // |sigma^(omega)|^2
  double relative_gap = 0.0;   // only for well-conditioned rows
  double absolute_gap = 0.0;
  bool excluded = false;       // factor below the conditioning floor
};

struct SigmaReport {
  std::vector<SigmaRow> rows;
  double max_relative_gap = 0.0;
  double max_absolute_gap_excluded = 0.0;
  std::size_t n_index = 0;
  std::size_t blocks = 0;
};

struct SigmaOptions {
  double conditioning_floor = 1e-3;
  /// Atoms below this intensity are treated as absent in relative gaps.
  double atom_floor = 1e-6;
};

/// Compares block-averaged atom intensities (at atom_frequencies) and
/// periodogram densities (at density_frequencies) of Lambda * sigma with
/// |sigma^|^2 times those of Lambda, both restricted to the common region.
SigmaReport verify_sigma_diffraction(const Comb& comb, const BoundedAtomicMeasure& sigma,
                                     const VanHoveSequence& seq, std::size_t n,
                                     const std::vector<double>& atom_frequencies,
                                     const std::vector<double>& density_frequencies,
                                     const SigmaOptions& options = {});

}  // namespace difflab
