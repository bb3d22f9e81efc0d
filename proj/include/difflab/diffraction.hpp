#pragma once

// Estimation of the diffraction measure: Bragg intensities from finite
// exponential sums, tapered continuous densities, the atomic / continuous
// split, and the test-function identity linking autocorrelation and
// diffraction.

#include <optional>
#include <string>
#include <vector>

#include "difflab/autocorr.hpp"
#include "difflab/comb.hpp"

namespace difflab {

/// Uniform grid lo, lo + step, ..., up to hi (inclusive within step/2).
struct FrequencyGrid {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.01;

  std::vector<double> points() const;
};

enum class AtomKind { Atom, ContinuousArtifact, Unresolved };
std::string_view to_string(AtomKind kind);

struct AtomEstimate {
  double omega = 0.0;
  double intensity = 0.0;      // at the largest Van Hove index
  AtomKind kind = AtomKind::Unresolved;
  std::vector<double> trace;   // intensity per Van Hove index
  bool from_candidate = false;
};

struct DensitySample {
  double omega = 0.0;
  double density = 0.0;
  double taper_scale = 0.0;
  bool near_atom = false;  // within exclusion / taper_scale of a fitted atom
};

struct SpectralOptions {
  /// Lag scale T of the triangular (Fejer) taper used for densities.
  double taper_scale = 24.0;
  /// Atoms are searched this far beyond the requested grid so their
  /// leakage can be removed from the density.
  double atom_margin = 4.0;
  /// Scan maxima count as candidates when |A| * intensity exceeds this
  /// multiple of the median scan level.
  double significance = 30.0;
  double min_atom_intensity = 1e-5;
  bool scan = true;
  std::size_t max_scan_blocks = 8;
  /// Classification knobs.
  double stable_spread = 0.10;
  double decay_r2 = 0.9;
  double decay_slope_tolerance = 0.3;
  /// Density samples closer than near_atom_exclusion / taper_scale to a
  /// fitted atom of at least near_atom_fraction times the strongest atom
  /// are flagged.
  double near_atom_exclusion = 2.0;
  double near_atom_fraction = 0.01;
  /// Average estimators over all disjoint translates of A_n in the region.
  bool block_average = true;
};

struct DiffractionEstimate {
  std::vector<AtomEstimate> atoms;      // kind Atom or Unresolved, sorted by omega
  std::vector<AtomEstimate> rejected;   // continuous artifacts, for diagnostics
  std::vector<DensitySample> density_samples;
  std::vector<double> volumes;          // |A_n| of the traced indices
  std::size_t n_max = 0;
  std::size_t blocks_at_n_max = 1;
  double taper_scale = 0.0;
  std::vector<std::string> warnings;

  bool empty() const noexcept { return atoms.empty() && density_samples.empty(); }
  /// Fitted atom within tol of omega, if any (kind Atom only).
  std::optional<AtomEstimate> atom_near(double omega, double tol = 1e-6) const;
  /// Max |density| over samples; optionally skipping near-atom samples.
  double max_abs_density(bool skip_near_atoms = false) const;
};

/// |(1/|A_n|) sum_{t in A_n} c_t e^{-2 pi i omega t}|^2 on the single window A_n.
double bragg_intensity(const Comb& comb, double omega, const VanHoveSequence& seq, std::size_t n);

/// Average of the same intensity over disjoint translates of A_n.
double bragg_intensity_averaged(const Comb& comb, double omega, const VanHoveSequence& seq,
                                std::size_t n, std::size_t max_blocks = 0);

/// Block-averaged intensities on the uniform frequency grid omega0 + k step,
/// k < count, evaluated by phasor recurrence.
std::vector<double> scan_intensities(const Comb& comb, const std::vector<Interval>& blocks,
                                     double omega0, double step, std::size_t count);

/// Character average (1/2R) sum_{|z|<=R} gamma_deb(z) e^{-2 pi i omega z}
/// of the debiased autocorrelation; estimates the atom of the diffraction at
/// omega. Throws BoundaryContamination when R exceeds the reliable radius.
double atom_from_autocorr(const Autocorr& gamma, double omega, double avg_radius);

/// Continuous Fejer kernel T sinc^2(T nu), unit mass.
double fejer_kernel(double nu, double taper_scale);

/// sum_z w(z/T) gamma_deb(z) e^{-2 pi i omega z} - sum_k I_k F_T(omega - omega_k)
/// with w(u) = max(0, 1 - |u|).
double continuous_density(const Autocorr& gamma, double omega, double taper_scale,
                          const std::vector<AtomEstimate>& atoms = {});

/// Same estimator with T = |A_n| evaluated through block periodograms.
double periodogram_density(const Comb& comb, double omega, const VanHoveSequence& seq,
                           std::size_t n, const std::vector<AtomEstimate>& atoms = {},
                           std::size_t max_blocks = 0);

DiffractionEstimate split_pp_cont(const Comb& comb, const VanHoveSequence& seq,
                                  const std::vector<double>& candidates, const FrequencyGrid& grid,
                                  const SpectralOptions& options = {});

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_gap = 0.0;
  double atom_part = 0.0;
  double density_part = 0.0;
};

/// Compares sum_k I_k |phi^(omega_k)|^2 + int density |phi^|^2 with
/// sum_z (phi * phi~)(z) gamma_n(z). The estimate's density samples must
/// cover the frequency band carrying |phi^|^2 >= 1e-8 of its peak.
IdentityCheck verify_diffraction_identity(const Comb& comb, const VanHoveSequence& seq,
                                          std::size_t n, const DiffractionEstimate& estimate,
                                          const TestFunction& phi);

/// Half-width of the band outside which |phi^|^2 stays below rel of its peak.
double fourier_band(const TestFunction& phi, double rel = 1e-8);

}  // namespace difflab
