#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "difflab/comb.hpp"

namespace difflab {

/// Nested centered intervals A_n = [-L_n, L_n), |A_n| = 2 L_n.
class VanHoveSequence {
 public:
  explicit VanHoveSequence(std::vector<double> half_lengths);
  /// L = base * k for every k in `multipliers`.
  static VanHoveSequence linear(double base, const std::vector<int>& multipliers);

  std::size_t size() const noexcept { return half_lengths_.size(); }
  double half_length(std::size_t n) const;
  double volume(std::size_t n) const { return 2.0 * half_length(n); }
  Interval window(std::size_t n) const { return Interval::centered(half_length(n)); }
  const std::vector<double>& half_lengths() const noexcept { return half_lengths_; }

 private:
  std::vector<double> half_lengths_;
};

/// Boundary-collar fraction 2 k_len / |A_n| of a centered interval.
double van_hove_defect(const VanHoveSequence& seq, std::size_t n, double k_len);

/// Disjoint translates A_n + j |A_n| (j in Z) that fit inside `region`.
std::vector<Interval> van_hove_blocks(const VanHoveSequence& seq, std::size_t n,
                                      const Interval& region);

inline constexpr double kReliableMargin = 0.1;

/// Truncated autocorrelation gamma_n, possibly restricted to lags
/// |z| <= max_lag and averaged over `blocks` disjoint translates of A_n.
struct Autocorr {
  Comb comb;
  std::size_t n_index = 0;
  double volume = 0.0;
  std::uint64_t source_hash = 0;
  double max_lag = std::numeric_limits<double>::infinity();
  std::size_t blocks = 1;

  /// Atoms beyond (1 - margin) |A_n| are boundary-contaminated.
  double reliable_radius() const;
  /// gamma(z) / (1 - |z| / |A_n|): removes the triangular finite-window bias.
  complex debiased(std::size_t i) const;
};

std::uint64_t comb_hash(const Comb& comb);

/// (1/|A_n|) Lambda|A_n * (Lambda|A_n)~ through the full finite convolution.
Autocorr truncated_autocorr(const Comb& comb, const VanHoveSequence& seq, std::size_t n,
                            const ConvolveOptions& options = {});

/// Same measure as truncated_autocorr on lags |z| <= max_lag, computed by
/// direct pair enumeration over the window `a` (|a| is the normalization).
Autocorr windowed_autocorr(const Comb& comb, const Interval& a, double max_lag);

/// Ergodic (Birkhoff) average of windowed autocorrelations over all disjoint
/// translates of A_n inside the comb region.
Autocorr block_autocorr(const Comb& comb, const VanHoveSequence& seq, std::size_t n,
                        double max_lag);

/// int phi d gamma = sum_z gamma(z) phi(z).
complex integrate(const Autocorr& gamma, const TestFunction& phi);

struct ConvergenceRow {
  std::size_t n = 0;
  double half_length = 0.0;
  std::vector<complex> values;  // one per test function
  double residual = std::numeric_limits<double>::quiet_NaN();  // vs previous row
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool residuals_decreasing = true;
};

ConvergenceTable autocorr_convergence(const Comb& comb, const VanHoveSequence& seq,
                                      const std::vector<TestFunction>& phis);

/// Half-integer-centred tents used to monitor vague convergence.
std::vector<TestFunction> standard_test_battery(double half_width = 0.4, int max_center = 2);

struct PositiveDefiniteOptions {
  std::size_t random_trials = 200;
  std::size_t max_translates = 4;
  std::uint64_t seed = 12345;
  double tolerance = 1e-9;
};

struct PositiveDefiniteVerdict {
  bool pass = true;
  bool hermitian = true;
  double worst_value = std::numeric_limits<double>::infinity();
  std::string violation;  // description of the violating combination
};

/// Checks int psi * psi~ d gamma >= -tol for every phi and for finite
/// combinations psi = sum a_i phi(. - t_i). Fails immediately when gamma is
/// not hermitian.
PositiveDefiniteVerdict check_positive_definite(const Autocorr& gamma,
                                                const std::vector<TestFunction>& phis,
                                                const PositiveDefiniteOptions& options = {});

/// Largest |gamma(-z) - conj(gamma(z))| relative to the largest |gamma|;
/// +inf when some atom has no mirror.
double hermitian_defect(const Comb& gamma);

}  // namespace difflab
