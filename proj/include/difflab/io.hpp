#pragma once

// Plain-text artifacts: patch, comb and autocorrelation files, diffraction
// CSVs, plot data and decomposition reports.

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "difflab/autocorr.hpp"
#include "difflab/comb.hpp"
#include "difflab/diffraction.hpp"
#include "difflab/ergodic.hpp"
#include "difflab/exact_cps.hpp"
#include "difflab/transfer.hpp"

namespace difflab {

namespace fs = std::filesystem;

/// Round-trippable decimal form (17 significant digits).
std::string format_double(double x);

/// Header line "#<format> key=value ..." split into its fields; "format" maps
/// to the leading word.
std::map<std::string, std::string> parse_header(const std::string& line);

void write_patch(const PointPatch& patch, const fs::path& path);
PointPatch read_patch(const fs::path& path);

/// "#comb region=lo,hi bound=M exact=0|1 [extra]" then "pos\tre\tim[\tm\tn]".
void write_comb(const Comb& comb, const fs::path& path, const std::string& extra_header = "");
Comb read_comb(const fs::path& path, std::map<std::string, std::string>* header = nullptr);

/// Comb format with kind=autocorr n=.. vol=.. max_lag=.. blocks=.. hash=..
void write_autocorr(const Autocorr& gamma, const fs::path& path);
Autocorr read_autocorr(const fs::path& path);

/// omega,value,kind,trace_0,...: ATOM / UNRESOLVED rows, then DENSITY rows.
void write_diffraction_csv(const DiffractionEstimate& estimate, const fs::path& path);
std::string diffraction_csv(const DiffractionEstimate& estimate);

/// Writes <stem>_atoms.dat (impulses) and <stem>_density.dat (curve).
/// Throws InvalidArgument on an empty estimate.
std::pair<fs::path, fs::path> emit_plot_data(const DiffractionEstimate& estimate,
                                             const fs::path& stem);

void write_decomposition_csv(const std::vector<DecompositionReport>& reports, const fs::path& path);
std::string decomposition_summary(const std::vector<DecompositionReport>& reports,
                                  const SeedConsistency& consistency);

void write_sigma_csv(const SigmaReport& report, const fs::path& path);

/// Writes text to a file, throwing Io on failure.
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace difflab
