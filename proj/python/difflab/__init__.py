"""Diffraction of weighted Dirac combs: model sets, autocorrelation,
diffraction estimates, random-weight decompositions."""

from ._core import (  # noqa: F401
    Comb,
    DiffractionEstimate,
    DifflabError,
    apply_sigma,
    autocorrelation,
    bernoulli_comb,
    bragg_intensity,
    decompose,
    diffraction,
    fibonacci_comb,
    fibonacci_points,
    lattice_comb,
    sigma_fourier,
    support_density,
    torus_class,
)

__version__ = "0.1.0"
