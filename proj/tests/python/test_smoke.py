import math

import pytest

import difflab

TAU = (1 + math.sqrt(5)) / 2


def test_fibonacci_points_density():
    pts = difflab.fibonacci_points((0.0, 10000.0))
    assert abs(len(pts) / 1e4 - TAU / math.sqrt(5)) < 1e-3


def test_lattice_bragg_peaks():
    z = difflab.lattice_comb((-20.0, 20.0))
    assert len(z) == 41
    assert difflab.bragg_intensity(z, 0.0, 10.5) == pytest.approx(1.0)
    assert difflab.bragg_intensity(z, 0.5, 2.5) == pytest.approx(0.04)


def test_lattice_diffraction():
    z = difflab.lattice_comb((-1000.0, 1000.0))
    est = difflab.diffraction(z, [250, 500, 1000], list(range(-4, 8)), (0.0, 3.0, 0.05), scan=False)
    atoms = {round(a.omega): a.intensity for a in est.atoms if a.kind == "ATOM"}
    assert sorted(atoms) == list(range(-4, 8))
    assert all(abs(v - 1.0) < 1e-3 for v in atoms.values())
    assert max(abs(d) for _, d in est.density) < 5e-3


def test_bernoulli_decomposition():
    b = difflab.bernoulli_comb(0.5, 1, (-50.0, 50.0))
    p, c, exact = difflab.decompose(b, 0.5)
    assert exact
    assert set(p.weights) == {0.5}
    assert {abs(w) for w in c.weights} == {0.5}


def test_fibonacci_decomposition_support():
    b = difflab.bernoulli_comb(0.5, 3, (-100.0, 100.0), fibonacci=True)
    p, c, exact = difflab.decompose(b, 0.5, fibonacci=True)
    assert exact
    assert list(p.positions) == pytest.approx(difflab.fibonacci_points((-100.0, 100.0)))


def test_sigma():
    assert abs(difflab.sigma_fourier("0:0.5,1:0.5", 0.5)) < 1e-15
    assert abs(difflab.sigma_fourier("0:0.5,1:0.5", 1 / 3)) ** 2 == pytest.approx(0.25)
    z = difflab.lattice_comb((-10.0, 10.0))
    halves = difflab.apply_sigma(z, "0:0.5,0.5:0.5")
    assert set(halves.weights) == {0.5}


def test_support_density_and_torus():
    z = difflab.lattice_comb((-1001.0, 1001.0))
    assert difflab.support_density(z, 1.0, 1000.0) == 1.0
    cls = difflab.torus_class(0.1, 200.0)
    assert abs(cls["w"] - 0.1) <= cls["width"] / 2
    assert cls["width"] < 1e-2


def test_errors_are_typed():
    z = difflab.lattice_comb((-10.0, 10.0))
    with pytest.raises(difflab.DifflabError):
        difflab.bragg_intensity(z, 0.0, 50.0)
