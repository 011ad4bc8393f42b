import numpy as np
import pytest
from scipy.linalg import expm

from debyelattice import acoustic, bloch, dos


def test_normalization(crystal):
    s = dos.sample_spectrum(crystal, 4)
    assert s.total_weight == pytest.approx(3 * crystal.n, abs=1e-12)
    assert dos.spectral_average(s, np.ones_like) == pytest.approx(3 * crystal.n, abs=1e-12)
    assert dos.ids(s, s.max_lambda) == pytest.approx(3 * crystal.n, abs=1e-12)
    assert dos.ids(s, -1.0) == 0.0


def test_ids_cubic_grid_two(cubic):
    s = dos.sample_spectrum(cubic, 2)
    # brute force: levels 0,4,4,4,8,8,8,12 per branch, weight 1/8 each, 3 branches
    levels = np.repeat(4.0 * np.array([0, 1, 1, 1, 2, 2, 2, 3]), 3)
    for lam in (0.0, 3.9, 4.0, 7.0, 8.0, 12.0):
        assert dos.ids(s, lam) == pytest.approx(np.sum(levels <= lam) / 8)
    assert dos.ids(s, 4.0) == pytest.approx(1.5)


def test_ids_vectorized_and_monotone(diamond):
    s = dos.sample_spectrum(diamond, 3)
    lam = np.linspace(-1, 20, 200)
    phi = dos.ids(s, lam)
    assert phi.shape == lam.shape
    assert np.all(np.diff(phi) >= 0)
    assert phi[0] == 0 and phi[-1] == pytest.approx(6)
    np.testing.assert_allclose(phi, [dos.ids(s, x) for x in lam])


def test_ids_counts_supercell_levels(diamond):
    # normalised supercell counting is an independent route to phi
    N = 3
    s = dos.sample_spectrum(diamond, N)
    sc = bloch.supercell_spectrum(diamond, N)
    levels = np.unique(np.round(sc, 9))
    for lam in 0.5 * (levels[1:] + levels[:-1]):
        assert dos.ids(s, lam) == pytest.approx(np.sum(sc <= lam) / N ** 3, abs=1e-12)


def test_average_of_lambda_is_mean_trace(crystal):
    N = 3
    s = dos.sample_spectrum(crystal, N)
    traces = np.trace(bloch.bloch_matrices(crystal, bloch.gamma_grid(N)), axis1=1, axis2=2).real
    assert dos.spectral_average(s, lambda x: x) == pytest.approx(traces.mean(), rel=1e-12)


def test_cubic_average_of_lambda(cubic):
    # every Bloch trace is 3 * 2 sum(1 - cos 2 pi k_i); its grid mean is 18
    s = dos.sample_spectrum(cubic, 2)
    assert dos.spectral_average(s, lambda x: x) == pytest.approx(18.0)


def test_heat_kernel_trace(diamond):
    N = 2
    s = dos.sample_spectrum(diamond, N)
    oracle = np.trace(expm(-bloch.supercell_operator(diamond, N))) / N ** 3
    assert dos.spectral_average(s, lambda x: np.exp(-x)) == pytest.approx(oracle, rel=1e-10)


def test_ids_curve_requires_ascending(cubic):
    curve = dos.ids_curve(cubic, 2, [0, 4, 8])
    np.testing.assert_allclose(curve.values, [3 / 8, 1.5, 21 / 8])
    with pytest.raises(ValueError):
        dos.ids_curve(cubic, 2, [4, 0])


def test_fit_c0_recovers_power_law():
    # synthetic samples drawn exactly from phi = c lam^{3/2}
    c = 0.37
    lam = np.linspace(1e-3, 1.0, 4000)
    w = np.diff(np.concatenate([[0.0], c * lam ** 1.5]))
    s = dos.SpectralSamples(lam, w, grid_n=1, n_atoms=1)
    assert dos.fit_c0(s, window=(0.01, 0.5)) == pytest.approx(c, rel=1e-3)


def test_fit_c0_diamond_moderate_grid(diamond):
    est = dos.fit_c0(diamond, N=24, window=(0.05, 0.3))
    assert est == pytest.approx(acoustic.c0_quadrature(diamond), rel=0.1)


def test_fit_c0_insufficient_samples(cubic):
    with pytest.raises(dos.InsufficientSamples):
        dos.fit_c0(cubic, N=2)
    with pytest.raises(ValueError):
        dos.fit_c0(cubic)


def test_refinement_gap_shrinks(diamond):
    lam = np.linspace(0, 8, 4001)
    phi = {N: dos.ids(dos.sample_spectrum(diamond, N), lam) for N in (4, 8, 16, 32)}
    gaps = [np.abs(phi[N] - phi[2 * N]).max() for N in (4, 8, 16)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_spectral_average_linear_and_monotone(diamond):
    s = dos.sample_spectrum(diamond, 3)
    f, g = np.sqrt, lambda x: x / 4
    lhs = dos.spectral_average(s, lambda x: 2 * f(x) - 3 * g(x))
    assert lhs == pytest.approx(2 * dos.spectral_average(s, f) - 3 * dos.spectral_average(s, g))
    # sqrt(x) <= 1 + x/4 pointwise
    assert dos.spectral_average(s, f) <= dos.spectral_average(s, lambda x: 1 + g(x))
