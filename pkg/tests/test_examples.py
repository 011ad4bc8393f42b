"""Smaller per-operation examples not covered by the module suites."""

import numpy as np
import pytest

from debyelattice import acoustic, bloch, build_cubic, build_diamond, cli, dos, numerics, thermo
from debyelattice.thermo import PhysicalConstants


def test_builder_parameters():
    c = build_cubic(2.0, 3.0)
    assert c.total_mass == 2.0
    np.testing.assert_array_equal(c.force_matrices, np.broadcast_to(3 * np.eye(3), (6, 3, 3)))
    assert build_diamond((1.0, 2.0)).total_mass == 3.0


def test_diamond_bond_vector_set(diamond):
    got = {tuple(v) for v in diamond.bond_vectors[diamond.origins == 0]}
    assert got == {(0.5, 0.5, 0.5), (-0.5, -0.5, 0.5), (-0.5, 0.5, -0.5), (0.5, -0.5, -0.5)}


@pytest.mark.parametrize("method", ["jacobi", "lapack"])
def test_trivial_eigen_cases(method):
    np.testing.assert_allclose(numerics.eigvalsh_symmetric(np.eye(3), method), 1.0)
    np.testing.assert_allclose(numerics.eigvalsh_symmetric(np.array([[5.0]]), method), [5.0])
    a = np.array([[1.0, 2.0, 0.0], [2.0, -1.0, 0.5], [0.0, 0.5, 3.0]])
    np.testing.assert_allclose(numerics.eigvalsh_hermitian(a.astype(complex), method),
                               numerics.eigvalsh_symmetric(a, method), atol=1e-14)


def test_bose_integral_node_doubling():
    assert abs(numerics.bose_integral(3, nodes=32) - numerics.bose_integral(3, nodes=16)) < 1e-10


def test_band_path_examples(cubic):
    t = bloch.band_path(cubic, [(0, 0, 0), (0.5, 0, 0)], 2)
    np.testing.assert_allclose(t.branches[:, 0], [0, 2 - 2 * np.cos(np.pi / 2), 4], atol=1e-14)
    assert len(bloch.band_path(cubic, [(0, 0, 0), (0.5, 0, 0)], 1).branches) == 2
    same = bloch.band_path(cubic, [(0.1, 0.2, 0.3), (0.1, 0.2, 0.3)], 3).branches
    assert np.all(same == same[0])


def test_supercell_small_examples(cubic, diamond):
    np.testing.assert_array_equal(bloch.supercell_operator(cubic, 1), np.zeros((3, 3)))
    h = bloch.supercell_operator(diamond, 2)
    assert h.shape == (48, 48)
    assert np.sum(bloch.supercell_spectrum(diamond, 2)) == pytest.approx(np.trace(h), rel=1e-13)


def test_single_cell_samples(diamond):
    s = dos.sample_spectrum(diamond, 1)
    np.testing.assert_array_equal(s.weights, 1.0)
    np.testing.assert_allclose(np.sort(s.lambdas), [0, 0, 0, 8, 8, 8], atol=1e-13)
    assert dos.sample_spectrum(build_diamond(), 2).total_weight == pytest.approx(6)


def test_ids_above_spectrum(cubic):
    s = dos.sample_spectrum(cubic, 2)
    assert dos.ids(s, 13.0) == pytest.approx(3.0)
    assert np.all(dos.ids(s, np.array([-3.0, -1.0])) == 0)


def test_ids_curve_matches_supercell_n4(cubic):
    sc = bloch.supercell_spectrum(cubic, 4)
    levels = np.unique(np.round(sc, 9))
    th = np.sort(np.concatenate([0.5 * (levels[1:] + levels[:-1]), [-1.0, 13.0]]))
    curve = dos.ids_curve(cubic, 4, th)
    np.testing.assert_allclose(curve.values, [np.sum(sc <= x) / 64 for x in th], atol=1e-12)


def test_acoustic_small_examples(crystal, rng):
    np.testing.assert_array_equal(acoustic.acoustic_matrices(crystal, np.zeros(3)), 0.0)
    omega = rng.normal(size=3)
    omega /= np.linalg.norm(omega)
    np.testing.assert_array_equal(acoustic.sound_speeds(crystal, omega).speeds,
                                  acoustic.sound_speeds(crystal, -omega).speeds)
    expected = 2 * np.pi if crystal.n == 1 else np.pi * np.sqrt(2)
    np.testing.assert_allclose(acoustic.sound_speeds(crystal, omega).speeds, expected, rtol=1e-13)


def test_cubic_dispersion_ratio_and_richardson(cubic, rng):
    chi = rng.normal(size=3)
    chi /= np.linalg.norm(chi)
    r1 = acoustic.linear_dispersion_limit(cubic, chi, 1e-3)
    np.testing.assert_allclose(r1, 4 * np.pi ** 2, rtol=1e-5)
    r2 = acoustic.linear_dispersion_limit(cubic, chi, 5e-4)
    # the O(t^2) correction shrinks by 4 when t is halved
    ratio = np.abs(r1 - 4 * np.pi ** 2) / np.abs(r2 - 4 * np.pi ** 2)
    np.testing.assert_allclose(ratio, 4.0, rtol=1e-3)


def test_order_doubling_exact_for_isotropic(crystal):
    assert abs(acoustic.c0_quadrature(crystal, 16) - acoustic.c0_quadrature(crystal, 32)) < 1e-12


def test_elastic_consistency_random(diamond, rng):
    t = acoustic.elastic_tensor(diamond)
    chis = rng.normal(size=(10, 3))
    np.testing.assert_allclose(t.acoustic_matrix(chis), acoustic.acoustic_matrices(diamond, chis),
                               atol=1e-10)


def test_lame_round_trip_one_two():
    fit = acoustic.fit_lame(acoustic.isotropic_tensor(1.0, 2.0), 1e-12)
    assert abs(fit.a - 1) < 1e-10 and abs(fit.b - 2) < 1e-10


def test_isotropic_c0_equal_speeds():
    c, V = 1.7, 2.3
    assert acoustic.c0_isotropic(c, c, V) == pytest.approx(V / (2 * np.pi ** 2 * c ** 3), rel=1e-14)


def test_continuum_examples(cubic):
    assert acoustic.continuum_ids(0.3, 0.0) == 0.0
    assert acoustic.continuum_ids(1 / (2 * np.pi ** 2), 1.0) == pytest.approx(0.0506606, abs=1e-7)
    # 0.75 * 1.7724538509 / 19.7392088022
    assert acoustic.continuum_heat_trace(cubic, 1.0) == pytest.approx(0.0673452, abs=1e-7)
    assert acoustic.continuum_heat_trace(cubic, 0.5) == pytest.approx(
        8 * acoustic.continuum_heat_trace(cubic, 2.0), rel=1e-14)


def _single(lam, weight, n):
    return dos.SpectralSamples(np.array([lam], float), np.array([weight], float), 1, n)


def test_zero_point_energy_examples(diamond):
    assert thermo.zero_point_energy(_single(0.0, 6, 2)) == 0.0
    s = dos.sample_spectrum(diamond, 3)
    s4 = dos.SpectralSamples(4 * s.lambdas, s.weights, 3, 2)
    assert thermo.zero_point_energy(s4) == pytest.approx(2 * thermo.zero_point_energy(s), rel=1e-14)


def test_internal_energy_examples():
    T = 0.8
    assert thermo.internal_energy(_single(0.0, 6, 2), T) == pytest.approx(6 * T)
    lam0 = 2.0
    x = np.sqrt(lam0) / T
    assert thermo.internal_energy(_single(lam0, 6, 2), T) == pytest.approx(
        6 * np.sqrt(lam0) / np.expm1(x), rel=1e-14)


def test_debye_parameter_examples():
    lam_D = thermo.debye_lambda(1 / (2 * np.pi ** 2), 1)
    assert lam_D == pytest.approx((6 * np.pi ** 2) ** (2 / 3), rel=1e-14)
    assert lam_D == pytest.approx(15.192, abs=1e-3)
    assert thermo.debye_lambda(3.0, 1) == pytest.approx(1.0)
    assert thermo.debye_lambda(0.7, 2) == pytest.approx(2 ** (2 / 3) * thermo.debye_lambda(0.7, 1))
    assert thermo.debye_temperature(lam_D) == pytest.approx(3.898, abs=1e-3)
    assert thermo.debye_temperature(1.0) == 1.0
    assert thermo.debye_temperature(2.5, PhysicalConstants(hbar=2.0)) == pytest.approx(
        2 * thermo.debye_temperature(2.5))


def test_debye_model_shape():
    theta = 3.9
    assert thermo.debye_specific_heat(theta, 2, 100 * theta) == pytest.approx(6.0, rel=0.01)
    c = [thermo.debye_specific_heat(theta, 1, T) for T in np.geomspace(0.01, 100, 60)]
    assert np.all(np.diff(c) >= 0)


def test_einstein_high_temperature():
    assert thermo.einstein_specific_heat(2.0, 1, 100 * np.sqrt(2.0)) == pytest.approx(3.0, rel=1e-3)


def test_isotropic_t3_coefficient():
    c_l, c_t, V = 2.0, 1.2, 1.5
    _, coef = thermo.t3_coefficients(acoustic.c0_isotropic(c_l, c_t, V))
    assert coef == pytest.approx(2 / 15 * np.pi ** 2 * V * (c_l ** -3 + 2 * c_t ** -3), rel=1e-14)


def test_heat_cli_low_temperature_slope(tmp_path):
    out = tmp_path / "heat.csv"
    spec = str(__import__("pathlib").Path(__file__).resolve().parents[1] / "lattices" / "cubic.spec")
    assert cli.run(["heat", spec, "--grid", "24", "--tmin", "0.01", "--tmax", "100",
                    "--tsteps", "60", "-o", str(out)]) == 0
    d = np.loadtxt(out, delimiter=",", skiprows=1)
    T, C = d[:, 0], d[:, 2]
    assert C[-1] == pytest.approx(3.0, rel=1e-3)
    # below T ~ 0.03 the three Gamma zero modes (weight 1/N^3) set a floor 3/N^3
    band = (T > 0.06) & (T < 0.2)
    slope = np.polyfit(np.log(T[band]), np.log(C[band]), 1)[0]
    assert 2.8 < slope < 3.4
