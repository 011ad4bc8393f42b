"""Sound speeds, the Debye constant c0, and the continuum elastic limit.

Near the trivial character the three acoustic eigenvalues of -D_{t chi}
behave like t^2 times the eigenvalues of the 3x3 acoustic matrix

    A_chi = (2 pi^2 / m(V0)) sum_e (chi . v(e))^2 A(e),

so squared sound speeds are eigenvalues of A_chi.  All downstream
quantities use A_chi; :func:`linear_dispersion_limit` exists to check it
against the lattice dispersion.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bloch, numerics


class InadmissibleCrystal(ValueError):
    pass


@dataclass(frozen=True)
class AcousticTensor:
    direction: np.ndarray
    matrix: np.ndarray


@dataclass(frozen=True)
class SoundSpeeds:
    direction: np.ndarray
    speeds: np.ndarray


@dataclass(frozen=True)
class ElasticTensor:
    """Blocks ``blocks[i, j]`` are the 3x3 matrices A_ij; rho is the density."""

    blocks: np.ndarray
    density: float

    def acoustic_matrix(self, chi):
        chi = np.asarray(chi, dtype=float)
        return 4.0 * np.pi ** 2 / self.density * np.einsum(
            "...i,...j,ijab->...ab", chi, chi, self.blocks)

    def quadratic_form(self, chi):
        """sum_ij chi_i chi_j A_ij, the symbol of the elastic operator."""
        chi = np.asarray(chi, dtype=float)
        return np.einsum("...i,...j,ijab->...ab", chi, chi, self.blocks)


@dataclass(frozen=True)
class LameFit:
    a: float
    b: float
    density: float
    residual: float

    @property
    def c_l(self):
        v = (self.a + 2 * self.b) / self.density
        return float(np.sqrt(v)) if v > 0 else float("nan")

    @property
    def c_t(self):
        return float(np.sqrt(self.b / self.density)) if self.b > 0 else float("nan")

    @property
    def degenerate(self):
        # the Lame constants are physically positive; a <= 0 still gives
        # an isotropic tensor (e.g. the cubic scalar model, a = -b)
        return not (self.a > 0 and self.b > 0)


def acoustic_matrices(crystal, chis):
    """A_chi for a stack of Cartesian directions (..., 3) -> (..., 3, 3)."""
    chis = np.asarray(chis, dtype=float)
    proj = chis @ crystal.bond_vectors.T                       # (..., E)
    return 2.0 * np.pi ** 2 / crystal.total_mass * np.einsum(
        "...e,eab->...ab", proj ** 2, crystal.force_matrices)


def acoustic_matrix(crystal, chi):
    chi = np.asarray(chi, dtype=float)
    return AcousticTensor(chi, acoustic_matrices(crystal, chi))


def trace_identity_rhs(crystal, chi):
    """(2 pi^2 / m(V0)) sum_e (chi . v(e))^2 tr A(e)."""
    proj = np.asarray(chi, float) @ crystal.bond_vectors.T
    traces = np.trace(crystal.force_matrices, axis1=-2, axis2=-1)
    return 2.0 * np.pi ** 2 / crystal.total_mass * (proj ** 2 @ traces)


def squared_speeds(crystal, directions, method=None):
    """Ascending eigenvalues of A_Omega for a stack of directions."""
    return numerics.eigvalsh_symmetric(acoustic_matrices(crystal, directions), method)


def sound_speeds(crystal, omega, method=None):
    omega = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(omega) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    w = squared_speeds(crystal, omega, method)
    return SoundSpeeds(omega, np.sqrt(np.maximum(w, 0.0)))


def linear_dispersion_limit(crystal, chi, t, method=None):
    """The three smallest eigenvalues of -D at Cartesian t*chi, divided by t^2."""
    if not 0 < t <= 0.1:
        raise ValueError("t must lie in (0, 0.1]")
    k = bloch.Character.from_cartesian(crystal, t * np.asarray(chi, float))
    return bloch.dispersion(crystal, k, method)[:3] / t ** 2


def _inverse_cube_sum(crystal, nodes, method=None):
    w = squared_speeds(crystal, nodes, method)
    if np.any(w <= 0):
        raise InadmissibleCrystal("nonpositive sound speed encountered")
    return np.sum(w ** -1.5, axis=-1)


def sphere_integral(crystal, order, method=None):
    """Integral over S^2 of sum_alpha s_alpha(Omega)^{-3}."""
    rule = numerics.sphere_rule(order)
    return rule.integrate(_inverse_cube_sum(crystal, rule.nodes, method))


def c0_quadrature(crystal, order=16, method=None):
    """Debye constant c0 = (V/3) * integral over S^2 of sum s_alpha^{-3}."""
    if order < 4:
        raise ValueError("sphere quadrature order must be >= 4")
    return crystal.volume / 3.0 * sphere_integral(crystal, order, method)


def elastic_tensor(crystal, check=True):
    """A_ij = (1/2V) sum_e v(e)_i v(e)_j A(e), with density m(V0)/V.

    With `check`, the identity A_chi = (4 pi^2/rho) sum chi_i chi_j A_ij is
    verified against :func:`acoustic_matrices` on a few fixed directions.
    """
    v = crystal.bond_vectors
    blocks = np.einsum("ei,ej,eab->ijab", v, v, crystal.force_matrices) / (2.0 * crystal.volume)
    tensor = ElasticTensor(blocks, crystal.total_mass / crystal.volume)
    if check:
        probes = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 2, 3], [-2, 1, 0.5]], float)
        lhs = acoustic_matrices(crystal, probes)
        rhs = tensor.acoustic_matrix(probes)
        scale = max(np.abs(lhs).max(), 1e-300)
        if np.abs(lhs - rhs).max() > 1e-10 * scale:
            raise RuntimeError("elastic tensor inconsistent with the acoustic matrix")
    return tensor


def isotropic_tensor(a, b, density=1.0):
    """Elastic tensor whose symbol is (a+b) chi chi^T + b |chi|^2 I."""
    d = np.eye(3)
    blocks = (0.5 * (a + b) * (np.einsum("ia,jb->ijab", d, d) + np.einsum("ib,ja->ijab", d, d))
              + b * np.einsum("ij,ab->ijab", d, d))
    return ElasticTensor(blocks, float(density))


def fit_directions():
    """26 normalised vectors of {-1,0,1}^3 plus 24 seeded random unit vectors."""
    grid = np.array([(i, j, k) for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)
                     if (i, j, k) != (0, 0, 0)], dtype=float)
    grid /= np.linalg.norm(grid, axis=1, keepdims=True)
    rand = np.random.default_rng(20240607).normal(size=(24, 3))
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    return np.vstack([grid, rand])


def fit_lame(tensor, tol):
    """Fit Lame constants to an elastic tensor; None when it is anisotropic.

    Solves for (a, b) in sum_ij (A_ij)_ab chi_i chi_j = (a+b) chi_a chi_b +
    b delta_ab |chi|^2 by least squares over :func:`fit_directions`.  The
    residual is the largest pointwise misfit; the tensor counts as isotropic
    when it is at most ``tol`` times the largest tensor entry.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    dirs = fit_directions()
    target = tensor.quadratic_form(dirs)                       # (D, 3, 3)
    outer = np.einsum("da,db->dab", dirs, dirs)
    iso = np.einsum("d,ab->dab", np.sum(dirs ** 2, axis=1), np.eye(3))
    # columns for a and b: a * outer + b * (outer + iso)
    design = np.stack([outer.ravel(), (outer + iso).ravel()], axis=1)
    (a, b), *_ = np.linalg.lstsq(design, target.ravel(), rcond=None)
    residual = float(np.abs(design @ np.array([a, b]) - target.ravel()).max())
    scale = max(np.abs(tensor.blocks).max(), 1e-300)
    if residual > tol * scale:
        return None
    return LameFit(float(a), float(b), tensor.density, residual)


def isotropy_fit(crystal, tol=1e-9) -> Optional[LameFit]:
    return fit_lame(elastic_tensor(crystal), tol)


def c0_isotropic(c_l, c_t, volume):
    """c0 = (V / 6 pi^2) (1/c_l^3 + 2/c_t^3) for an isotropic continuum."""
    if not (c_l > 0 and c_t > 0 and volume > 0):
        raise ValueError("c_l, c_t and V must be positive")
    return volume / (6.0 * np.pi ** 2) * (c_l ** -3 + 2.0 * c_t ** -3)


def continuum_ids(c0, lam):
    """phi_0(lam) = c0 lam^{3/2} for lam > 0, else 0."""
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    lam = np.asarray(lam, dtype=float)
    out = np.where(lam > 0, c0 * np.abs(lam) ** 1.5, 0.0)
    return float(out) if out.ndim == 0 else out


def continuum_heat_trace(crystal, t, order=16, method=None):
    """L-trace of exp(t D) for the continuum elastic operator.

    Computed as (sqrt(pi)/4) V t^{-3/2} times the sphere integral of
    sum s_alpha^{-3}, then checked against the closed form
    (3/4) sqrt(pi) c0 t^{-3/2}.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    integral = sphere_integral(crystal, order, method)
    value = np.sqrt(np.pi) / 4.0 * crystal.volume * t ** -1.5 * integral
    c0 = crystal.volume / 3.0 * integral
    closed = 0.75 * np.sqrt(np.pi) * c0 * t ** -1.5
    if abs(value - closed) > 1e-10 * abs(closed):
        raise RuntimeError("heat trace disagrees with its closed form")
    return float(value)


def continuum_laplace(c0, t):
    """Numerical Laplace transform of d(phi_0) at `t`.

    With lam = y^2, d(c0 lam^{3/2}) = 3 c0 y^2 dy, so the transform is
    3 c0 times the integral of y^2 exp(-t y^2) over the half-line.
    """
    if not (c0 > 0 and t > 0):
        raise ValueError("c0 and t must be positive")
    return 3.0 * c0 * numerics.integrate_halfline(lambda y: y * y * np.exp(-t * y * y))
