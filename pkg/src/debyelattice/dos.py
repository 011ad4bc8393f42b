"""Integrated density of states from Brillouin-zone sampling."""

from dataclasses import dataclass

import numpy as np

from . import bloch


class InsufficientSamples(ValueError):
    pass


@dataclass(frozen=True)
class SpectralSamples:
    """Weighted eigenvalues: the empirical measure d(phi) on a Gamma grid.

    Each of the N^3 characters contributes its 3n eigenvalues with weight
    1/N^3, so the total weight is 3n.
    """

    lambdas: np.ndarray
    weights: np.ndarray
    grid_n: int
    n_atoms: int

    @property
    def total_weight(self):
        return float(self.weights.sum())

    @property
    def max_lambda(self):
        return float(self.lambdas.max())

    def sorted(self):
        order = np.argsort(self.lambdas, kind="stable")
        return self.lambdas[order], np.cumsum(self.weights[order])


@dataclass(frozen=True)
class IdsCurve:
    thresholds: np.ndarray
    values: np.ndarray


def samples_from_eigenvalues(eigs, n_atoms, grid_n):
    eigs = np.asarray(eigs, dtype=float)
    lam = eigs.ravel()
    return SpectralSamples(lam, np.full(lam.shape, 1.0 / grid_n ** 3), grid_n, n_atoms)


def sample_spectrum(crystal, N, method=None):
    """Dispersion over the Gamma-centred grid {j/N}^3, weight 1/N^3 each."""
    if N < 1:
        raise ValueError("grid size must be >= 1")
    return samples_from_eigenvalues(bloch.grid_dispersion(crystal, N, method), crystal.n, N)


def ids(samples, lam):
    """phi(lam): total weight of samples at or below `lam` (array-friendly)."""
    levels, cum = samples.sorted()
    idx = np.searchsorted(levels, lam, side="right")
    out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
    return float(out) if np.ndim(out) == 0 else out


def spectral_average(samples, f):
    """Integral of f against d(phi): sum_i w_i f(lambda_i)."""
    return float(np.dot(samples.weights, f(samples.lambdas)))


def ids_curve(crystal, N, thresholds, method=None):
    thresholds = np.asarray(thresholds, dtype=float)
    if np.any(np.diff(thresholds) < 0):
        raise ValueError("thresholds must be ascending")
    samples = sample_spectrum(crystal, N, method)
    return IdsCurve(thresholds, np.asarray(ids(samples, thresholds), dtype=float))


def default_window(samples):
    top = samples.max_lambda
    return top * 1e-3, top * 0.03


def fit_c0(samples_or_crystal, N=None, window=None, min_points=20, method=None):
    """Least-squares c0 in phi(lam) ~ c0 lam^{3/2} over a low-lambda window.

    The fit is a regression through the origin in the variable lam^{3/2},
    evaluated at the distinct sample levels inside the window:

        c0 = sum phi(l_i) l_i^{3/2} / sum l_i^3.

    Accepts either SpectralSamples or a crystal plus grid size `N`.
    """
    samples = samples_or_crystal
    if not isinstance(samples, SpectralSamples):
        if N is None:
            raise ValueError("grid size N is required when fitting from a crystal")
        samples = sample_spectrum(samples_or_crystal, N, method)
    lo, hi = window if window is not None else default_window(samples)
    levels = np.unique(samples.lambdas)
    levels = levels[(levels > lo) & (levels < hi)]
    if len(levels) < min_points:
        raise InsufficientSamples(
            f"only {len(levels)} sample levels in window ({lo:g}, {hi:g}); "
            f"need {min_points}")
    phi = ids(samples, levels)
    x = levels ** 1.5
    return float(np.dot(phi, x) / np.dot(x, x))
