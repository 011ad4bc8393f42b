"""Bloch matrices, dispersion branches, and the periodic supercell operator.

Everything is stored for the nonnegative operator -D.  Both the Bloch matrix
and the supercell matrix are conjugated by diag(sqrt(m)) so that
self-adjointness in the mass-weighted inner product becomes ordinary
Hermitian symmetry:

    H_chi = M^{1/2} (-D_chi) M^{-1/2}.
"""

from dataclasses import dataclass

import numpy as np

from . import numerics

SUPERCELL_DIMENSION_CAP = 1000


class SupercellTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Character:
    """Unitary character of L, given by fractional coordinates in L*."""

    fractional: tuple

    @classmethod
    def from_cartesian(cls, crystal, chi):
        # chi = sum_j k_j b*_j  <=>  k_j = chi . b_j
        return cls(tuple(float(x) for x in crystal.basis.matrix @ np.asarray(chi, float)))

    def cartesian(self, crystal):
        return np.asarray(self.fractional, float) @ crystal.basis.dual_matrix


@dataclass(frozen=True)
class BlochMatrix:
    character: Character
    matrix: np.ndarray


@dataclass(frozen=True)
class DispersionTable:
    path: np.ndarray        # (rows, 3) fractional coordinates
    segment: np.ndarray     # (rows,) waypoint segment index
    t: np.ndarray           # (rows,) position inside the segment, in [0, 1]
    branches: np.ndarray    # (rows, 3n) ascending eigenvalues


def _as_fractional(k):
    k = np.asarray(k, dtype=float)
    if k.shape[-1] != 3:
        raise ValueError("fractional coordinates must have 3 components")
    return k


def bloch_matrices(crystal, ks):
    """Mass-symmetrised -D_chi for a stack of fractional points `ks` (..., 3).

    Returns complex Hermitian matrices of shape (..., 3n, 3n).
    """
    ks = _as_fractional(ks)
    batch = ks.shape[:-1]
    ks = ks.reshape(-1, 3)
    n = crystal.n
    chis = ks @ crystal.basis.dual_matrix
    phases = np.exp(2j * np.pi * chis @ crystal.bond_vectors.T)      # (K, E)
    inv_sqrt_m = 1.0 / np.sqrt(crystal.masses)

    H = np.zeros((ks.shape[0], n, 3, n, 3), dtype=complex)
    for e, (o, t) in enumerate(zip(crystal.origins, crystal.termini)):
        A = crystal.force_matrices[e]
        H[:, o, :, o, :] += A / crystal.masses[o]
        H[:, o, :, t, :] -= (phases[:, e, None, None] * A) * (inv_sqrt_m[o] * inv_sqrt_m[t])
    H = H.reshape(ks.shape[0], 3 * n, 3 * n)
    H = 0.5 * (H + np.conj(np.swapaxes(H, -1, -2)))
    return H.reshape(batch + (3 * n, 3 * n))


def assemble_bloch(crystal, chi):
    """Bloch matrix at one character (a Character or fractional 3-vector)."""
    if not isinstance(chi, Character):
        chi = Character(tuple(float(x) for x in chi))
    return BlochMatrix(chi, bloch_matrices(crystal, np.array(chi.fractional)))


def _clamp(w):
    scale = np.max(np.abs(w), axis=-1, keepdims=True)
    return np.where((w < 0) & (w >= -1e-10 * np.maximum(scale, 1e-300)), 0.0, w)


def dispersion_many(crystal, ks, method=None):
    """Ascending eigenvalues of -D_chi for a stack of fractional points."""
    w = numerics.eigvalsh_hermitian(bloch_matrices(crystal, ks), method)
    return _clamp(w)


def dispersion(crystal, chi, method=None):
    """Ascending eigenvalues of -D_chi; tiny negatives are clamped to 0."""
    if isinstance(chi, Character):
        chi = chi.fractional
    return dispersion_many(crystal, np.asarray(chi, float), method)


def gamma_grid(N):
    """Gamma-centred fractional grid {j/N}^3, shape (N^3, 3)."""
    if N < 1:
        raise ValueError("grid size must be >= 1")
    j = np.arange(N) / N
    return np.stack(np.meshgrid(j, j, j, indexing="ij"), axis=-1).reshape(-1, 3)


def grid_dispersion(crystal, N, method=None, chunk=8192):
    """Eigenvalues over the Gamma-centred N^3 grid, shape (N^3, 3n)."""
    ks = gamma_grid(N)
    out = [dispersion_many(crystal, ks[i:i + chunk], method)
           for i in range(0, len(ks), chunk)]
    return np.concatenate(out, axis=0)


def band_path(crystal, waypoints, steps, method=None):
    """Dispersion along straight segments joining fractional `waypoints`.

    Each segment is cut into `steps` pieces; shared endpoints are emitted
    once, so the table has ``(len(waypoints) - 1) * steps + 1`` rows.
    """
    pts = np.asarray(waypoints, dtype=float)
    if pts.ndim != 2 or len(pts) < 2 or pts.shape[1] != 3:
        raise ValueError("band path needs at least two 3-component waypoints")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rows, seg, ts = [], [], []
    for s in range(len(pts) - 1):
        first = 0 if s == 0 else 1
        for i in range(first, steps + 1):
            t = i / steps
            rows.append(pts[s] + t * (pts[s + 1] - pts[s]))
            seg.append(s)
            ts.append(t)
    path = np.array(rows)
    return DispersionTable(path, np.array(seg), np.array(ts),
                           dispersion_many(crystal, path, method))


def supercell_operator(crystal, N, cap=SUPERCELL_DIMENSION_CAP):
    """Mass-symmetrised -D on displacements periodic under N*L.

    Sites are ordered (cell, vertex, component) with cells enumerated
    lexicographically over {0..N-1}^3.  Returns a real symmetric matrix of
    dimension 3 n N^3.
    """
    if N < 1:
        raise ValueError("supercell size must be >= 1")
    n = crystal.n
    ncell = N ** 3
    dim = 3 * n * ncell
    if dim > cap:
        raise SupercellTooLarge(f"supercell dimension {dim} exceeds cap {cap}")
    cells = np.stack(np.meshgrid(*(np.arange(N),) * 3, indexing="ij"), -1).reshape(-1, 3)
    flat = lambda c: (c[..., 0] % N) * N * N + (c[..., 1] % N) * N + (c[..., 2] % N)
    inv_sqrt_m = 1.0 / np.sqrt(crystal.masses)

    H = np.zeros((ncell, n, 3, ncell, n, 3))
    src = flat(cells)
    for e, (o, t) in enumerate(zip(crystal.origins, crystal.termini)):
        A = crystal.force_matrices[e]
        dst = flat(cells + crystal.shifts[e])
        H[src, o, :, src, o, :] += A / crystal.masses[o]
        # np.add.at: several edges of one cell may land on the same block
        np.add.at(H, (src, o, slice(None), dst, t, slice(None)),
                  -A * (inv_sqrt_m[o] * inv_sqrt_m[t]))
    H = H.reshape(dim, dim)
    return 0.5 * (H + H.T)


def supercell_spectrum(crystal, N, method=None, cap=SUPERCELL_DIMENSION_CAP):
    """Ascending eigenvalues of the N-supercell operator."""
    return _clamp(numerics.eigvalsh_symmetric(supercell_operator(crystal, N, cap), method))


def zero_multiplicity(values, rtol=1e-9):
    values = np.asarray(values)
    scale = max(np.abs(values).max(), 1e-300)
    return int(np.sum(np.abs(values) <= rtol * scale))


def connectivity_certificate(crystal, N=3, method=None):
    """True when the N-supercell kernel is exactly the three rigid translations.

    Counts zeros in the grid union, which equals the supercell spectrum as a
    multiset, so no dimension cap applies.
    """
    return zero_multiplicity(grid_dispersion(crystal, N, method)) == 3


def multiset_discrepancy(a, b):
    """Max gap between two sorted eigenvalue multisets, relative to their scale."""
    a = np.sort(np.ravel(a))
    b = np.sort(np.ravel(b))
    if a.shape != b.shape:
        return np.inf
    scale = max(np.abs(a).max(), np.abs(b).max(), 1e-300)
    return float(np.abs(a - b).max() / scale)
