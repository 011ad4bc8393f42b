"""Dense eigensolvers and quadrature kernels.

Everything here works on plain numpy arrays.  The eigensolver is a cyclic
Jacobi method in round-robin (parallel) ordering so that every sweep is a
short sequence of vectorised rotations; it accepts stacks of matrices of
shape ``(..., d, d)``.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss


#: Backend used when a caller does not name one.  ``"jacobi"`` is the
#: self-contained solver below; ``"lapack"`` is numpy's LAPACK binding, which
#: is much faster on the large stacks produced by Brillouin-zone sampling.
DEFAULT_METHOD = "lapack"


class ConvergenceError(RuntimeError):
    """Raised when an iterative kernel hits its iteration cap."""


class PairingError(RuntimeError):
    """Raised when the real embedding of a Hermitian matrix loses its pairs."""


# ---------------------------------------------------------------------------
# eigensolvers
# ---------------------------------------------------------------------------

def _round_robin(d):
    """Disjoint index pairs for each round of a cyclic sweep.

    Uses the circle method; odd dimensions get a phantom index that is
    dropped from every round.
    """
    m = d + (d % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < d and b < d:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _offdiag_norm(a):
    off = a * (1.0 - np.eye(a.shape[-1]))
    return np.sqrt(np.sum(off * off, axis=(-2, -1)))


def jacobi_eigh(a, tol=1e-14, max_sweeps=60):
    """Eigen-decomposition of real symmetric matrices by cyclic Jacobi.

    Parameters
    ----------
    a : array_like, shape (..., d, d)
        Symmetric input; only the symmetric part is used.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm drops below
        ``max(tol, d * eps)`` times the Frobenius norm of the input.
    max_sweeps : int
        Iteration cap.

    Returns
    -------
    w : ndarray, shape (..., d)
        Ascending eigenvalues.
    v : ndarray, shape (..., d, d)
        Orthonormal eigenvectors in the columns.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or a.shape[-1] < 1:
        raise ValueError("expected square matrices with dimension >= 1")
    batch = a.shape[:-2]
    d = a.shape[-1]
    A = a.reshape((-1, d, d))
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    V = np.broadcast_to(np.eye(d), A.shape).copy()

    scale = np.sqrt(np.sum(A * A, axis=(-2, -1)))
    floor = max(tol, d * np.finfo(float).eps)
    target = floor * np.where(scale > 0, scale, 1.0)
    rounds = _round_robin(d) if d > 1 else []

    for _ in range(max_sweeps):
        if np.all(_offdiag_norm(A) <= target):
            break
        for p, q in rounds:
            apq = A[:, p, q]
            app = A[:, p, p]
            aqq = A[:, q, q]
            active = np.abs(apq) > 1e-300
            safe = np.where(active, apq, 1.0)
            theta = (aqq - app) / (2.0 * safe)
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            cc, ss = c[:, None, :], s[:, None, :]
            Ap, Aq = A[:, :, p], A[:, :, q]
            A[:, :, p] = cc * Ap - ss * Aq
            A[:, :, q] = ss * Ap + cc * Aq
            cr, sr = c[:, :, None], s[:, :, None]
            Ap, Aq = A[:, p, :], A[:, q, :]
            A[:, p, :] = cr * Ap - sr * Aq
            A[:, q, :] = sr * Ap + cr * Aq
            Vp, Vq = V[:, :, p], V[:, :, q]
            V[:, :, p] = cc * Vp - ss * Vq
            V[:, :, q] = ss * Vp + cc * Vq
    else:
        if not np.all(_offdiag_norm(A) <= target):
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diagonal(A, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    V = np.take_along_axis(V, order[:, None, :], axis=-1)
    return w.reshape(batch + (d,)), V.reshape(batch + (d, d))


def eigh_symmetric(m, method=None):
    """Ascending eigenvalues and orthonormal eigenvectors of symmetric `m`.

    `method` is ``"jacobi"`` or ``"lapack"``; None picks `DEFAULT_METHOD`.
    """
    m = np.asarray(m, dtype=float)
    method = method or DEFAULT_METHOD
    if method == "jacobi":
        return jacobi_eigh(m)
    if method == "lapack":
        return np.linalg.eigh(0.5 * (m + np.swapaxes(m, -1, -2)))
    raise ValueError(f"unknown eigensolver method {method!r}")


def eigvalsh_symmetric(m, method=None):
    if (method or DEFAULT_METHOD) == "lapack":
        m = np.asarray(m, dtype=float)
        return np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, -1, -2)))
    return eigh_symmetric(m, method)[0]


def real_embedding(h):
    """Map ``X + iY`` to the real symmetric block matrix ``[[X, -Y], [Y, X]]``."""
    h = np.asarray(h, dtype=complex)
    X, Y = h.real, h.imag
    top = np.concatenate([X, -Y], axis=-1)
    bottom = np.concatenate([Y, X], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _embedded_pairs(h, method, want_vectors=True):
    h = np.asarray(h, dtype=complex)
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    d = h.shape[-1]
    if want_vectors:
        w2, v2 = eigh_symmetric(real_embedding(h), method)
    else:
        w2, v2 = eigvalsh_symmetric(real_embedding(h), method), None
    lo, hi = w2[..., 0::2], w2[..., 1::2]
    norm = np.max(np.abs(h), axis=(-2, -1)) * d
    if np.any(np.abs(hi - lo) > 1e-9 * np.maximum(norm, 1e-300)[..., None]):
        raise PairingError("embedded eigenvalues do not pair up")
    return h, 0.5 * (lo + hi), v2


def eigvalsh_hermitian(h, method=None):
    """Ascending eigenvalues of Hermitian matrices via the real embedding."""
    return _embedded_pairs(h, method, want_vectors=False)[1]


def eigh_hermitian(h, method=None):
    """Eigenvalues and eigenvectors of a single Hermitian matrix.

    The eigenvalues come from the real embedding, whose spectrum is that of
    `h` with every eigenvalue doubled.  For each cluster of equal eigenvalues
    the complexified embedded eigenvectors ``u + i w`` span the eigenspace of
    `h`; an orthonormal basis of that span is read off an SVD.
    """
    h, w, v2 = _embedded_pairs(h, method)
    if h.ndim != 2:
        raise ValueError("eigh_hermitian takes a single matrix; "
                         "use eigvalsh_hermitian for stacks")
    d = h.shape[-1]
    z = v2[:d, :] + 1j * v2[d:, :]
    scale = max(np.max(np.abs(w)), 1.0)
    vecs = np.zeros((d, d), dtype=complex)
    start = 0
    while start < d:
        stop = start + 1
        while stop < d and abs(w[stop] - w[start]) <= 1e-8 * scale:
            stop += 1
        # 2k embedded vectors span the k-dimensional complex eigenspace
        u, _, _ = np.linalg.svd(z[:, 2 * start:2 * stop], full_matrices=False)
        vecs[:, start:stop] = u[:, :stop - start]
        start = stop
    return w, vecs


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        return float(np.dot(self.weights, values))


def sphere_rule(order):
    """Gauss-Legendre in cos(theta) times a uniform azimuthal grid on S^2.

    `order` nodes in cos(theta) and ``2 * order`` azimuths; the rule is exact
    for spherical polynomials of degree up to ``2 * order - 1``.  Nodes are
    unit vectors of shape ``(2 * order**2, 3)``; weights sum to 4 pi.
    """
    if order < 2:
        raise ValueError("sphere rule order must be >= 2")
    z, wz = leggauss(order)
    nphi = 2 * order
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    zz, pp = np.meshgrid(z, phi, indexing="ij")
    rho = np.sqrt(1.0 - zz * zz)
    nodes = np.stack([rho * np.cos(pp), rho * np.sin(pp), zz], axis=-1)
    weights = np.repeat(wz, nphi) * (2.0 * np.pi / nphi)
    return QuadratureRule(nodes.reshape(-1, 3), weights)


def gauss_legendre(f, a, b, panels=1, nodes=20):
    """Composite Gauss-Legendre quadrature of vectorised `f` on [a, b]."""
    x, w = leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = mid[:, None] + half[:, None] * x[None, :]
    return float(np.sum(half[:, None] * w[None, :] * f(pts)))


def integrate_interval(f, a, b, rtol=1e-12, nodes=20, max_panels=1 << 14):
    """Integrate a smooth `f` on [a, b], doubling panels until converged."""
    panels = 1
    prev = gauss_legendre(f, a, b, panels, nodes)
    while panels < max_panels:
        panels *= 2
        cur = gauss_legendre(f, a, b, panels, nodes)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise ConvergenceError("interval quadrature did not converge")


def _halfline_dyadic(f, levels, nodes):
    # x = -log(u); panels [2^-(j+1), 2^-j] in u, i.e. [j log 2, (j+1) log 2]
    # in x; the Jacobian 1/u cancels against du, so integrate f(x) dx per panel
    x, w = leggauss(nodes)
    ln2 = np.log(2.0)
    lo = np.arange(levels) * ln2
    pts = lo[:, None] + 0.5 * ln2 * (x[None, :] + 1.0)
    return float(np.sum(0.5 * ln2 * w[None, :] * f(pts)))


def integrate_halfline(f, rtol=1e-12, nodes=16):
    """Integrate a decaying `f` over (0, inf).

    Under ``x = -log u`` the half-line becomes (0, 1]; dyadic panels
    ``[2^-(j+1), 2^-j]`` in `u` are panels of width log 2 in `x`, and each
    one gets a Gauss-Legendre rule.  The number of panels doubles until two
    successive estimates agree to `rtol`.
    """
    levels = 16
    prev = _halfline_dyadic(f, levels, nodes)
    while levels < 1 << 12:
        levels *= 2
        cur = _halfline_dyadic(f, levels, nodes)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise ConvergenceError("half-line quadrature did not converge")


def bose_plain(x, p):
    """``x**p / (exp(x) - 1)``, written to avoid overflow."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        # r = x / (1 - e^{-x}) stays finite as x -> 0
        r = x / -np.expm1(-x)
        out = r * x ** (p - 1) * np.exp(-x)
    return np.where(x > 0, out, 0.0 if p > 1 else 1.0)


def bose_squared(x, p):
    """``x**p exp(x) / (exp(x) - 1)**2``, written to avoid overflow."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        r = x / -np.expm1(-x)
        out = r * r * x ** (p - 2) * np.exp(-x)
    return np.where(x > 0, out, 0.0 if p > 2 else 1.0)


def bose_integral(p, kind="plain", nodes=16):
    """Integral over (0, inf) of ``x^p/(e^x-1)`` or ``x^p e^x/(e^x-1)^2``.

    >>> round(bose_integral(3), 7)
    6.4939394
    """
    if p not in (3, 4):
        raise ValueError(f"unsupported exponent p={p}; expected 3 or 4")
    if kind == "plain":
        return integrate_halfline(lambda x: bose_plain(x, p), nodes=nodes)
    if kind == "squared":
        return integrate_halfline(lambda x: bose_squared(x, p), nodes=nodes)
    raise ValueError(f"unknown kind {kind!r}")
