"""Cauchy-contour representations of the projector and the negative part.

The rectangle runs (S + i) -> (S - i) -> (-g/2 - i) -> (-g/2 + i) -> (S + i)
and encloses exactly the part of the spectrum below -g/2.  Each edge carries
Gauss-Legendre nodes, which converge geometrically for the resolvent; a
trapezoidal rule is only second order across the corners.

Resolvents are obtained from a tridiagonal LU factorization with partial
pivoting (the LAPACK ``gttrf`` scheme), vectorized over a batch of shifts z.
A ring corner is folded in with a rank-2 Woodbury correction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, GapClosed, NearSingular, QuadratureNotConverged
from .lattice import HoppingOperator
from .spectral import ProjectorMatrix, SpectralData

PIVOT_TOL = 1e-13
IMAG_TOL = 1e-9


@dataclass(frozen=True)
class Contour:
    sigma: float
    right: float
    half_height: float
    nodes_per_edge: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def corners(self) -> list[complex]:
        h = self.half_height
        return [complex(self.sigma, h), complex(self.sigma, -h),
                complex(self.right, -h), complex(self.right, h)]

    def integrate(self, values) -> complex:
        """Sum_j w_j f(z_j) for samples f(z_j) along the first axis."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=(0, 0))


def build_contour(lambda_min: float, g: float, nodes_per_edge: int = 64,
                  half_height: float = 1.0) -> Contour:
    if not g > 0:
        raise GapClosed(f"contour needs a positive gap, got g={g}")
    if nodes_per_edge < 16:
        raise ValueError("nodes_per_edge must be >= 16")
    sigma = float(lambda_min) - 1.0
    right = -g / 2.0
    x, w = np.polynomial.legendre.leggauss(nodes_per_edge)
    h = half_height
    corners = [complex(sigma, h), complex(sigma, -h), complex(right, -h),
               complex(right, h), complex(sigma, h)]
    nodes, weights = [], []
    for a, b in zip(corners[:-1], corners[1:]):
        nodes.append((a + b) / 2 + (b - a) / 2 * x)
        weights.append((b - a) / 2 * w)
    return Contour(sigma, right, h, nodes_per_edge,
                   np.concatenate(nodes), np.concatenate(weights))


def contour_for(spec: SpectralData, nodes_per_edge: int = 64,
                zero_tol: Optional[float] = None) -> Contour:
    """Contour around the strictly negative spectrum of ``spec``."""
    tol = spec.default_zero_tol() if zero_tol is None else zero_tol
    a = np.abs(spec.eigenvalues)
    rest = a[a > tol]
    if rest.size == 0:
        raise GapClosed("no spectrum away from zero")
    return build_contour(float(spec.eigenvalues.min()), float(rest.min()), nodes_per_edge)


def eta_guard(g: float, tau: float, delta: float) -> float:
    """Admissible perturbation size min(g/8, tau/2, delta/2)."""
    return min(g / 8.0, tau / 2.0, delta / 2.0)


def tridiagonal_solve(lower, diag, upper, rhs, scale: float = 1.0):
    """Solve batched tridiagonal systems A x = rhs with partial pivoting.

    ``diag`` has shape (B, n), ``lower``/``upper`` (B, n-1), ``rhs`` (B, n, m).
    ``scale`` sets the pivot threshold PIVOT_TOL * scale for NearSingular.
    """
    d = np.array(diag, dtype=complex)
    dl = np.array(lower, dtype=complex)
    du = np.array(upper, dtype=complex)
    b = np.array(rhs, dtype=complex)
    B, n = d.shape
    du2 = np.zeros((B, max(n - 2, 0)), dtype=complex)
    thresh = PIVOT_TOL * max(scale, 1e-300)
    for i in range(n - 1):
        swap = np.abs(d[:, i]) < np.abs(dl[:, i])
        piv = np.where(swap, dl[:, i], d[:, i])
        if np.any(np.abs(piv) < thresh):
            raise NearSingular(f"pivot below {thresh:g} at row {i}")
        other = np.where(swap, d[:, i], dl[:, i])
        l = other / piv
        # row i after the (optional) swap
        new_di = piv
        new_dui = np.where(swap, d[:, i + 1], du[:, i])
        new_du2 = np.where(swap, du[:, i + 1], 0.0) if i < n - 2 else None
        # row i+1 after elimination
        row1_d = np.where(swap, du[:, i], d[:, i + 1]) - l * new_dui
        if i < n - 2:
            row1_du = np.where(swap, 0.0, du[:, i + 1]) - l * new_du2
            du[:, i + 1] = row1_du
            du2[:, i] = new_du2
        d[:, i] = new_di
        du[:, i] = new_dui
        d[:, i + 1] = row1_d
        bi, bi1 = b[:, i].copy(), b[:, i + 1].copy()
        top = np.where(swap[:, None], bi1, bi)
        bot = np.where(swap[:, None], bi, bi1)
        b[:, i] = top
        b[:, i + 1] = bot - l[:, None] * top
    if np.any(np.abs(d[:, n - 1]) < thresh):
        raise NearSingular(f"pivot below {thresh:g} at row {n - 1}")
    x = np.empty_like(b)
    x[:, n - 1] = b[:, n - 1] / d[:, n - 1, None]
    if n >= 2:
        x[:, n - 2] = (b[:, n - 2] - du[:, n - 2, None] * x[:, n - 1]) / d[:, n - 2, None]
    for i in range(n - 3, -1, -1):
        x[:, i] = (b[:, i] - du[:, i, None] * x[:, i + 1]
                   - du2[:, i, None] * x[:, i + 2]) / d[:, i, None]
    return x


def shifted_solve(zs, lower, upper, rhs, corner_lo=None, corner_hi=None,
                  scale: float = 1.0):
    """Solve (z I - A) x = rhs for every z, A tridiagonal with zero diagonal.

    ``lower[k] = A[k+1, k]`` and ``upper[k] = A[k, k+1]``; optional corners are
    ``A[n-1, 0]`` (corner_lo) and ``A[0, n-1]`` (corner_hi).  ``rhs`` is (n,)
    or (n, m); the result has shape (len(zs),) + rhs.shape.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    lower = np.asarray(lower)
    upper = np.asarray(upper)
    rhs = np.asarray(rhs)
    vec = rhs.ndim == 1
    R = rhs[:, None] if vec else rhs
    n = lower.size + 1
    if R.shape[0] != n:
        raise DimensionMismatch(f"rhs length {R.shape[0]} != dimension {n}")
    B = zs.size
    diag = np.repeat(zs[:, None], n, axis=1)
    lo = np.broadcast_to(-lower, (B, n - 1))
    up = np.broadcast_to(-upper, (B, n - 1))
    if corner_lo is None and corner_hi is None:
        x = tridiagonal_solve(lo, diag, up, np.broadcast_to(R, (B,) + R.shape), scale)
    else:
        # zI - A = M + U C U^T with U = [e_0, e_{n-1}], C = [[0, -hi], [-lo, 0]]
        m = R.shape[1]
        ext = np.zeros((n, m + 2), dtype=complex)
        ext[:, :m] = R
        ext[0, m] = 1.0
        ext[n - 1, m + 1] = 1.0
        y = tridiagonal_solve(lo, diag, up, np.broadcast_to(ext, (B, n, m + 2)), scale)
        Minv_b, Minv_U = y[:, :, :m], y[:, :, m:]
        C = np.array([[0.0, -(corner_hi or 0.0)], [-(corner_lo or 0.0), 0.0]])
        cap = np.linalg.inv(C)[None] + Minv_U[:, [0, n - 1], :]
        if np.any(np.abs(np.linalg.det(cap)) < PIVOT_TOL * max(scale, 1.0) ** 2):
            raise NearSingular("Woodbury capacitance matrix is singular")
        corr = np.linalg.solve(cap, Minv_b[:, [0, n - 1], :])
        x = Minv_b - Minv_U @ corr
    return x[..., 0] if vec else x


def resolvent_solve(op: HoppingOperator, z, rhs) -> np.ndarray:
    """x with (z I - T) x = rhs, in O(L) per right-hand side."""
    rhs = np.asarray(rhs)
    if rhs.shape[0] != op.dimension:
        raise DimensionMismatch(f"rhs length {rhs.shape[0]} != dimension {op.dimension}")
    return shifted_solve([z], op.diag_off, op.diag_off, rhs, op.corner, op.corner,
                         scale=op.norm_bound())[0]


def resolvents(op: HoppingOperator, zs) -> np.ndarray:
    """Dense (z I - T)^{-1} for every node z, shape (len(zs), D, D)."""
    eye = np.eye(op.dimension)
    return shifted_solve(zs, op.diag_off, op.diag_off, eye, op.corner, op.corner,
                         scale=op.norm_bound())


def _real_part(M: np.ndarray, what: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(M.real))))
    im = float(np.max(np.abs(M.imag)))
    if im > IMAG_TOL * scale:
        raise QuadratureNotConverged(f"{what}: imaginary residue {im:g}")
    return M.real


def resolvent_integral(op: HoppingOperator, c: Contour, moment: int = 0,
                       chunk: int = 64) -> np.ndarray:
    """(1/2 pi i) ∮ z**moment (z - T)^{-1} dz, accumulated over node chunks."""
    eye = np.eye(op.dimension)
    acc = np.zeros((op.dimension, op.dimension), dtype=complex)
    for k in range(0, c.nodes.size, chunk):
        z = c.nodes[k:k + chunk]
        R = shifted_solve(z, op.diag_off, op.diag_off, eye, op.corner, op.corner,
                          scale=op.norm_bound())
        acc += np.tensordot(c.weights[k:k + chunk] * z ** moment, R, axes=(0, 0))
    return acc / (2j * np.pi)


def _projector_raw(op: HoppingOperator, c: Contour) -> np.ndarray:
    return resolvent_integral(op, c, 0)


def projector_via_contour(op: HoppingOperator, c: Contour,
                          tol: Optional[float] = None) -> ProjectorMatrix:
    """(1/2 pi i) ∮ (z - T)^{-1} dz, optionally checked against doubled nodes."""
    G = _real_part(_projector_raw(op, c), "projector")
    if tol is not None:
        fine = build_contour(c.sigma + 1.0, -2 * c.right, 2 * c.nodes_per_edge, c.half_height)
        G2 = _real_part(_projector_raw(op, fine), "projector")
        diff = float(np.linalg.norm(G2 - G))
        if diff > tol:
            raise QuadratureNotConverged(f"node doubling changed projector by {diff:g}")
    return ProjectorMatrix(G, 0.0)


def negative_part_via_contour(op: HoppingOperator, c: Contour) -> np.ndarray:
    """T_- = -(1/2 pi i) ∮ z (z - T)^{-1} dz."""
    return _real_part(-resolvent_integral(op, c, 1), "negative part")
