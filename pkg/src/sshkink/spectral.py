"""Eigendecomposition, negative spectral projector, gap and analytic zero modes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import AmbiguousKernel, ConvergenceFailure, GapClosed, InvalidParams, NotNormalizable
from .lattice import Configuration, DimerizedParams, HoppingOperator, Window

ZERO_TOL_REL = 1e-8


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_dimension: int

    @property
    def op_norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def default_zero_tol(self) -> float:
        return ZERO_TOL_REL * max(self.op_norm, 1.0)

    def occupied(self, zero_tol: Optional[float] = None) -> np.ndarray:
        """Boolean mask of strictly negative eigenvalues (below -zero_tol)."""
        tol = self.default_zero_tol() if zero_tol is None else zero_tol
        return self.eigenvalues < -tol


@dataclass(frozen=True)
class ProjectorMatrix:
    matrix: np.ndarray
    zero_tol: float

    def adjacent(self, config: Configuration) -> np.ndarray:
        """Entries Gamma_{n,n+1} along the bonds of ``config``."""
        i, j = config.bond_sites
        return self.matrix[i, j]


@dataclass(frozen=True)
class GapInfo:
    g: float
    zero_mode_present: bool


@dataclass(frozen=True)
class ZeroMode:
    vector: np.ndarray
    rate: float
    site_index: np.ndarray


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # first entry of largest magnitude is made positive
    idx = np.argmax(np.abs(V) > np.abs(V).max(axis=0) * (1 - 1e-12), axis=0)
    s = np.sign(V[idx, np.arange(V.shape[1])])
    s[s == 0] = 1.0
    return V * s


def eigendecompose(op: HoppingOperator) -> SpectralData:
    try:
        if op.corner is None and op.dimension > 1:
            w, V = scipy.linalg.eigh_tridiagonal(np.zeros(op.dimension), op.diag_off)
        else:
            w, V = np.linalg.eigh(op.to_dense())
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ConvergenceFailure(str(exc)) from exc
    if not np.all(np.isfinite(w)):
        raise ConvergenceFailure("non-finite eigenvalues")
    return SpectralData(w, _fix_signs(V), op.dimension)


def negative_projector(spec: SpectralData, zero_tol: Optional[float] = None,
                       include_kernel: bool = False) -> ProjectorMatrix:
    """Gamma = 1(T < 0); eigenvalues within ``zero_tol`` of 0 are left out.

    With ``include_kernel`` the kernel is added back, giving 1(T <= 0).
    """
    tol = spec.default_zero_tol() if zero_tol is None else float(zero_tol)
    if tol < 0:
        raise InvalidParams("zero_tol must be >= 0")
    a = np.abs(spec.eigenvalues)
    near = (a > tol) & (a < 10 * tol)
    if np.any(near):
        raise AmbiguousKernel(
            f"eigenvalue(s) {spec.eigenvalues[near]} within (tol, 10*tol), tol={tol:g}")
    mask = spec.eigenvalues < -tol
    if include_kernel:
        mask |= a <= tol
    V = spec.eigenvectors[:, mask]
    return ProjectorMatrix(V @ V.T, tol)


def trace_negative_part(spec: SpectralData) -> float:
    """Tr(T_-) = -sum of the negative eigenvalues."""
    w = spec.eigenvalues
    return float(-np.sum(w[w < 0]))


def negative_part(spec: SpectralData) -> np.ndarray:
    """T_- = -T 1(T < 0) as a dense matrix."""
    w, V = spec.eigenvalues, spec.eigenvectors
    m = w < 0
    return (V[:, m] * -w[m]) @ V[:, m].T


def spectral_gap(spec: SpectralData, zero_tol: Optional[float] = None) -> GapInfo:
    """Distance from 0 to the spectrum with the (simple) kernel removed.

    Raises GapClosed when that distance is below 10*zero_tol, or when the
    kernel is degenerate: a multiple zero eigenvalue in a finite chiral chain
    signals Fermi points, i.e. a metal, rather than an isolated zero mode.
    """
    tol = spec.default_zero_tol() if zero_tol is None else float(zero_tol)
    a = np.abs(spec.eigenvalues)
    zero = a <= tol
    rest = a[~zero]
    if rest.size == 0:
        raise GapClosed("no eigenvalue away from zero")
    g = float(rest.min())
    if g < 10 * tol:
        raise GapClosed(f"gap {g:g} below 10*zero_tol")
    if zero.sum() > 1:
        raise GapClosed(f"{zero.sum()}-fold zero eigenvalue (gapless spectrum)")
    return GapInfo(g, bool(zero.any()))


def band_edges(params: DimerizedParams) -> tuple[float, float]:
    """Inner and outer edges (2 delta, 2 W) of the infinite dimerized spectrum."""
    return 2.0 * params.delta, 2.0 * params.W


def zero_mode_analytic(config: Configuration) -> ZeroMode:
    """Zero mode of a heteroclinic window, from the two-step recursion.

    Even sites vanish; odd sites satisfy t_{2k-1} psi_{2k-1} + t_{2k} psi_{2k+1} = 0.
    The returned rate is -log(kappa), the decay per two sites on the tails.
    """
    topo = config.topology
    if not isinstance(topo, Window) or topo.left_tail is None or topo.right_tail is None:
        raise InvalidParams("zero mode needs a window with both tails")
    left, right = topo.left_tail, topo.right_tail
    # growth ratios per two sites, taken on the tails
    r_right = right.amplitude(1) / right.amplitude(0)
    r_left = left.amplitude(0) / left.amplitude(1)
    if r_right >= 1 or r_left >= 1:
        raise NotNormalizable(
            f"tail ratios right={r_right:.4g}, left={r_left:.4g}; need both < 1")

    sites = config.site_index
    t = dict(zip(config.bond_index.tolist(), config.values.tolist()))
    psi = np.zeros(sites.size)
    odd = np.flatnonzero(sites % 2 != 0)
    if odd.size == 0:
        raise NotNormalizable("window has no odd site")
    # start at the odd site closest to the origin, then walk both ways
    k0 = odd[np.argmin(np.abs(sites[odd] - 1))]
    psi[k0] = 1.0
    for k in range(k0 + 2, sites.size, 2):
        n = sites[k]          # psi_n from psi_{n-2}, using the even site n-1
        psi[k] = -t[n - 2] / t[n - 1] * psi[k - 2]
    for k in range(k0 - 2, -1, -2):
        n = sites[k]          # psi_n from psi_{n+2}
        psi[k] = -t[n + 1] / t[n] * psi[k + 2]
    psi /= np.linalg.norm(psi)
    kappa = max(r_right, r_left)
    return ZeroMode(psi, float(-np.log(kappa)), sites)
