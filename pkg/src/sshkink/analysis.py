"""Decay fits, weighted operators, Schatten norms and Hessian/identity checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .contour import Contour, build_contour, contour_for, shifted_solve
from .energy import hessian_apply, perturbation_matrix
from .errors import InsufficientTail, InvalidParams, NonDecaying, SupportTooWide
from .lattice import Closed, Configuration, DimerizedParams, build_operator, dimerized_configuration
from .solvers import solve_periodic_dimerized
from .spectral import eigendecompose

NOISE_FLOOR = 1e-14


# ---------------------------------------------------------------- decay

@dataclass(frozen=True)
class DecayFit:
    alpha: float
    C: float
    r_squared: float
    tail_range: tuple[int, int]
    n_points: int


def deviation(t: Configuration, tail: DimerizedParams, sign: int = +1) -> np.ndarray:
    """u_n = t_n - (W + sign (-1)^n delta), with n the global bond index."""
    return t.values - tail.amplitude(t.bond_index, sign)


def fit_decay(u, tail: tuple[int, int], index=None) -> DecayFit:
    """Least-squares line through (n, log|u_n|) for n in the closed range ``tail``.

    ``index`` gives the n of each entry (default 0, 1, ...).  Entries below
    the noise floor are dropped.  ``alpha`` is minus the slope.
    """
    u = np.asarray(u, dtype=float)
    n = np.arange(u.size) if index is None else np.asarray(index)
    a, b = tail
    keep = (n >= min(a, b)) & (n <= max(a, b)) & (np.abs(u) > NOISE_FLOOR)
    if keep.sum() < 10:
        raise InsufficientTail(f"only {keep.sum()} entries above {NOISE_FLOOR:g} in {tail}")
    x, y = n[keep].astype(float), np.log(np.abs(u[keep]))
    slope, icpt = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (slope * x + icpt)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    alpha = -float(slope)
    if not alpha > 0:
        raise NonDecaying(f"fitted alpha = {alpha:g}")
    return DecayFit(alpha, float(np.exp(icpt)), min(max(r2, 0.0), 1.0), (a, b), int(keep.sum()))


# ---------------------------------------------------------------- weights

@dataclass(frozen=True)
class WeightSequence:
    """theta(n) = min(e^{alpha n}, e^{alpha s})."""

    alpha: float
    s: int

    def __post_init__(self):
        if not self.alpha >= 0:
            raise InvalidParams(f"alpha must be >= 0, got {self.alpha}")

    def __call__(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return np.exp(self.alpha * np.minimum(n, self.s))

    def matrix(self, sites) -> np.ndarray:
        return np.diag(self(sites))


def tilted_operator(t: Configuration, alpha: float, s: int) -> np.ndarray:
    """Dense T~ with T~_{n,n+1} = theta(n)/theta(n+1) t_n and T~_{n+1,n} = theta(n+1)/theta(n) t_n."""
    if t.closed:
        raise InvalidParams("the tilted operator is defined on open windows")
    w = WeightSequence(alpha, s)
    n = t.bond_index
    ratio = w(n) / w(n + 1)
    D = t.n_sites
    k = np.arange(D - 1)
    Tt = np.zeros((D, D))
    Tt[k, k + 1] = ratio * t.values
    Tt[k + 1, k] = t.values / ratio
    return Tt


def commutation_residual(t: Configuration, alpha: float, s: int) -> float:
    """max |Theta T - T~ Theta| entrywise."""
    Th = WeightSequence(alpha, s).matrix(t.site_index)
    T = build_operator(t).to_dense()
    return float(np.max(np.abs(Th @ T - tilted_operator(t, alpha, s) @ Th)))


def tilt_norm_check(t: Configuration, params: DimerizedParams, alpha: float,
                    s: int) -> tuple[float, float]:
    """(|T - T~|_op, 2 (W + delta)(e^alpha - 1))."""
    T = build_operator(t).to_dense()
    lhs = float(np.linalg.norm(T - tilted_operator(t, alpha, s), 2))
    return lhs, 2.0 * (params.W + params.delta) * np.expm1(alpha)


def _tilted_resolvents(Tt: np.ndarray, zs, rhs, transpose: bool = False) -> np.ndarray:
    lower = np.diag(Tt, -1)
    upper = np.diag(Tt, 1)
    if transpose:
        lower, upper = upper, lower
    return shifted_solve(zs, lower, upper, rhs, scale=2 * np.max(np.abs(Tt)))


@dataclass(frozen=True)
class ResolventCheck:
    commutation_error: float
    norm_ratio: float


def resolvent_commutation_check(t: Configuration, alpha: float, s: int,
                                contour: Optional[Contour] = None) -> ResolventCheck:
    """Theta (z - T)^{-1} against (z - T~)^{-1} Theta at every contour node.

    ``norm_ratio`` is max_z |(z - T~)^{-1}|_op dist(z, spec T), i.e. the
    tilted resolvent norm relative to the untilted one.
    """
    spec = eigendecompose(build_operator(t))
    c = contour if contour is not None else contour_for(spec, 32)
    w = WeightSequence(alpha, s)
    th = w(t.site_index)
    D = t.n_sites
    op = build_operator(t)
    R = shifted_solve(c.nodes, op.diag_off, op.diag_off, np.eye(D), scale=op.norm_bound())
    Rt = _tilted_resolvents(tilted_operator(t, alpha, s), c.nodes, np.eye(D))
    lhs = th[None, :, None] * R
    rhs = Rt * th[None, None, :]
    scale = np.max(np.abs(lhs), axis=(1, 2))
    err = float(np.max(np.max(np.abs(lhs - rhs), axis=(1, 2)) / scale))
    dist = np.min(np.abs(c.nodes[:, None] - spec.eigenvalues[None, :]), axis=1)
    norms = np.linalg.norm(Rt, 2, axis=(1, 2))
    return ResolventCheck(err, float(np.max(norms * dist)))


# ---------------------------------------------------------------- Schatten

def schatten_norm(A, p) -> float:
    """(sum sigma_i^p)^(1/p); p = inf gives the operator norm."""
    sv = np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)
    if np.isinf(p):
        return float(sv.max(initial=0.0))
    if p < 1:
        raise InvalidParams("Schatten norms need p >= 1")
    return float(np.sum(sv ** p) ** (1.0 / p))


def sequence_matrix(a) -> np.ndarray:
    """Symmetric tridiagonal matrix with zero diagonal and off-diagonal a."""
    a = np.asarray(a, dtype=float)
    return np.diag(a, 1) + np.diag(a, -1)


def lp_norm(a, p) -> float:
    a = np.abs(np.asarray(a, dtype=float))
    return float(a.max(initial=0.0)) if np.isinf(p) else float(np.sum(a ** p) ** (1.0 / p))


# ---------------------------------------------------------------- coercivity

@dataclass(frozen=True)
class CoercivityResult:
    L: int
    lambda_min: float
    asymmetry: float
    rayleigh_e1: float
    params: DimerizedParams


def assemble_hessian(t: Configuration, mu: float) -> np.ndarray:
    """Columns L e_m from ``hessian_apply``, one per bond."""
    spec = eigendecompose(build_operator(t))
    return np.column_stack([hessian_apply(t, e, mu, spec) for e in np.eye(t.n_bonds)])


def coercivity_scan(mu: float, sizes: Iterable[int]) -> list[CoercivityResult]:
    """Smallest eigenvalue of the Hessian operator at the dimerized minimizer of each ring."""
    out = []
    for L in sizes:
        params = solve_periodic_dimerized(int(L), mu)
        t = dimerized_configuration(params, +1, Closed(int(L)))
        M = assemble_hessian(t, mu)
        asym = float(np.max(np.abs(M - M.T)))
        lam = float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
        out.append(CoercivityResult(int(L), lam, asym, float(M[0, 0]), params))
    return out


# ---------------------------------------------------------------- closed-form identities

def q_block(t_a: float, t_b: float) -> np.ndarray:
    return np.array([[2 * t_a ** 2 + t_b ** 2, 3 * t_a * t_b],
                     [3 * t_a * t_b, t_a ** 2 + 2 * t_b ** 2]])


def _require_closed(t: Configuration):
    if not t.closed:
        raise InvalidParams("a closed ring is required")


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float

    @property
    def discrepancy(self) -> float:
        return abs(self.lhs - self.rhs)


def anticommutator_identity_check(t: Configuration, h) -> IdentityCheck:
    """|T H + H T|_F^2 against 2 sum_n <(h_n, h_{n+1}), Q_n (h_n, h_{n+1})>."""
    _require_closed(t)
    h = np.asarray(h, dtype=float)
    L = t.n_bonds
    nz = np.flatnonzero(h)
    if nz.size and (nz.min() < 2 or nz.max() > L - 3):
        raise SupportTooWide("perturbation must stay 2 sites away from the ring seam")
    T = build_operator(t).to_dense()
    H = perturbation_matrix(t, h)
    lhs = float(np.sum((T @ H + H @ T) ** 2))
    tv = t.values
    rhs = 0.0
    for n in range(L - 1):
        v = h[n:n + 2]
        rhs += 2.0 * v @ q_block(tv[n], tv[n + 1]) @ v
    return IdentityCheck(lhs, float(rhs))


def translation_average(A: np.ndarray) -> np.ndarray:
    """(1/L) sum_k tau_k A tau_k^{-1} over all L cyclic translations."""
    L = A.shape[0]
    acc = np.zeros_like(A, dtype=float)
    for k in range(L):
        acc += np.roll(A, (k, k), axis=(0, 1))
    return acc / L


@dataclass(frozen=True)
class AverageBound:
    lhs: float
    bound: float
    sharp_bound: float


def translation_average_bound_check(t: Configuration, h, S: int) -> AverageBound:
    """|<T H>|_{S_2}^2 with the bounds (6S/L) and 6(2S+1)/L times |t|_inf^2 |h|_2^2.

    ``h`` lives on the ring bonds and must vanish outside [-S, S] (mod L).
    The second bound follows from Cauchy-Schwarz over the 2S+1 support bonds
    and is attained by constant t and h.
    """
    _require_closed(t)
    h = np.asarray(h, dtype=float)
    L = t.n_bonds
    if 2 * S + 1 >= L:
        raise SupportTooWide(f"support width {2 * S + 1} must be < L = {L}")
    dist = np.minimum(np.arange(L), L - np.arange(L))
    if np.any(h[dist > S] != 0):
        raise SupportTooWide(f"perturbation not supported in [-{S}, {S}]")
    T = build_operator(t).to_dense()
    avg = translation_average(T @ perturbation_matrix(t, h))
    lhs = float(np.sum(avg ** 2))
    base = float(np.max(np.abs(t.values)) ** 2 * np.sum(h ** 2))
    return AverageBound(lhs, 6.0 * S / L * base, 6.0 * (2 * S + 1) / L * base)


def _sqrt_psd(A: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.T


def convexity_gap_check(t: Configuration) -> IdentityCheck:
    """-Tr sqrt(T^2) >= -Tr sqrt(<T^2>) + Tr(T^4 - <T^2>^2) / (8 |T|^3)."""
    _require_closed(t)
    T = build_operator(t).to_dense()
    T2 = T @ T
    A = translation_average(T2)
    norm = float(np.linalg.norm(T, 2))
    lhs = -float(np.sum(np.abs(np.linalg.eigvalsh(T))))
    rhs = -float(np.trace(_sqrt_psd(A))) + float(np.trace(T2 @ T2 - A @ A)) / (8 * norm ** 3)
    return IdentityCheck(lhs, rhs)


# ---------------------------------------------------------------- weighted quadratic term

@dataclass(frozen=True)
class QuadraticEstimate:
    q_norm: float
    weighted_l4_sq: float
    constant: float


def weighted_quadratic_estimate(t: Configuration, params: DimerizedParams, alpha: float,
                                s: int, nodes_per_edge: int = 32) -> QuadraticEstimate:
    """Empirical constant in |Q~(u, u)|_2 <= C |theta u|_4^2.

    Q~_n = -4 [(1/2 pi i) ∮ (z - T~)^{-1} Theta U (z - T)^{-1} U Theta (z - T~^*)^{-1} dz]_{n,n+1}
    with u = t - t^+, T the operator of ``t`` and T~ the tilt of t^+.
    """
    tp = t.with_values(params.amplitude(t.bond_index, +1))
    u = t.values - tp.values
    U = perturbation_matrix(t, u)
    w = WeightSequence(alpha, s)
    th = w(t.site_index)
    spec_p = eigendecompose(build_operator(tp))
    pos = spec_p.eigenvalues[spec_p.eigenvalues > spec_p.default_zero_tol()]
    c = build_contour(float(spec_p.eigenvalues.min()), float(pos.min()), nodes_per_edge)
    D = t.n_sites
    op = build_operator(t)
    Tt = tilted_operator(tp, alpha, s)
    R = shifted_solve(c.nodes, op.diag_off, op.diag_off, np.eye(D), scale=op.norm_bound())
    Rt = _tilted_resolvents(Tt, c.nodes, np.eye(D))
    RtT = _tilted_resolvents(Tt, c.nodes, np.eye(D), transpose=True)
    ThU = th[:, None] * U
    UTh = U * th[None, :]
    M = Rt @ ThU[None] @ R @ UTh[None] @ RtT
    integral = c.integrate(M) / (2j * np.pi)
    i, j = t.bond_sites
    q = -4.0 * integral[i, j].real
    q_norm = float(np.linalg.norm(q))
    l4 = float(np.sum((w(t.bond_index) * u) ** 4) ** 0.5)
    return QuadraticEstimate(q_norm, l4, q_norm / l4 if l4 > 0 else 0.0)
