"""Peierls energy, its gradient (Euler-Lagrange residual) and Hessian.

The main path diagonalizes T once and works in its eigenbasis.  For the
Hessian, the residues of (1/2 pi i) ∮ (z-a)^{-1} (z-b)^{-1} dz leave only
pairs with a occupied and b unoccupied, each weighted by 1/(lambda_a - lambda_b):

    H(h, k) = mu <h, k> + 4 sum_{a occ, b unocc} H_ab K_ab / (lambda_a - lambda_b)

where H_ab, K_ab are the perturbation matrices in the eigenbasis.  The
``*_contour`` functions evaluate the same forms by direct quadrature and serve
as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .contour import Contour, contour_for, eta_guard, negative_part_via_contour, shifted_solve
from .errors import DegenerateFit, GapClosed, InvalidParams, PerturbationTooLarge
from .lattice import Configuration, Window, build_operator
from .spectral import (SpectralData, eigendecompose, negative_projector, spectral_gap,
                       trace_negative_part)


@dataclass(frozen=True)
class EnergyReport:
    total: float
    elastic: float
    electronic: float
    mu: float


@dataclass(frozen=True)
class TaylorFit:
    exponent: float
    scales: np.ndarray
    remainders: np.ndarray
    linear_term: float


def _check_mu(mu):
    if not mu > 0:
        raise InvalidParams(f"mu must be positive, got {mu}")


def _spec(config, spec):
    return eigendecompose(build_operator(config)) if spec is None else spec


def _as_perturbation(config: Configuration, h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.shape != (config.n_bonds,):
        raise InvalidParams(f"perturbation must have shape ({config.n_bonds},), got {h.shape}")
    return h


def perturbation_matrix(config: Configuration, h) -> np.ndarray:
    """Dense matrix of a bond sequence h on the topology of ``config``."""
    h = _as_perturbation(config, h)
    i, j = config.bond_sites
    H = np.zeros((config.n_sites, config.n_sites))
    np.add.at(H, (i, j), h)
    np.add.at(H, (j, i), h)
    return H


def energy_total(config: Configuration, mu: float,
                 spec: Optional[SpectralData] = None) -> EnergyReport:
    """(mu/2) sum (t_n - 1)^2 - 2 Tr(T_-)."""
    _check_mu(mu)
    spec = _spec(config, spec)
    elastic = 0.5 * mu * float(np.sum((config.values - 1.0) ** 2))
    electronic = -2.0 * trace_negative_part(spec)
    return EnergyReport(elastic + electronic, elastic, electronic, float(mu))


def perturbation_radius(config: Configuration, spec: Optional[SpectralData] = None) -> float:
    """Size of h for which the contour of ``config`` stays valid for T + H."""
    spec = _spec(config, spec)
    g = spectral_gap(spec).g
    tau = float(np.min(config.values))
    delta = np.inf
    topo = config.topology
    if isinstance(topo, Window) and topo.left_tail is not None:
        delta = min(topo.left_tail.params.delta, topo.right_tail.params.delta)
    return eta_guard(g, tau, delta)


def energy_difference(t: Configuration, h, mu: float, method: str = "eigen",
                      contour: Optional[Contour] = None,
                      spec: Optional[SpectralData] = None) -> float:
    """F_t(h) = (mu/2) sum (h_n + 2 t_n - 2) h_n - 2 Tr((T+H)_- - T_-)."""
    _check_mu(mu)
    h = _as_perturbation(t, h)
    elastic = 0.5 * mu * float(np.sum((h + 2 * t.values - 2) * h))
    th = t.with_values(t.values + h)
    if method == "eigen":
        spec = _spec(t, spec)
        d = trace_negative_part(eigendecompose(build_operator(th))) - trace_negative_part(spec)
        return elastic - 2.0 * d
    if method != "contour":
        raise InvalidParams(f"unknown method {method!r}")
    spec = _spec(t, spec)
    eta = perturbation_radius(t, spec)
    if np.max(np.abs(h)) > eta:
        raise PerturbationTooLarge(f"|h|_inf = {np.max(np.abs(h)):g} > eta = {eta:g}")
    c = contour if contour is not None else contour_for(spec, 64)
    d = np.trace(negative_part_via_contour(build_operator(th), c)
                 - negative_part_via_contour(build_operator(t), c))
    return elastic - 2.0 * float(d)


def gradient_residual(config: Configuration, mu: float,
                      spec: Optional[SpectralData] = None,
                      zero_tol: Optional[float] = None) -> np.ndarray:
    """r_n = mu (t_n - 1) + 4 Gamma_{n,n+1}; zero exactly at critical points."""
    _check_mu(mu)
    spec = _spec(config, spec)
    V = spec.eigenvectors[:, spec.occupied(zero_tol)]
    i, j = config.bond_sites
    gamma_adj = np.einsum("ka,ka->k", V[i], V[j])
    return mu * (config.values - 1.0) + 4.0 * gamma_adj


def projector_adjacent(config: Configuration, spec: Optional[SpectralData] = None,
                       zero_tol: Optional[float] = None) -> np.ndarray:
    spec = _spec(config, spec)
    V = spec.eigenvectors[:, spec.occupied(zero_tol)]
    i, j = config.bond_sites
    return np.einsum("ka,ka->k", V[i], V[j])


def linear_form(t: Configuration, h, mu: float,
                spec: Optional[SpectralData] = None) -> float:
    """L_t(h) = mu sum (t_n - 1) h_n + 2 Tr(Gamma_t H)."""
    return float(gradient_residual(t, mu, spec) @ _as_perturbation(t, h))


class _Eigenbasis:
    """Occupied/unoccupied split of a spectrum, with the energy denominators."""

    def __init__(self, config: Configuration, spec: SpectralData):
        # a simple kernel (zero mode of a kink) counts as unoccupied; a
        # degenerate one makes F non-smooth and is rejected by spectral_gap
        negative_projector(spec)
        spectral_gap(spec)
        occ = spec.occupied()
        w = spec.eigenvalues
        if not occ.any() or occ.all():
            raise GapClosed("no occupied/unoccupied split")
        self.Vo = spec.eigenvectors[:, occ]
        self.Vu = spec.eigenvectors[:, ~occ]
        self.denom = w[occ][:, None] - w[~occ][None, :]
        if np.max(self.denom) > -10 * spec.default_zero_tol():
            raise GapClosed("occupied and unoccupied levels touch")
        self.config = config

    def block(self, h) -> np.ndarray:
        """Occupied x unoccupied block of V^T H V."""
        H = perturbation_matrix(self.config, h)
        return self.Vo.T @ H @ self.Vu

    def bond_blocks(self) -> np.ndarray:
        """X[n, a, b] for the unit perturbation on every bond n."""
        i, j = self.config.bond_sites
        Vo, Vu = self.Vo, self.Vu
        return (Vo[i][:, :, None] * Vu[j][:, None, :]
                + Vo[j][:, :, None] * Vu[i][:, None, :])


def hessian_quadratic(t: Configuration, h, k, mu: float,
                      spec: Optional[SpectralData] = None) -> float:
    _check_mu(mu)
    eb = _Eigenbasis(t, _spec(t, spec))
    h = _as_perturbation(t, h)
    k = _as_perturbation(t, k)
    Hb, Kb = eb.block(h), eb.block(k)
    return float(mu * (h @ k) + 4.0 * np.sum(Hb * Kb / eb.denom))


def hessian_apply(t: Configuration, v, mu: float,
                  spec: Optional[SpectralData] = None) -> np.ndarray:
    """(L v)_n = mu v_n + 4 [dGamma(V)]_{n,n+1}, with <w, L v> = H_t(w, v)."""
    _check_mu(mu)
    eb = _Eigenbasis(t, _spec(t, spec))
    v = _as_perturbation(t, v)
    M = eb.block(v) / eb.denom
    i, j = t.bond_sites
    dgamma = (np.einsum("ka,ab,kb->k", eb.Vo[i], M, eb.Vu[j])
              + np.einsum("kb,ab,ka->k", eb.Vu[i], M, eb.Vo[j]))
    return mu * v + 4.0 * dgamma


def hessian_matrix(t: Configuration, mu: float,
                   spec: Optional[SpectralData] = None) -> np.ndarray:
    """Dense matrix of L in the bond basis."""
    _check_mu(mu)
    eb = _Eigenbasis(t, _spec(t, spec))
    X = eb.bond_blocks().reshape(t.n_bonds, -1)
    Y = X / np.sqrt(-eb.denom.ravel())
    return mu * np.eye(t.n_bonds) - 4.0 * (Y @ Y.T)


def _contour_resolvents(t: Configuration, contour: Contour) -> np.ndarray:
    op = build_operator(t)
    return shifted_solve(contour.nodes, op.diag_off, op.diag_off, np.eye(op.dimension),
                         op.corner, op.corner, scale=op.norm_bound())


def hessian_quadratic_contour(t: Configuration, h, k, mu: float, contour: Contour,
                              z_form: bool = False) -> float:
    """Hessian by quadrature.

    Default: mu <h,k> + 2 Tr (1/2 pi i) ∮ H R K R dz.
    ``z_form``: mu <h,k> + 4 Tr (1/2 pi i) ∮ R H R K R z dz.
    """
    H = perturbation_matrix(t, h)
    K = perturbation_matrix(t, k)
    R = _contour_resolvents(t, contour)
    HR = H @ R
    KR = K @ R
    if z_form:
        # Tr(R H R K R) = Tr(H R K R R)
        vals = np.einsum("zij,zji->z", HR, KR @ R) * contour.nodes
        coef = 4.0
    else:
        vals = np.einsum("zij,zji->z", HR, KR)
        coef = 2.0
    tr = contour.integrate(vals) / (2j * np.pi)
    return float(mu * float(np.dot(h, k)) + coef * tr.real)


def linear_trace_contour(t: Configuration, h, contour: Contour,
                         z_form: bool = True) -> complex:
    """Tr (1/2 pi i) ∮ R H R z dz (``z_form``) or Tr (1/2 pi i) ∮ R H dz."""
    H = perturbation_matrix(t, h)
    R = _contour_resolvents(t, contour)
    if z_form:
        vals = np.einsum("zij,jk,zki->z", R, H, R) * contour.nodes
    else:
        vals = np.einsum("zij,ji->z", R, H)
    return contour.integrate(vals) / (2j * np.pi)


def taylor_check(t: Configuration, h, mu: float, scales: Sequence[float],
                 spec: Optional[SpectralData] = None) -> TaylorFit:
    """Log-log slope of |F(s h) - s L(h) - s^2/2 H(h,h)| against s."""
    spec = _spec(t, spec)
    h = _as_perturbation(t, h)
    scales = np.asarray(scales, dtype=float)
    eta = perturbation_radius(t, spec)
    if np.max(scales) * np.max(np.abs(h)) > eta:
        raise PerturbationTooLarge(
            f"largest step {np.max(scales) * np.max(np.abs(h)):g} exceeds eta = {eta:g}")
    lin = linear_form(t, h, mu, spec)
    quad = hessian_quadratic(t, h, h, mu, spec)
    rem = np.array([abs(energy_difference(t, s * h, mu, spec=spec) - s * lin - 0.5 * s * s * quad)
                    for s in scales])
    if np.all(rem < 1e-14):
        raise DegenerateFit("remainder below noise at every scale")
    ok = rem >= 1e-14
    if ok.sum() < 2:
        raise DegenerateFit("fewer than two remainders above noise")
    slope = np.polyfit(np.log(scales[ok]), np.log(rem[ok]), 1)[0]
    return TaylorFit(float(slope), scales, rem, lin)
