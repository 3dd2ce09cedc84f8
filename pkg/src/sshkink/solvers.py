"""Dimerized minimizers and kink critical points.

All solvers iterate the damped map

    t <- (1 - beta) t + beta (1 - (4/mu) Gamma(t)_{n,n+1})

on a set of free bonds.  Since the update equals t - (beta/mu) r with r the
energy gradient, this is gradient descent with step beta/mu.  The electronic
term -2 Tr(T_-) is concave in t and the elastic term has curvature mu, so for
beta <= 1 every step lowers the energy (up to rounding).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.optimize

from .energy import EnergyReport, energy_total, gradient_residual
from .errors import GapUsageError, InvalidParams, NotConverged, PositivityViolated
from .lattice import (TAU_MIN, Configuration, DimerizedParams, Tail, Window,
                      build_operator, closed_ring)
from .spectral import eigendecompose

TAIL_REFERENCE_L = 400


@dataclass(frozen=True)
class SolverOptions:
    beta: float = 0.5
    max_iters: int = 20000
    residual_tol: float = 1e-10
    positivity_floor: float = TAU_MIN
    verbose: bool = False

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise InvalidParams(f"beta must lie in (0, 1], got {self.beta}")
        if not self.residual_tol > 0:
            raise InvalidParams("residual_tol must be positive")
        if self.max_iters < 1:
            raise InvalidParams("max_iters must be >= 1")


@dataclass(frozen=True)
class CriticalPoint:
    config: Configuration
    residual_norm: float
    energy: EnergyReport
    iterations: int
    converged: bool
    free_range: Optional[tuple[int, int]] = None
    energy_monotone: bool = True
    history: list = field(default_factory=list, repr=False, compare=False)


def fixed_point(init: Configuration, mu: float, opts: SolverOptions,
                free: Optional[np.ndarray] = None,
                free_range: Optional[tuple[int, int]] = None) -> CriticalPoint:
    """Damped fixed-point iteration on the bonds selected by ``free``.

    Clamped bonds keep their initial values but still enter Gamma.  Raises
    NotConverged or PositivityViolated with the last iterate attached.
    """
    if not mu > 0:
        raise InvalidParams(f"mu must be positive, got {mu}")
    free = np.ones(init.n_bonds, bool) if free is None else np.asarray(free, bool)
    t = np.array(init.values, dtype=float)
    beta, floor = opts.beta, opts.positivity_floor
    prev_energy = np.inf
    monotone = True
    history = []
    clipped = np.zeros_like(free)
    for it in range(opts.max_iters + 1):
        config = init.with_values(t)
        spec = eigendecompose(build_operator(config))
        r = gradient_residual(config, mu, spec)
        res = float(np.max(np.abs(r[free]))) if free.any() else 0.0
        en = energy_total(config, mu, spec)
        # rounding in a sum of O(L) terms
        if en.total > prev_energy + 1e-12 * max(1.0, abs(prev_energy)):
            monotone = False
        prev_energy = en.total
        history.append((res, en.total))
        if opts.verbose:
            print(f"iter {it:5d}  residual {res:.3e}  energy {en.total:.15g}")
        if res <= opts.residual_tol:
            cp = CriticalPoint(config, res, en, it, True, free_range, monotone, history)
            if clipped.any():
                raise PositivityViolated("positivity floor active at convergence", cp)
            return cp
        if it == opts.max_iters:
            break
        step = t[free] - (beta / mu) * r[free]
        clipped = np.zeros_like(free)
        clipped[free] = step < floor
        t[free] = np.maximum(step, floor)
    cp = CriticalPoint(config, res, en, opts.max_iters, False, free_range, monotone, history)
    raise NotConverged(f"residual {res:.3e} after {opts.max_iters} iterations", cp)


def staggered_start(L: int, mu: float, amplitude: float = 1e-3) -> Configuration:
    """Uniform-chain guess 1 + 4/(pi mu) plus a small staggered part."""
    n = np.arange(L)
    return closed_ring(1.0 + 4.0 / (np.pi * mu) + amplitude * (-1.0) ** n)


def minimize_closed(L: int, mu: float, opts: SolverOptions = SolverOptions(),
                    init: Optional[Configuration] = None) -> CriticalPoint:
    """Fixed-point solve of the whole configuration; ``init`` may be any topology."""
    if init is None:
        if L % 2 or L < 4:
            raise InvalidParams(f"L must be even and >= 4, got {L}")
        init = staggered_start(L, mu)
    elif init.n_sites != L:
        raise InvalidParams(f"init has {init.n_sites} sites, expected {L}")
    return fixed_point(init, mu, opts)


def split_dimerized(values) -> DimerizedParams:
    """(mean, staggered amplitude) of a sequence indexed from an even site, delta >= 0."""
    v = np.asarray(values, dtype=float)
    n = np.arange(v.size)
    W = float(np.mean(v))
    delta = float(np.mean(v * (-1.0) ** n))
    return DimerizedParams(W, abs(delta))


@functools.lru_cache(maxsize=32)
def solve_periodic_dimerized(L: int, mu: float) -> DimerizedParams:
    """Best 2-periodic ring: Nelder-Mead on (W, delta), polished by the fixed-point map.

    The map preserves 2-periodicity, so the polish stays in the family and
    removes the Nelder-Mead tolerance floor.
    """
    if L % 2 or L < 4:
        raise InvalidParams(f"L must be even and >= 4, got {L}")
    if not mu > 0:
        raise InvalidParams(f"mu must be positive, got {mu}")
    n = np.arange(L)
    stag = (-1.0) ** n

    def energy(x):
        W, d = x
        t = W + d * stag
        if np.min(t) <= TAU_MIN:
            return np.inf
        return energy_total(closed_ring(t), mu).total

    W0 = 1.0 + 4.0 / (np.pi * mu)
    res = scipy.optimize.minimize(energy, [W0, 0.1 * W0], method="Nelder-Mead",
                                  options={"xatol": 1e-7, "fatol": 1e-10 * L, "maxiter": 2000})
    if not res.success:
        raise NotConverged(f"Nelder-Mead: {res.message}")
    W, d = res.x
    cp = fixed_point(closed_ring(W + d * stag), mu, SolverOptions(residual_tol=1e-13))
    return split_dimerized(cp.config.values)


def default_padding(N: int) -> int:
    """Clamped tail length so that the window ends on strong bonds on both sides."""
    return 41 if N % 2 == 0 else 40


def kink_window(N: int, params: DimerizedParams, padding: int) -> tuple[Configuration, np.ndarray]:
    """Sharp kink on bonds [-N-P, N-1+P] and the mask of free bonds [-N, N-1]."""
    if (N + padding) % 2 == 0:
        raise InvalidParams("N + padding must be odd so both end bonds are strong")
    first = -N - padding
    n = first + np.arange(2 * (N + padding))
    values = np.where(n < 0, params.amplitude(n, -1), params.amplitude(n, +1))
    topo = Window(first, values.size + 1, Tail(params, -1), Tail(params, +1))
    free = (n >= -N) & (n <= N - 1)
    return Configuration(topo, values), free


def solve_kink(N: int, mu: float, opts: SolverOptions = SolverOptions(),
               params: Optional[DimerizedParams] = None, padding: Optional[int] = None,
               include_kernel: bool = False) -> CriticalPoint:
    """Kink critical point with free bonds [-N, N-1] between clamped t^- and t^+ tails.

    The zero mode is never occupied: Gamma = 1(T < 0) strictly.
    """
    if include_kernel:
        raise GapUsageError("the kink equation uses the strict projector 1(T < 0)")
    if N < 20:
        raise InvalidParams(f"half width must be >= 20, got {N}")
    if params is None:
        params = solve_periodic_dimerized(TAIL_REFERENCE_L, mu)
    padding = default_padding(N) if padding is None else padding
    init, free = kink_window(N, params, padding)
    return fixed_point(init, mu, opts, free, (-N, N - 1))


def solve_odd_ring_kink(L: int, mu: float, opts: SolverOptions = SolverOptions(),
                        params: Optional[DimerizedParams] = None) -> CriticalPoint:
    """Critical point on an odd ring, started from a dimerized pattern with one defect."""
    if L % 2 == 0 or L < 5:
        raise InvalidParams(f"L must be odd and >= 5, got {L}")
    if params is None:
        params = solve_periodic_dimerized(TAIL_REFERENCE_L, mu)
    n = np.arange(L)
    init = closed_ring(params.amplitude(n, +1), allow_odd=True)
    return fixed_point(init, mu, opts)
