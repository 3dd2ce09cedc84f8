"""Seeded property suites run by ``sshkink verify``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analysis
from .lattice import Closed, DimerizedParams, Window, closed_ring, dimerized_configuration

DEFAULT_PARAMS = DimerizedParams(1.0, 0.2)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: dict


def suite_schatten(rng: np.random.Generator, draws: int) -> list[CheckResult]:
    out = []
    for p in (1, 2, 4, np.inf):
        worst, violations = 0.0, 0
        for _ in range(draws):
            n = int(rng.integers(2, 40))
            a = rng.normal(size=n) * rng.uniform(0.1, 3.0)
            lhs = analysis.schatten_norm(analysis.sequence_matrix(a), p)
            bound = 2.0 * analysis.lp_norm(a, p)
            worst = max(worst, lhs / bound)
            violations += lhs > bound * (1 + 1e-12)
        out.append(CheckResult("schatten", f"p={p}", violations == 0,
                               {"draws": draws, "violations": violations, "max_ratio": worst}))
    return out


def suite_anticommutator(rng: np.random.Generator, draws: int) -> list[CheckResult]:
    t = dimerized_configuration(DEFAULT_PARAMS, +1, Closed(40))
    worst = 0.0
    for _ in range(draws):
        h = np.zeros(40)
        h[2:38] = rng.normal(size=36)
        r = analysis.anticommutator_identity_check(t, h)
        worst = max(worst, r.discrepancy / (1 + r.lhs))
    return [CheckResult("anticommutator", "identity", worst <= 1e-10,
                        {"draws": draws, "max_relative_discrepancy": worst})]


def suite_translation(rng: np.random.Generator, draws: int, L: int = 100,
                      S: int = 5) -> list[CheckResult]:
    fails, worst = 0, 0.0
    support = np.r_[0:S + 1, L - S:L]
    for _ in range(draws):
        t = closed_ring(rng.uniform(0.5, 1.5, L))
        h = np.zeros(L)
        h[support] = rng.normal(size=support.size)
        r = analysis.translation_average_bound_check(t, h, S)
        worst = max(worst, r.lhs / r.bound)
        fails += r.lhs > r.bound
    return [CheckResult("translation", f"L={L},S={S}", fails == 0,
                        {"draws": draws, "violations": fails, "max_ratio": worst})]


def suite_convexity(rng: np.random.Generator, draws: int) -> list[CheckResult]:
    eq = analysis.convexity_gap_check(dimerized_configuration(DEFAULT_PARAMS, +1, Closed(20)))
    fails = 0
    for _ in range(draws):
        r = analysis.convexity_gap_check(closed_ring(rng.uniform(0.5, 1.5, 20)))
        fails += r.lhs < r.rhs - 1e-12
    return [CheckResult("convexity", "equality_dimerized", eq.discrepancy <= 1e-10,
                        {"discrepancy": eq.discrepancy}),
            CheckResult("convexity", "inequality_random", fails == 0,
                        {"draws": draws, "violations": fails})]


def suite_tilt(rng: np.random.Generator, draws: int) -> list[CheckResult]:
    p = DEFAULT_PARAMS
    t = dimerized_configuration(p, +1, Window(0, 100))
    out = [CheckResult("tilt", "commutation", analysis.commutation_residual(t, 0.1, 0) <= 1e-13,
                       {"residual": analysis.commutation_residual(t, 0.1, 0)})]
    for a in (0.05, 0.1, 0.2):
        lhs, bound = analysis.tilt_norm_check(t, p, a, 50)
        out.append(CheckResult("tilt", f"norm_alpha={a}", lhs <= bound,
                               {"lhs": lhs, "bound": bound}))
    rc = analysis.resolvent_commutation_check(t, 0.05, 50)
    out.append(CheckResult("tilt", "resolvent", rc.commutation_error <= 1e-10 and rc.norm_ratio <= 2,
                           {"error": rc.commutation_error, "norm_ratio": rc.norm_ratio}))
    return out


def suite_qblock(rng: np.random.Generator, draws: int) -> list[CheckResult]:
    worst = 0.0
    for _ in range(draws):
        a, b = rng.uniform(0.1, 3.0, 2)
        Q = analysis.q_block(a, b)
        worst = max(worst, abs(np.trace(Q) - 3 * (a * a + b * b)) / (a * a + b * b),
                    abs(np.linalg.det(Q) - 2 * (a * a - b * b) ** 2) / (a * a + b * b) ** 2)
    return [CheckResult("qblock", "trace_det", worst <= 1e-12, {"draws": draws, "max_rel": worst})]


SUITES: dict[str, Callable] = {
    "schatten": suite_schatten,
    "anticommutator": suite_anticommutator,
    "translation": suite_translation,
    "convexity": suite_convexity,
    "tilt": suite_tilt,
    "qblock": suite_qblock,
}


def run_suites(names, seed: int, draws: int) -> list[CheckResult]:
    """Each suite gets its own generator so results do not depend on suite order."""
    out = []
    for name in names:
        rng = np.random.default_rng([seed, list(SUITES).index(name)])
        out.extend(SUITES[name](rng, draws))
    return out
