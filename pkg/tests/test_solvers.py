import numpy as np
import pytest

from sshkink.energy import energy_total, gradient_residual
from sshkink.errors import GapUsageError, InvalidParams, NotConverged, PositivityViolated
from sshkink.lattice import closed_ring, open_chain
from sshkink.solvers import (SolverOptions, fixed_point, minimize_closed, solve_kink,
                             solve_odd_ring_kink, solve_periodic_dimerized, split_dimerized)


def test_options_validation():
    for bad in (dict(beta=0.0), dict(beta=1.5), dict(residual_tol=0.0), dict(max_iters=0)):
        with pytest.raises(InvalidParams):
            SolverOptions(**bad)


def test_two_site_one_step():
    cp = minimize_closed(2, 2.0, SolverOptions(beta=1.0), init=open_chain([1.0]))
    # 1 + 2/mu up to the rounding of the eigenvector product
    assert abs(cp.config.values[0] - 2.0) <= 1e-15
    assert cp.iterations == 1 and cp.converged


def test_ring_of_ten_dimerizes():
    cp = minimize_closed(10, 1.0)
    t = cp.config.values
    assert cp.converged and cp.residual_norm <= 1e-10
    assert np.max(np.abs(t[2:] - t[:-2])) <= 1e-8
    p = split_dimerized(t)
    assert p.delta > 0.1
    shifted = cp.config.shifted(1)
    assert np.max(np.abs(shifted.values - t)) > 0.1
    assert abs(energy_total(shifted, 1.0).total - cp.energy.total) <= 1e-12
    assert cp.energy_monotone


def test_converged_residual_is_below_tolerance():
    cp = minimize_closed(14, 1.0, SolverOptions(residual_tol=1e-11))
    assert np.max(np.abs(gradient_residual(cp.config, 1.0))) <= 1e-11


def test_minimizer_beats_uniform():
    cp = minimize_closed(10, 1.0)
    uniform = closed_ring(np.full(10, cp.config.values.mean()))
    assert cp.energy.total <= energy_total(uniform, 1.0).total


def test_two_periodicity_is_preserved():
    t = closed_ring(2.0 + 0.3 * (-1.0) ** np.arange(12))
    for _ in range(5):
        with pytest.raises(NotConverged) as info:
            fixed_point(t, 1.0, SolverOptions(max_iters=1, residual_tol=1e-300))
        t = info.value.result.config
    assert np.max(np.abs(t.values[2:] - t.values[:-2])) <= 1e-12


def test_not_converged_carries_result():
    with pytest.raises(NotConverged) as info:
        minimize_closed(10, 1.0, SolverOptions(max_iters=3))
    assert info.value.result is not None and not info.value.result.converged


def test_positivity_violation():
    # the step from t = 11 lands below the floor 10 and is clipped; the loose
    # tolerance then accepts the clipped point
    with pytest.raises(PositivityViolated) as info:
        fixed_point(open_chain([11.0]), 0.5,
                    SolverOptions(beta=1.0, positivity_floor=10.0, residual_tol=2.6))
    assert info.value.result.config.values[0] == 10.0


def test_periodic_family_matches_full_solver():
    p = solve_periodic_dimerized(10, 1.0)
    q = split_dimerized(minimize_closed(10, 1.0).config.values)
    assert abs(p.W - q.W) <= 1e-6 and abs(p.delta - q.delta) <= 1e-6
    assert p.delta >= 0


def test_periodic_thermodynamic_limit():
    a, b = solve_periodic_dimerized(50, 1.0), solve_periodic_dimerized(100, 1.0)
    assert abs(a.W - b.W) <= 1e-3 and abs(a.delta - b.delta) <= 1e-3


def test_kink_profile(kink100, ref_params):
    cp = kink100
    assert cp.converged and cp.residual_norm <= 1e-10
    n = cp.config.bond_index
    t = cp.config.values
    lo, hi = ref_params.W - ref_params.delta, ref_params.W + ref_params.delta
    core = (n >= -2) & (n <= 1)
    assert np.all((t[core] > lo) & (t[core] < hi))
    u_right = t - ref_params.amplitude(n, +1)
    u_left = t - ref_params.amplitude(n, -1)
    assert np.max(np.abs(u_right[(n >= 60) & (n <= 99)])) < 1e-10
    assert np.max(np.abs(u_left[(n <= -61) & (n >= -100)])) < 1e-10
    assert cp.energy_monotone


def test_kink_mirror_symmetry(kink100):
    # t_{-n-1} = t_n about the junction
    n = kink100.config.bond_index
    t = dict(zip(n.tolist(), kink100.config.values.tolist()))
    diff = max(abs(t[k] - t[-k - 1]) for k in range(0, 100))
    assert diff <= 1e-10


def test_kink_rejects_kernel_occupation():
    with pytest.raises(GapUsageError):
        solve_kink(30, 1.0, include_kernel=True)
    with pytest.raises(InvalidParams):
        solve_kink(10, 1.0)


def test_odd_ring_kink(ref_params):
    cp = solve_odd_ring_kink(101, 1.0, params=ref_params)
    assert cp.converged
    u = cp.config.values - ref_params.amplitude(np.arange(101), +1)
    # localized at the seam, flat in the middle of the ring
    assert np.max(np.abs(u[40:60])) < 1e-6
    assert np.max(np.abs(u[:3])) > 0.1 and np.max(np.abs(u[-3:])) > 0.1
