import math
from fractions import Fraction

import numpy as np
import pytest

from rcoreset import (LpProblem, build_lp_kk2, build_lp_r, minimize_sle2,
                      minimize_sle3, scan_lp_r, solve_lp, verify_constraints)
from rcoreset.lp import sle2_beta, sle3_beta
from rcoreset.oracle import CapacityError


def test_solve_lp_trivial():
    prob = LpProblem(objective=np.array([1.0]),
                     constraints=[(np.array([1.0]), ">=", 3.0)],
                     bounds=[(0.0, None)], names=["x"])
    sol = solve_lp(prob)
    assert sol.status == "optimal"
    assert abs(sol.objective_value - 3.0) < 1e-9


def test_solve_lp_infeasible():
    prob = LpProblem(objective=np.array([1.0]),
                     constraints=[(np.array([1.0]), "<=", 0.0),
                                  (np.array([1.0]), ">=", 1.0)],
                     bounds=[(None, None)], names=["x"])
    assert solve_lp(prob).status == "infeasible"


def test_verify_constraints_independent():
    prob = LpProblem(objective=np.array([1.0, 0.0]),
                     constraints=[(np.array([1.0, 1.0]), "=", 2.0),
                                  (np.array([1.0, -1.0]), "<=", 0.0)],
                     bounds=[(0, None), (0, None)], names=["x", "y"])
    assert verify_constraints(prob, np.array([1.0, 1.0])) <= 1e-12
    assert verify_constraints(prob, np.array([2.0, 1.0])) > 0.5


def test_lp_r_permuted_resolve_consistency():
    prob = build_lp_r(Fraction(127, 160))
    sol = solve_lp(prob)
    rng = np.random.default_rng(0)
    order = rng.permutation(len(prob.constraints))
    permuted = LpProblem(objective=prob.objective,
                         constraints=[prob.constraints[i] for i in order],
                         bounds=prob.bounds, names=prob.names)
    sol2 = solve_lp(permuted)
    assert abs(sol.objective_value - sol2.objective_value) < 1e-6


def test_lp_r_constraint_count_and_r1_limit():
    prob = build_lp_r(Fraction(1, 2))
    # 256 block constraints at most, plus 256 step constraints + 1 budget
    n_one = len(prob.constraints) - 257
    assert n_one <= 256
    sol1 = solve_lp(build_lp_r(Fraction(1, 1)))
    assert sol1.status == "optimal"
    assert sol1.objective_value > 0.5


def test_lp_r_all_zero_beta_one_feasible():
    prob = build_lp_kk2(8, 4)
    x = np.zeros(len(prob.objective))
    x[0] = 1.0  # beta
    assert verify_constraints(prob, x) <= 1e-12


def test_kk2_optimum_range_and_guard():
    sol = solve_lp(build_lp_kk2(8, 8))
    assert 0.33 < sol.objective_value <= 1.0
    with pytest.raises(CapacityError):
        build_lp_kk2(200, 10)


def test_kk2_compact_equals_enumerated_tiny():
    for dk in range(4, 11):
        for k2 in range(1, 4):
            compact = solve_lp(build_lp_kk2(2, k2, dk=dk))
            full = solve_lp(build_lp_kk2(2, k2, dk=dk,
                                         enumerate_subsets=True))
            assert abs(compact.objective_value -
                       full.objective_value) < 1e-6


def test_sle2_matches_closed_form():
    beta, alpha, lam, r = minimize_sle2()
    assert abs(beta - (2 - math.sqrt(2))) < 1e-4
    assert abs(lam - (1 - math.sqrt(0.5))) < 1e-3
    assert abs(alpha - math.sqrt(0.5)) < 1e-3
    assert abs(r) < 1e-3


def test_sle2_algebraic_identity_at_r0():
    # fixing r=0, lambda=1-sqrt(1/2): tight constraint solves to alpha=sqrt(1/2)
    lam = 1 - math.sqrt(0.5)
    beta, alpha = sle2_beta(lam, 0.0)
    assert abs(alpha - math.sqrt(0.5)) < 1e-12


def test_sle2_grid_invariance():
    b1 = minimize_sle2(grid=400)[0]
    b2 = minimize_sle2(grid=1200)[0]
    assert abs(b1 - b2) < 1e-5


def test_sle3_boundaries():
    res = minimize_sle3()
    assert abs(res.r_star - 0.71) <= 0.002
    assert res.beta_lambda1 >= 1 - math.exp(-1) - 1e-9
    assert res.alpha_lambda0 <= math.sqrt(2) - 1 + 1e-9
    assert res.beta_lambda0 >= 2 - math.sqrt(2) - 1e-9
    assert res.beta >= 2 - math.sqrt(2) - 1e-9
    assert res.beta_at_r_star > 2 - math.sqrt(2)
    # beta along the stationary line equals r itself
    assert abs(res.beta_at_r_star - res.r_star) < 1e-9


def test_sle3_alpha_clamped_to_box():
    for lam in (0.0, 0.5, 1.0):
        for r in (0.0, 0.5, 1.0):
            _, alpha = sle3_beta(lam, r)
            assert 0.0 <= alpha <= 1.0


def test_scan_lp_r_small_grid_curve():
    min_val, argmin, curve = scan_lp_r(grid=16)
    assert len(curve) == 15
    assert min_val == min(curve.values())
    assert curve[argmin] == min_val
    assert min_val <= 0.60
    # unimodal within value noise: once the curve has risen by more than
    # 1e-4 from its running minimum, it never dips below that minimum again
    run_min, rising = math.inf, False
    for d in sorted(curve):
        v = curve[d]
        if v < run_min - 1e-4:
            assert not rising
        run_min = min(run_min, v)
        if v > run_min + 1e-4:
            rising = True
