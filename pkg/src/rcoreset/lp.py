"""Factor-revealing linear programs and closed-form minimizations certifying
the 2-sqrt(2) ~ 0.5857 and 0.545 approximation constants.

Two LP families:

* a per-(k, k2) program whose optimum lower-bounds the greedy core-set
  pipeline's ratio when the adversary splits the optimum budget as k2;
* a per-rate-r program (770 variables, 8 index blocks of 32) whose scan over
  a 160-cell grid of r certifies the pseudo-greedy pipeline's 0.545 bound.

solve_lp delegates the simplex work to scipy's HiGHS backend and then
re-verifies every constraint at the returned point independently of the
solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .oracle import CapacityError, InputError

D_CONST = 2.0 * math.sqrt(2.0) + 1.0


class SolverError(RuntimeError):
    pass


@dataclass
class LpProblem:
    objective: np.ndarray             # minimize c @ x
    constraints: list                 # (row: np.ndarray, rel: "<="|">="|"=", rhs)
    bounds: list                      # per-variable (lo, hi); None = unbounded
    names: list = field(default_factory=list)

    @property
    def n_vars(self):
        return len(self.objective)


@dataclass
class LpSolution:
    status: str                       # optimal | infeasible | unbounded
    objective_value: object
    x: object
    max_violation: object


def verify_constraints(problem: LpProblem, x, include_bounds=True) -> float:
    """Max violation of any constraint/bound at x, computed directly."""
    worst = 0.0
    for row, rel, rhs in problem.constraints:
        lhs = float(np.dot(row, x))
        if rel == "<=":
            worst = max(worst, lhs - rhs)
        elif rel == ">=":
            worst = max(worst, rhs - lhs)
        else:
            worst = max(worst, abs(lhs - rhs))
    if include_bounds:
        for xi, (lo, hi) in zip(x, problem.bounds):
            if lo is not None:
                worst = max(worst, lo - xi)
            if hi is not None:
                worst = max(worst, xi - hi)
    return float(worst)


def solve_lp(problem: LpProblem, tol=1e-8) -> LpSolution:
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row, rel, rhs in problem.constraints:
        if rel == "<=":
            a_ub.append(row)
            b_ub.append(rhs)
        elif rel == ">=":
            a_ub.append(-np.asarray(row))
            b_ub.append(-rhs)
        elif rel == "=":
            a_eq.append(row)
            b_eq.append(rhs)
        else:
            raise InputError(f"bad relation {rel!r}")
    res = linprog(
        problem.objective,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=problem.bounds, method="highs")
    if res.status == 2:
        return LpSolution("infeasible", None, None, None)
    if res.status == 3:
        return LpSolution("unbounded", None, None, None)
    if res.status != 0:
        raise SolverError(f"LP solve failed: {res.message}")
    x = np.asarray(res.x)
    violation = verify_constraints(problem, x)
    if violation > max(tol, 1e-7):
        raise SolverError(
            f"returned point violates constraints by {violation:g}")
    return LpSolution("optimal", float(res.fun), x, violation)


# ---------------------------------------------------------------------------
# per-(k, k2) program


def build_lp_kk2(k, k2, dk=None, enumerate_subsets=False) -> LpProblem:
    """Variables: beta, alpha, a_1..a_Dk, b_1..b_Dk, c_1..c_Dk.

    The family "beta >= 1-alpha + sum_{j in J}(a_j+c_j) for every |J|=k2" is
    built either fully enumerated or in the exact compact form using the
    polyhedral epigraph of the sum of the k2 largest entries of (a+c):
    auxiliary s >= 0 and u_j >= 0 with
        beta >= 1-alpha + k2*s + sum_j u_j,   u_j >= a_j + c_j - s.
    Both forms cut out the same feasible set in (beta, alpha, a, b, c).
    """
    if k < 1 or k2 < 1:
        raise InputError("need k >= 1 and k2 >= 1")
    if dk is None:
        dk = math.ceil(D_CONST * k)
    if dk > 512:
        raise CapacityError(f"dense build guard: Dk={dk} > 512")
    if k > dk or k2 > dk:
        raise InputError("need k <= Dk and k2 <= Dk")

    extra = 0 if enumerate_subsets else (1 + dk)   # s and u_j
    nv = 2 + 3 * dk + extra
    BETA, ALPHA = 0, 1

    def ai(j):
        return 2 + j

    def bi(j):
        return 2 + dk + j

    def ci(j):
        return 2 + 2 * dk + j

    names = ["beta", "alpha"]
    names += [f"a_{j+1}" for j in range(dk)]
    names += [f"b_{j+1}" for j in range(dk)]
    names += [f"c_{j+1}" for j in range(dk)]
    cons = []

    if enumerate_subsets:
        if math.comb(dk, k2) > 200_000:
            raise CapacityError("enumerated subset family too large")
        for J in itertools.combinations(range(dk), k2):
            row = np.zeros(nv)
            row[BETA] = 1.0
            row[ALPHA] = 1.0
            for j in J:
                row[ai(j)] = -1.0
                row[ci(j)] = -1.0
            cons.append((row, ">=", 1.0))
    else:
        S = 2 + 3 * dk
        U = S + 1
        names += ["s"] + [f"u_{j+1}" for j in range(dk)]
        row = np.zeros(nv)
        row[BETA] = 1.0
        row[ALPHA] = 1.0
        row[S] = -float(k2)
        for j in range(dk):
            row[U + j] = -1.0
        cons.append((row, ">=", 1.0))
        for j in range(dk):
            row = np.zeros(nv)
            row[U + j] = 1.0
            row[S] = 1.0
            row[ai(j)] = -1.0
            row[ci(j)] = -1.0
            cons.append((row, ">=", 0.0))

    # step lower bound: a_j+b_j+c_j >= (alpha - sum_{j' < j} a_j')/k2
    for j in range(dk):
        row = np.zeros(nv)
        row[ai(j)] = float(k2)
        row[bi(j)] = float(k2)
        row[ci(j)] = float(k2)
        row[ALPHA] = -1.0
        for jp in range(j):
            row[ai(jp)] += 1.0
        cons.append((row, ">=", 0.0))

    row = np.zeros(nv)                      # sum b_j <= 1 - alpha
    for j in range(dk):
        row[bi(j)] = 1.0
    row[ALPHA] = 1.0
    cons.append((row, "<=", 1.0))

    row = np.zeros(nv)                      # beta >= sum_{j<=k} (a+b+c)
    row[BETA] = 1.0
    for j in range(k):
        row[ai(j)] = -1.0
        row[bi(j)] = -1.0
        row[ci(j)] = -1.0
    cons.append((row, ">=", 0.0))

    for j in range(dk - 1):                 # sorted steps
        row = np.zeros(nv)
        row[ai(j)] = 1.0
        row[bi(j)] = 1.0
        row[ci(j)] = 1.0
        row[ai(j + 1)] = -1.0
        row[bi(j + 1)] = -1.0
        row[ci(j + 1)] = -1.0
        cons.append((row, ">=", 0.0))

    obj = np.zeros(nv)
    obj[BETA] = 1.0
    bounds = [(0.0, None), (0.0, 1.0)]
    bounds += [(0.0, 1.0)] * (3 * dk)
    bounds += [(0.0, None)] * extra
    return LpProblem(objective=obj, constraints=cons, bounds=bounds,
                     names=names)


# ---------------------------------------------------------------------------
# per-rate program

LPR_BLOCKS = 8
LPR_BLOCK_SIZE = 32
LPR_L = LPR_BLOCKS * LPR_BLOCK_SIZE       # 256


def _lpr_allowed_sizes(r: Fraction):
    # |I| <= 4 + 4(1-r)/r; r=1 handled as the limit bound 4
    if r >= 1:
        return 4
    bound = 4 + 4 * (1 - r) / r
    return min(8, math.floor(bound))


def _lpr_coef(size, r: Fraction):
    # 1 - e^{-1 - ((4-size)/4) * r/(1-r)}; r=1 limit: exponent -> -inf sign
    # by (4-size): size<4 -> coef 1, size=4 -> 1-1/e, size>4 -> coef 0... the
    # r->1 limit of r/(1-r) is +inf, so (4-size)>0 gives coef -> 1 and
    # (4-size)<0 gives exponent -> +inf, coef -> -inf; but sizes > 4 are not
    # admissible at r=1 (bound is 4), so only the benign limits occur.
    if r >= 1:
        if size == 4:
            return 1.0 - math.exp(-1.0)
        return 1.0
    ratio = float(r / (1 - r))
    return 1.0 - math.exp(-1.0 - ((4 - size) / 4.0) * ratio)


def build_lp_r(r) -> LpProblem:
    """Variables: beta, alpha, a'_1..a'_256, b'_..., c'_...."""
    r = Fraction(r).limit_denominator(10**9) if not isinstance(r, Fraction) else r
    if not (0 < r <= 1):
        raise InputError("r must be in (0, 1]")
    L = LPR_L
    nv = 2 + 3 * L
    BETA, ALPHA = 0, 1

    def ai(l):
        return 2 + l

    def bi(l):
        return 2 + L + l

    def ci(l):
        return 2 + 2 * L + l

    names = (["beta", "alpha"] + [f"a_{l+1}" for l in range(L)]
             + [f"b_{l+1}" for l in range(L)] + [f"c_{l+1}" for l in range(L)])
    cons = []
    max_size = _lpr_allowed_sizes(r)
    for bitmask in range(256):
        size = bitmask.bit_count()
        if size > max_size:
            continue
        coef = _lpr_coef(size, r)
        block_ls = []
        for i in range(LPR_BLOCKS):
            if bitmask >> i & 1:
                block_ls.extend(range(i * LPR_BLOCK_SIZE,
                                      (i + 1) * LPR_BLOCK_SIZE))
        # beta >= coef*(1 - alpha - sum_I b') + sum_I (a'+b'+c')
        row = np.zeros(nv)
        row[BETA] = 1.0
        row[ALPHA] = coef
        for l in block_ls:
            row[ai(l)] -= 1.0
            row[bi(l)] += coef - 1.0
            row[ci(l)] -= 1.0
        cons.append((row, ">=", coef))

    # a'_l + b'_l + c'_l >= (alpha - sum_{l' <= l} a'_l')/128
    for l in range(L):
        row = np.zeros(nv)
        row[ai(l)] = 128.0
        row[bi(l)] = 128.0
        row[ci(l)] = 128.0
        row[ALPHA] = -1.0
        for lp in range(l + 1):
            row[ai(lp)] += 1.0
        cons.append((row, ">=", 0.0))

    row = np.zeros(nv)                     # sum b' <= 1 - alpha
    for l in range(L):
        row[bi(l)] = 1.0
    row[ALPHA] = 1.0
    cons.append((row, "<=", 1.0))

    obj = np.zeros(nv)
    obj[BETA] = 1.0
    bounds = [(0.0, None), (0.0, 1.0)] + [(0.0, None)] * (3 * L)
    return LpProblem(objective=obj, constraints=cons, bounds=bounds,
                     names=names)


def scan_lp_r(grid=160, tol=1e-8):
    """Solve the per-rate LP on every grid cell; conservative per-cell
    rounding uses the cell's lower endpoint r = d/grid for both the |I|
    bound (keeps every admissible I) and the exponential coefficient (the
    weaker constraint), so the reported minimum is a lower bound.

    Returns (min_value, argmin_cell, curve) with curve[d] = optimum at cell d.
    """
    if grid < 2:
        raise InputError("grid must be >= 2")
    curve = {}
    best_val, best_d = math.inf, None
    for d in range(1, grid):
        sol = solve_lp(build_lp_r(Fraction(d, grid)), tol=tol)
        if sol.status != "optimal":
            raise SolverError(f"cell {d}: status {sol.status}")
        curve[d] = sol.objective_value
        if sol.objective_value < best_val:
            best_val, best_d = sol.objective_value, d
    return best_val, best_d, curve


# ---------------------------------------------------------------------------
# closed-form minimizations


def _sle2_alpha_max(lam, r):
    """Largest alpha in [0,1] with (e^{-r} alpha - lam)^2 <= 2 lam (1-alpha)."""
    if lam <= 0:
        return 0.0
    q = math.exp(-2.0 * r)
    lin = 2.0 * lam * (1.0 - math.exp(-r))
    const = lam * lam - 2.0 * lam
    disc = lin * lin - 4.0 * q * const
    if disc < 0:
        return 0.0
    root = (-lin + math.sqrt(disc)) / (2.0 * q)
    return min(1.0, max(0.0, root))


def sle2_beta(lam, r):
    alpha = _sle2_alpha_max(lam, r)
    return 1.0 - alpha * math.exp(-r) + (1.0 - r) * lam, alpha


def minimize_sle2(tol=1e-9, grid=400):
    """Dense grid over (lambda, r) with the constraint tight in alpha,
    followed by local refinement.  Returns (beta, alpha, lambda, r)."""
    lo_l, hi_l, lo_r, hi_r = 0.0, 1.0, 0.0, 1.0
    best = (math.inf, 0.0, 0.0, 0.0)
    for _ in range(40):
        ls = np.linspace(lo_l, hi_l, grid)
        rs = np.linspace(lo_r, hi_r, grid)
        for lam in ls:
            for r in rs:
                beta, alpha = sle2_beta(float(lam), float(r))
                if beta < best[0]:
                    best = (beta, alpha, float(lam), float(r))
        span_l = (hi_l - lo_l) / grid * 8
        span_r = (hi_r - lo_r) / grid * 8
        lo_l = max(0.0, best[2] - span_l)
        hi_l = min(1.0, best[2] + span_l)
        lo_r = max(0.0, best[3] - span_r)
        hi_r = min(1.0, best[3] + span_r)
        grid = 33
        if span_l < tol and span_r < tol:
            break
    return best


SQRT2 = math.sqrt(2.0)


@dataclass
class Sle3Result:
    beta: float                 # overall minimum over the domain
    arg_lambda: float
    arg_r: float
    r_star: float               # interior stationary rate
    beta_at_r_star: float
    beta_lambda0: float         # minimum along the lambda=0 boundary
    beta_lambda1: float         # minimum along the lambda=1 boundary
    alpha_lambda0: float


def sle3_beta(lam, r, d_prime=SQRT2):
    # alpha set to make the second inequality tight, then clamped to its
    # [0,1] box (beta is decreasing in alpha, and lowering alpha below the
    # tight point only slackens the inequality)
    alpha = min(1.0, (1.0 + lam) / (1.0 + d_prime * math.exp(-r)))
    return 1.0 - alpha * math.exp(-r) + (1.0 - r) * lam, alpha


def minimize_sle3(D=D_CONST, tol=1e-9, grid=400) -> Sle3Result:
    """Minimize the three-constraint relaxation with D' = (D-1)/2.

    Also locates the interior stationary rate r* solving
    e^{-r} / (1 + D' e^{-r}) = 1 - r (where d beta / d lambda vanishes).
    """
    d_prime = (D - 1.0) / 2.0
    best = (math.inf, 0.0, 0.0)
    lo_l, hi_l, lo_r, hi_r = 0.0, 1.0, 0.0, 1.0
    g = grid
    for _ in range(40):
        for lam in np.linspace(lo_l, hi_l, g):
            for r in np.linspace(lo_r, hi_r, g):
                beta, _ = sle3_beta(float(lam), float(r), d_prime)
                if beta < best[0]:
                    best = (beta, float(lam), float(r))
        span_l = (hi_l - lo_l) / g * 8
        span_r = (hi_r - lo_r) / g * 8
        lo_l = max(0.0, best[1] - span_l)
        hi_l = min(1.0, best[1] + span_l)
        lo_r = max(0.0, best[2] - span_r)
        hi_r = min(1.0, best[2] + span_r)
        g = 33
        if span_l < tol and span_r < tol:
            break

    def h(r):
        return math.exp(-r) - (1.0 - r) * (1.0 + d_prime * math.exp(-r))

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) < 0:
            lo = mid
        else:
            hi = mid
    r_star = 0.5 * (lo + hi)
    beta_star = sle3_beta(0.5, r_star, d_prime)[0]  # lambda-independent here

    b0 = min(sle3_beta(0.0, float(r), d_prime)[0]
             for r in np.linspace(0, 1, 100001))
    b1 = min(sle3_beta(1.0, float(r), d_prime)[0]
             for r in np.linspace(0, 1, 100001))
    alpha0 = sle3_beta(0.0, 0.0, d_prime)[1]
    return Sle3Result(beta=best[0], arg_lambda=best[1], arg_r=best[2],
                      r_star=r_star, beta_at_r_star=beta_star,
                      beta_lambda0=b0, beta_lambda1=b1,
                      alpha_lambda0=alpha0)
