"""LP oracles: dense simplex, sign-vector cube solve, assignment solve.

These locate the solution vertex of the unperturbed problem and test vertex
optimality under perturbed costs. Optimality testing is done by value
comparison against a re-solve, which keeps one code path across oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    InfeasibleProblemError,
    InvalidInputError,
    TieError,
    UnboundedProblemError,
)
from .geometry import GEOM_TOL, Polytope

VALUE_TOL = 1e-9
_PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class LPSolution:
    point: np.ndarray
    value: float
    active_set: tuple[int, ...]
    unique_flag: bool


def solve_simplex(P: Polytope, cost: np.ndarray) -> LPSolution:
    """Minimize cost . x over A x <= b by two-phase tableau simplex.

    Free variables are split x = u - v; Bland's rule prevents cycling.
    """
    if P.family == "birkhoff":
        raise InvalidInputError("use solve_assignment for the doubly stochastic polytope")
    A = P.constraint_matrix
    b = P.rhs
    m, n = A.shape
    if m == 0:
        raise InvalidInputError("polytope has no H-form; simplex needs facets")
    if m > 512 or n > 64:
        raise InvalidInputError(f"problem size {m}x{n} exceeds the dense simplex limits")
    cost = np.asarray(cost, dtype=float)

    # Standard form: [A, -A, I] [u; v; s] = b with u, v, s >= 0.
    n_struct = 2 * n + m
    Aeq = np.hstack([A, -A, np.eye(m)])
    beq = b.copy()
    neg = beq < 0
    Aeq[neg] *= -1.0
    beq[neg] *= -1.0

    n_art = int(neg.sum())
    basis = np.empty(m, dtype=int)
    if n_art:
        art_cols = np.zeros((m, n_art))
        for k, i in enumerate(np.flatnonzero(neg)):
            art_cols[i, k] = 1.0
            basis[i] = n_struct + k
        Aeq = np.hstack([Aeq, art_cols])
    basis[~neg] = 2 * n + np.flatnonzero(~neg)

    T = np.zeros((m + 1, Aeq.shape[1] + 1))
    T[:m, :-1] = Aeq
    T[:m, -1] = beq

    if n_art:
        c1 = np.zeros(Aeq.shape[1])
        c1[n_struct:] = 1.0
        _set_objective_row(T, basis, c1)
        _pivot_until_optimal(T, basis, allowed=Aeq.shape[1])
        if T[-1, -1] < -1e-8:
            raise InfeasibleProblemError("phase 1 optimum is positive; constraints are infeasible")

    c2 = np.zeros(Aeq.shape[1])
    c2[:n] = cost
    c2[n:2 * n] = -cost
    _set_objective_row(T, basis, c2)
    _pivot_until_optimal(T, basis, allowed=n_struct)

    x_full = np.zeros(Aeq.shape[1])
    x_full[basis] = T[:m, -1]
    x = x_full[:n] - x_full[n:2 * n]
    value = float(cost @ x)

    active = tuple(int(i) for i in np.flatnonzero(np.abs(A @ x - b) <= GEOM_TOL))
    unique = _unique_heuristic(T, basis, n, n_struct)
    return LPSolution(x, value, active, unique)


def _set_objective_row(T: np.ndarray, basis: np.ndarray, c: np.ndarray) -> None:
    m = len(basis)
    T[-1, :-1] = c
    T[-1, -1] = 0.0
    for i in range(m):
        cb = c[basis[i]]
        if cb != 0.0:
            T[-1] -= cb * T[i]


def _pivot_until_optimal(T: np.ndarray, basis: np.ndarray, allowed: int) -> None:
    m = len(basis)
    while True:
        red = T[-1, :allowed]
        entering = -1
        for j in range(allowed):  # Bland: smallest eligible index
            if red[j] < -_PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return
        col = T[:m, entering]
        rows = np.flatnonzero(col > _PIVOT_TOL)
        if rows.size == 0:
            raise UnboundedProblemError("unbounded descent direction in phase 2")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        cand = rows[ratios <= best + 1e-12]
        leave = cand[np.argmin(basis[cand])]  # Bland tie-break
        _pivot(T, leave, entering)
        basis[leave] = entering


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    piv = T[row].copy()
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, piv)
    T[row] = piv


def _unique_heuristic(T: np.ndarray, basis: np.ndarray, n: int, n_struct: int) -> bool:
    """No nonbasic structural column with zero reduced cost (split partners of
    basic columns excluded, since those are always zero)."""
    basic = set(int(b) for b in basis)
    partners = {j + n for j in basic if j < n} | {j - n for j in basic if n <= j < 2 * n}
    for j in range(n_struct):
        if j in basic or j in partners:
            continue
        if abs(T[-1, j]) <= 1e-9:
            return False
    return True


def solve_hypercube(g: np.ndarray) -> LPSolution:
    """Maximize g . x over the cube: the solution is the sign vector of g."""
    g = np.asarray(g, dtype=float)
    if np.any(g == 0.0):
        raise TieError("zero cost component on the cube; resample the draw")
    z = np.sign(g)
    n = len(g)
    # active rows in the [I; -I] layout: +e_i when z_i = 1, -e_i otherwise
    active = tuple(int(i) if z[i] > 0 else int(i + n) for i in range(n))
    return LPSolution(z, float(-np.abs(g).sum()), active, True)


def solve_assignment(C: np.ndarray) -> tuple[tuple[int, ...], float]:
    """Minimum-cost assignment, lexicographically smallest among optima.

    The base optimum comes from the Hungarian-style solver; the permutation is
    then rebuilt row by row, fixing the smallest column that keeps the total
    optimal. Ties are measure-zero under Gaussian costs, so the rebuild almost
    always confirms the solver's own answer.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise InvalidInputError("cost matrix must be square")
    if not np.all(np.isfinite(C)):
        raise InvalidInputError("cost matrix entries must be finite")
    d = C.shape[0]
    if d > 64:
        raise InvalidInputError(f"assignment side capped at 64, got {d}")
    r, c = linear_sum_assignment(C)
    best = float(C[r, c].sum())

    perm: list[int] = []
    avail = list(range(d))
    prefix = 0.0
    for i in range(d):
        for j in avail:
            rest = [k for k in avail if k != j]
            if rest:
                sub = C[np.ix_(range(i + 1, d), rest)]
                rr, cc = linear_sum_assignment(sub)
                tail = float(sub[rr, cc].sum())
            else:
                tail = 0.0
            if prefix + C[i, j] + tail <= best + VALUE_TOL:
                perm.append(j)
                avail.remove(j)
                prefix += float(C[i, j])
                break
        else:  # numerically unreachable; guard against tolerance misses
            perm.append(avail.pop(0))
            prefix += float(C[i, perm[-1]])
    value = float(sum(C[i, perm[i]] for i in range(d)))
    return tuple(perm), value


def is_vertex_optimal(P: Polytope, z: np.ndarray, cost_vector: np.ndarray,
                      tol: float = VALUE_TOL) -> bool:
    """True iff cost . z is within tol of the minimum of cost . x over P."""
    z = np.asarray(z, dtype=float)
    cost = np.asarray(cost_vector, dtype=float)
    if P.family == "hypercube":
        # orthant test: -cost must not oppose the sign pattern of z
        return bool(np.all(cost * z <= tol))
    if P.family == "birkhoff":
        d = P.birkhoff_side
        _, opt = solve_assignment(cost.reshape(d, d))
        return float(cost @ z) <= opt + tol
    if P.vertex_list is not None:
        opt = float((P.vertex_list @ cost).min())
        return float(cost @ z) <= opt + tol
    sol = solve_simplex(P, cost)
    return float(cost @ z) <= sol.value + tol
