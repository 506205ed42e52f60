"""Polytope models and vertex normal cones.

All polytopes are stored in H-form (A x <= b). Vertex lists are materialized
only for small instances; large families expose implicit vertex oracles
(sign vectors for the cube, permutation matrices for the doubly stochastic
polytope).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateVertexError,
    InvalidDimensionError,
    InvalidInputError,
    NotInscribedError,
)

#: Single absolute geometric tolerance, for active-set detection and cone
#: membership alike. All experiments use unit-scale data.
GEOM_TOL = 1e-9

#: Vertex lists are materialized only below this count.
MAX_MATERIALIZED_VERTICES = 70_000


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Polytope:
    """H-representation A x <= b with optional vertex list and family tag."""

    family: str  # hypercube | inscribed | birkhoff | generic
    constraint_matrix: np.ndarray  # (m, n)
    rhs: np.ndarray  # (m,)
    ambient_dim: int
    vertex_list: Optional[np.ndarray] = None  # (k, n) or None
    birkhoff_side: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "constraint_matrix", _readonly(self.constraint_matrix))
        object.__setattr__(self, "rhs", _readonly(self.rhs))
        if self.vertex_list is not None:
            object.__setattr__(self, "vertex_list", _readonly(self.vertex_list))

    @property
    def n_constraints(self) -> int:
        return self.constraint_matrix.shape[0]

    def contains(self, x: np.ndarray, tol: float = GEOM_TOL) -> bool:
        return bool(np.all(self.constraint_matrix @ x <= self.rhs + tol))


@dataclass(frozen=True)
class VertexInfo:
    """A vertex together with its active constraint set."""

    point: np.ndarray
    active_set: tuple[int, ...]
    nondegenerate: bool

    def __post_init__(self):
        object.__setattr__(self, "point", _readonly(self.point))


@dataclass(frozen=True)
class Cone:
    """Polyhedral cone {y : S y >= 0} with unit inward facet normal rows."""

    normals: np.ndarray  # (l, n), unit rows
    ambient_dim: int
    square_invertible: bool

    def __post_init__(self):
        S = _readonly(self.normals)
        norms = np.linalg.norm(S, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-7):
            raise InvalidInputError("cone facet normals must have unit norm")
        object.__setattr__(self, "normals", S)

    @property
    def n_facets(self) -> int:
        return self.normals.shape[0]


def make_hypercube(n: int) -> Polytope:
    """The cube [-1, 1]^n as 2n constraints +/- e_i . x <= 1."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidDimensionError(f"hypercube dimension must be >= 1, got {n}")
    if n > 64:
        raise InvalidDimensionError(f"hypercube dimension capped at 64, got {n}")
    eye = np.eye(n)
    A = np.vstack([eye, -eye])
    b = np.ones(2 * n)
    verts = None
    if 2 ** n <= MAX_MATERIALIZED_VERTICES:
        verts = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    return Polytope("hypercube", A, b, n, verts)


def hypercube_vertices(n: int) -> Iterator[np.ndarray]:
    """Implicit sign-vector vertex oracle, usable above the materialization cap."""
    for signs in itertools.product((-1.0, 1.0), repeat=n):
        yield np.array(signs)


def make_birkhoff(d: int) -> Polytope:
    """Doubly stochastic d x d matrices, flattened to R^(d^2).

    The equality rows (row sums and column sums equal one) are stored as
    inequality pairs so that a single H-form code path applies. The redundant
    row of the doubly stochastic system is kept; vertices are degenerate in
    this description and are flagged as such rather than repaired.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDimensionError(f"doubly stochastic side must be >= 2, got {d}")
    if d > 16:
        raise InvalidDimensionError(f"doubly stochastic side capped at 16, got {d}")
    n = d * d
    rows = []
    rhs = []
    for i in range(d):  # row sums
        r = np.zeros(n)
        r[i * d:(i + 1) * d] = 1.0
        rows.append(r)
        rhs.append(1.0)
        rows.append(-r)
        rhs.append(-1.0)
    for j in range(d):  # column sums
        c = np.zeros(n)
        c[j::d] = 1.0
        rows.append(c)
        rhs.append(1.0)
        rows.append(-c)
        rhs.append(-1.0)
    for k in range(n):  # entrywise nonnegativity
        r = np.zeros(n)
        r[k] = -1.0
        rows.append(r)
        rhs.append(0.0)
    A = np.array(rows)
    b = np.array(rhs)
    verts = None
    if math.factorial(d) <= MAX_MATERIALIZED_VERTICES:
        verts = np.array([_permutation_matrix(p).ravel()
                          for p in itertools.permutations(range(d))])
    return Polytope("birkhoff", A, b, n, verts, birkhoff_side=d)


def _permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    d = len(perm)
    M = np.zeros((d, d))
    for i, j in enumerate(perm):
        M[i, j] = 1.0
    return M


def make_inscribed(points: Sequence[np.ndarray]) -> Polytope:
    """Convex hull of points on a common centered sphere.

    The H-form is computed by facet enumeration for n <= 4 only; in higher
    dimension the polytope is vertex-only and operations needing facets must
    reject it.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 2:
        raise InvalidInputError("need at least 2 points for an inscribed polytope")
    n = pts.shape[1]
    norms = np.linalg.norm(pts, axis=1)
    if norms.max() - norms.min() > 1e-9:
        raise NotInscribedError(
            f"points are not on a common sphere: radii in [{norms.min()}, {norms.max()}]")
    if np.linalg.matrix_rank(pts - pts[0], tol=1e-9) < n:
        raise InvalidInputError("points must affinely span the ambient space")
    if n <= 4:
        from scipy.spatial import ConvexHull

        hull = ConvexHull(pts)
        eqs = np.unique(np.round(hull.equations, 12), axis=0)
        A = eqs[:, :-1]
        b = -eqs[:, -1]
    else:
        A = np.zeros((0, n))
        b = np.zeros(0)
    return Polytope("inscribed", A, b, n, pts)


def vertex_info(P: Polytope, z: np.ndarray, tol: float = GEOM_TOL) -> VertexInfo:
    """Active set and nondegeneracy flag for a feasible point z."""
    z = np.asarray(z, dtype=float)
    resid = P.rhs - P.constraint_matrix @ z
    if np.any(resid < -tol):
        raise InvalidInputError("point is not feasible for the polytope")
    J = tuple(int(i) for i in np.flatnonzero(np.abs(resid) <= tol))
    n = P.ambient_dim
    nondeg = False
    if len(J) == n:
        AJ = P.constraint_matrix[list(J)]
        nondeg = np.linalg.matrix_rank(AJ, tol=1e-9) == n
    return VertexInfo(z, J, nondeg)


def vertex_normal_cone(P: Polytope, z: VertexInfo) -> Cone:
    """Normal cone at a nondegenerate vertex, in facet-normal H-form.

    The rows of the returned matrix are the normalized columns of the inverse
    of the active submatrix, so that the generated form A_J^T R+^n and the
    H-form {y : S y >= 0} describe the same cone.
    """
    if not z.nondegenerate:
        raise DegenerateVertexError(
            "vertex is degenerate; use LP re-solve paths instead of facet normals")
    AJ = P.constraint_matrix[list(z.active_set)]
    S = np.linalg.inv(AJ).T
    S /= np.linalg.norm(S, axis=1, keepdims=True)
    return Cone(S, P.ambient_dim, True)


def hypercube_vertex_cone(z: np.ndarray) -> Cone:
    """Normal cone of the cube at the sign vector z: the orthant sgn(x)=sgn(z)."""
    z = np.asarray(z, dtype=float)
    return Cone(np.diag(np.sign(z)), len(z), True)


@dataclass(frozen=True)
class EdgeFamily:
    """All cube edges sharing the unit direction e_axis, in aggregate."""

    axis: int
    gamma_rel: float  # relative Gaussian measure of each associated facet cone
    multiplicity: int  # number of edges with this direction


def hypercube_edges(n: int) -> tuple[int, list[EdgeFamily]]:
    """Edge count n 2^(n-1) and the aggregated per-axis facet-cone terms.

    Each edge of the cube has a unit direction e_i and an associated
    (n-1)-dimensional normal cone of relative Gaussian measure 2^-(n-1).
    Edges are never enumerated individually; the aggregate suffices for the
    linear-perturbation bound.
    """
    if n < 1 or n > 20:
        raise InvalidDimensionError(f"edge descriptors supported for 1 <= n <= 20, got {n}")
    mult = 2 ** (n - 1)
    gamma_rel = 2.0 ** (-(n - 1))
    families = [EdgeFamily(axis=i, gamma_rel=gamma_rel, multiplicity=mult)
                for i in range(n)]
    return n * mult, families


def polytope_to_text(P: Polytope) -> str:
    """Serialize the H-form: header line, then m rows of n+1 numbers."""
    lines = [f"polytope {P.family} n={P.ambient_dim} m={P.n_constraints}"]
    for i in range(P.n_constraints):
        nums = list(P.constraint_matrix[i]) + [P.rhs[i]]
        lines.append(" ".join(f"{x:.17g}" for x in nums))
    return "\n".join(lines) + "\n"


def polytope_from_text(text: str) -> Polytope:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidInputError("empty polytope serialization")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "polytope":
        raise InvalidInputError(f"bad polytope header: {lines[0]!r}")
    family = head[1]
    try:
        n = int(head[2].removeprefix("n="))
        m = int(head[3].removeprefix("m="))
    except ValueError as exc:
        raise InvalidInputError(f"bad polytope header: {lines[0]!r}") from exc
    if len(lines) != m + 1:
        raise InvalidInputError(f"expected {m} constraint rows, found {len(lines) - 1}")
    data = np.array([[float(tok) for tok in ln.split()] for ln in lines[1:]])
    if data.shape != (m, n + 1):
        raise InvalidInputError("constraint rows have the wrong width")
    A, b = data[:, :n], data[:, n]
    if family == "hypercube":
        P = make_hypercube(n)
    elif family == "birkhoff":
        d = int(round(math.sqrt(n)))
        P = make_birkhoff(d)
    else:
        return Polytope(family, A, b, n)
    if not (np.array_equal(P.constraint_matrix, A) and np.array_equal(P.rhs, b)):
        raise InvalidInputError(f"serialized {family} rows do not match the family layout")
    return P
