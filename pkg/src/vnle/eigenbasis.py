"""Eigenfunction construction for the level graphs.

Three mechanisms produce every eigenfunction:

* eigenvalue 3, born at level m: pick a vertex that was new at some level
  j < m (or the origin pair); alternate +1/-1 over the level-m new vertices
  strictly inside the arc joining its two circle points, zero elsewhere.
  The gluing maps the interior of such an arc to itself, so the alternation
  cancels around every interior old vertex.
* eigenvalue 1, born at level m: equal values on the two new vertices of
  each gap between consecutive old points, zero at old vertices, subject to
  one linear constraint per old vertex (its four incident gap values sum to
  zero). The solution space has dimension 5^(m-1).
* extension: a lambda-eigenfunction at level m extends to an eigenvalue
  lambda' = phi_i(lambda) at level m+1 by keeping old values and filling
  each sandwiched pair from its flanking old values A, B:
      a = ((2-l)A + B) / ((1-l)(3-l)),   b = (A + (2-l)B) / ((1-l)(3-l)).

Counting: 5^(m-1)+1 plus 5^(m-1) born functions plus 3*(5^(m-1)-1)+2
extensions reproduce all 5^m eigenfunctions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .circlegraph import (
    LevelGraph,
    build_level,
    half_reflect_numerator,
    reflect_numerator,
    vertex_permutation,
    wrap_numerator,
)
from .decimation import BranchPath, EigenvalueRecord, inverse_branch

DEFAULT_LEVEL_CAP = 4
_PIVOT_REL_TOL = 1e-10


@dataclass
class NodeFunction:
    """Real values on the vertices of one level graph, optionally tagged
    with the eigenvalue and symbolic path it is supposed to satisfy."""

    m: int
    values: np.ndarray
    eigenvalue: float | None = None
    path: BranchPath | None = None

    def copy(self) -> "NodeFunction":
        return replace(self, values=self.values.copy())


def constant_function(m: int) -> NodeFunction:
    g = build_level(m)
    return NodeFunction(m, np.ones(g.size), 0.0, BranchPath(1, 0, (1,) * (m - 1)))


# ---------------------------------------------------------------------------
# extension


@lru_cache(maxsize=None)
def _extension_tables(m: int):
    """Index arrays mapping level-m data onto level-(m+1) vertices.

    For each circle point p at level m the sandwich between 5p and 5p+5
    holds the new pair {5p+1, 5p+2} (nearer p) and {5p+3, 5p+4}.
    """
    g0 = build_level(m)
    g1 = build_level(m + 1)
    size = 2 * 5**m

    old_target = np.empty(g0.size, dtype=np.int64)
    for i, v in enumerate(g0.vertices):
        old_target[i] = g1.point_index[5 * v.n1]

    src_a = np.empty(size, dtype=np.int64)
    src_b = np.empty(size, dtype=np.int64)
    tgt_a = np.empty(size, dtype=np.int64)
    tgt_b = np.empty(size, dtype=np.int64)
    for p in range(1, size + 1):
        src_a[p - 1] = g0.point_index[p]
        src_b[p - 1] = g0.point_index[wrap_numerator(p + 1, m)]
        tgt_a[p - 1] = g1.point_index[wrap_numerator(5 * p + 1, m + 1)]
        tgt_b[p - 1] = g1.point_index[wrap_numerator(5 * p + 3, m + 1)]
    return old_target, src_a, src_b, tgt_a, tgt_b


def extend_values(values: np.ndarray, m: int, lam_next: float) -> np.ndarray:
    """Extension step on raw value arrays (level m -> m+1)."""
    if abs(1.0 - lam_next) < 1e-12 or abs(3.0 - lam_next) < 1e-12:
        raise ValueError(f"extension undefined at eigenvalue {lam_next}")
    old_target, src_a, src_b, tgt_a, tgt_b = _extension_tables(m)
    den = (1.0 - lam_next) * (3.0 - lam_next)
    out = np.empty(5 ** (m + 1))
    out[old_target] = values
    a_vals = values[src_a]
    b_vals = values[src_b]
    out[tgt_a] = ((2.0 - lam_next) * a_vals + b_vals) / den
    out[tgt_b] = (a_vals + (2.0 - lam_next) * b_vals) / den
    return out


def extend(u: NodeFunction, lam: float, i: int, g: LevelGraph | None = None) -> NodeFunction:
    """Extend a lambda-eigenfunction one level along inverse branch i."""
    if g is not None and g.m != u.m + 1:
        raise ValueError(f"target graph level {g.m} is not {u.m + 1}")
    lam_next = inverse_branch(i, lam)
    vals = extend_values(u.values, u.m, lam_next)
    path = u.path.extended(i) if u.path is not None else None
    return NodeFunction(u.m + 1, vals, lam_next, path)


def interpolation_deviation(u: NodeFunction, v: NodeFunction) -> float:
    """Max deviation of an extension from piecewise-linear interpolation.

    For eigenvalues of size 15^-m the extension is linear interpolation up
    to a correction shrinking by roughly 1/15 per level.
    """
    if v.m != u.m + 1:
        raise ValueError("second function must live one level deeper")
    _, src_a, src_b, tgt_a, tgt_b = _extension_tables(u.m)
    a_ref = (2.0 * u.values[src_a] + u.values[src_b]) / 3.0
    b_ref = (u.values[src_a] + 2.0 * u.values[src_b]) / 3.0
    dev_a = np.abs(v.values[tgt_a] - a_ref).max()
    dev_b = np.abs(v.values[tgt_b] - b_ref).max()
    return float(max(dev_a, dev_b))


# ---------------------------------------------------------------------------
# born eigenfunctions


def _alternating_function(g: LevelGraph, lo: int, hi: int) -> np.ndarray:
    """+1/-1 alternation over the new vertices with numerators in (lo, hi).

    lo and hi are multiples of 5 (endpoints of an identified arc), so the
    lead numerators of the new pairs inside are exactly those congruent to
    1 or 3 mod 5, an even count; the alternation starts at +1 next to lo.
    """
    vals = np.zeros(g.size)
    sign = 1.0
    for c in range(lo + 1, hi):
        if c % 5 in (1, 3):
            vals[g.point_index[c]] = sign
            sign = -sign
    return vals


def born_lambda3_basis(m: int) -> list[NodeFunction]:
    """The 5^(m-1)+1 eigenvalue-3 eigenfunctions born at level m.

    Two come from the origin pair (alternation over each half circle); the
    rest from the vertices that were new at levels j < m.
    """
    g = build_level(m)
    half = 5**m
    path = BranchPath(m, 3)
    fns = [
        NodeFunction(m, _alternating_function(g, 0, half), 3.0, path),
        NodeFunction(m, _alternating_function(g, half, 2 * half), 3.0, path),
    ]
    for j in range(1, m):
        scale = 5 ** (m - j)
        for v in build_level(j).vertices:
            if v.is_new:
                fns.append(NodeFunction(
                    m, _alternating_function(g, v.n1 * scale, v.n2 * scale), 3.0, path))
    return fns


def _lambda1_gap_basis(m: int) -> np.ndarray:
    """Nullspace basis of the eigenvalue-1 constraint system, one row per
    basis vector, one column per gap between consecutive old points."""
    n_gaps = 2 * 5 ** (m - 1)
    g = build_level(m)
    olds = [v for v in g.vertices if not v.is_new]
    cons = np.zeros((len(olds), n_gaps))
    for r, v in enumerate(olds):
        for point in (v.n1, v.n2):
            t = point // 5  # old point 5t sits between gaps t-1 and t
            cons[r, (t - 1) % n_gaps] += 1.0
            cons[r, t % n_gaps] += 1.0
    basis = nullspace_basis(cons)
    return _minimize_support(basis)


def born_lambda1_basis(m: int) -> list[NodeFunction]:
    """The 5^(m-1) eigenvalue-1 eigenfunctions born at level m: equal
    values on each sandwiched new pair, zero at old vertices."""
    g = build_level(m)
    path = BranchPath(m, 1)
    fns = []
    for row in _lambda1_gap_basis(m):
        vals = np.zeros(g.size)
        for t, s in enumerate(row):
            if s != 0.0:
                vals[g.point_index[5 * t + 1]] = s
                vals[g.point_index[5 * t + 3]] = s
        fns.append(NodeFunction(m, vals, 1.0, path))
    return fns


def _level1_lambda5() -> NodeFunction:
    # unique up to scale: 1 at the origin vertex, -1/4 at the four new ones
    g = build_level(1)
    vals = np.full(g.size, -0.25)
    vals[g.point_index[5]] = 1.0
    return NodeFunction(1, vals, 5.0, BranchPath(1, 5))


def _level1_basis() -> list[tuple[NodeFunction, EigenvalueRecord]]:
    out = [(NodeFunction(1, np.ones(5), 0.0, BranchPath(1, 0)),
            _make_record(BranchPath(1, 0), 0.0, 1))]
    for u in born_lambda1_basis(1):
        out.append((u, _make_record(u.path, 1.0, 1)))
    for u in born_lambda3_basis(1):
        out.append((u, _make_record(u.path, 3.0, 2)))
    five = _level1_lambda5()
    out.append((five, _make_record(five.path, 5.0, 1)))
    return out


def _make_record(path: BranchPath, value: float, mult: int) -> EigenvalueRecord:
    return EigenvalueRecord(path, value, 15.0**path.level * value, mult)


def full_eigenbasis(M: int, level_cap: int = DEFAULT_LEVEL_CAP
                    ) -> list[tuple[NodeFunction, EigenvalueRecord]]:
    """All 5^M eigenfunctions of -Delta_M with their eigenvalue records,
    sorted by eigenvalue (ties broken by symbolic path)."""
    if M < 1:
        raise ValueError(f"level must be >= 1, got {M}")
    if M > level_cap:
        raise ValueError(f"eigenbasis construction capped at level {level_cap}")
    basis = _level1_basis()
    for m in range(1, M):
        g_next = build_level(m + 1)
        nxt: list[tuple[NodeFunction, EigenvalueRecord]] = []
        for u, rec in basis:
            branches = (1, 3) if rec.value == 0.0 else (1, 2, 3)
            for i in branches:
                v = extend(u, rec.value, i, g_next)
                nxt.append((v, _make_record(v.path, v.eigenvalue, rec.multiplicity)))
        for u in born_lambda1_basis(m + 1):
            nxt.append((u, _make_record(u.path, 1.0, 5**m)))
        for u in born_lambda3_basis(m + 1):
            nxt.append((u, _make_record(u.path, 3.0, 5**m + 1)))
        basis = nxt
    indexed = list(enumerate(basis))
    indexed.sort(key=lambda t: (t[1][1].value, t[1][1].path.sort_key(), t[0]))
    return [pair for _, pair in indexed]


# ---------------------------------------------------------------------------
# symmetry


@dataclass(frozen=True)
class SymmetryType:
    """Signs under the two reflection involutions; 0 marks a mixed state
    that must be symmetrized before classification."""

    sign_v: int
    sign_h: int

    def __str__(self) -> str:
        mark = {1: "+", -1: "-", 0: "?"}
        return f"({mark[self.sign_v]} {mark[self.sign_h]})"


@lru_cache(maxsize=None)
def reflection_permutations(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Vertex permutations for t -> 1-t and t -> 1/2-t (both preserve the
    gluing; which is called vertical is a labelling choice)."""
    g = build_level(m)
    perm_v = vertex_permutation(g, reflect_numerator)
    perm_h = vertex_permutation(g, half_reflect_numerator)
    return perm_v, perm_h


def _reflection_sign(values: np.ndarray, perm: np.ndarray, tol: float) -> int:
    scale = np.abs(values).max()
    if scale == 0.0:
        return 1
    reflected = values[perm]
    if np.abs(reflected - values).max() <= tol * scale:
        return 1
    if np.abs(reflected + values).max() <= tol * scale:
        return -1
    return 0


def symmetry_type(u: NodeFunction, tol: float = 1e-9) -> SymmetryType:
    perm_v, perm_h = reflection_permutations(u.m)
    return SymmetryType(_reflection_sign(u.values, perm_v, tol),
                        _reflection_sign(u.values, perm_h, tol))


def symmetrize(u: NodeFunction, sign_v: int, sign_h: int) -> NodeFunction:
    """Project onto the (sign_v, sign_h) symmetry component."""
    perm_v, perm_h = reflection_permutations(u.m)
    v = u.values
    proj = (v + sign_v * v[perm_v] + sign_h * v[perm_h]
            + sign_v * sign_h * v[perm_v][perm_h]) / 4.0
    return NodeFunction(u.m, proj, u.eigenvalue, u.path)


def symmetry_dimensions(M: int, level_cap: int = DEFAULT_LEVEL_CAP) -> dict[tuple[int, int], int]:
    """Dimension of each symmetry type across the whole eigenbasis."""
    basis = full_eigenbasis(M, level_cap)
    dims = {}
    for sv, sh in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        rows = []
        for u, _ in basis:
            p = symmetrize(u, sv, sh).values
            scale = np.abs(p).max()
            if scale > 1e-12 * max(1.0, np.abs(u.values).max()):
                rows.append(p / scale)
        dims[(sv, sh)] = elimination_rank(np.array(rows)) if rows else 0
    return dims


# ---------------------------------------------------------------------------
# miniaturization and limit snapshots


def _shifted_path(path: BranchPath) -> BranchPath:
    """Path of the miniaturized eigenfunction (one level deeper, same
    graph eigenvalue, normalized eigenvalue multiplied by 15)."""
    if path.seed in (1, 3):
        return BranchPath(path.birth + 1, path.seed, path.branches)
    if path.seed == 0:
        return BranchPath(1, 0, (1,) + path.branches)
    return BranchPath(1, 0, (3,) + path.branches)  # seed 5 = branch 3 off zero


def miniaturize(u: NodeFunction) -> NodeFunction:
    """Compose with t -> 5t: an eigenfunction one level deeper with the
    same graph eigenvalue."""
    g1 = build_level(u.m + 1)
    g0 = build_level(u.m)
    vals = np.empty(g1.size)
    for i, v in enumerate(g1.vertices):
        vals[i] = u.values[g0.point_index[wrap_numerator(v.n1, u.m)]]
    path = _shifted_path(u.path) if u.path is not None else None
    return NodeFunction(u.m + 1, vals, u.eigenvalue, path)


def born_family(path: BranchPath) -> list[NodeFunction]:
    """The born eigenfunctions at a path's birth level."""
    if path.seed == 0:
        return [NodeFunction(1, np.ones(5), 0.0, BranchPath(1, 0))]
    if path.seed == 5:
        return [_level1_lambda5()]
    if path.seed == 1:
        return born_lambda1_basis(path.birth)
    return born_lambda3_basis(path.birth)


def limit_eigenfunction(path: BranchPath, resolution: int, member: int = 0) -> NodeFunction:
    """Level-``resolution`` snapshot of the limit eigenfunction along a
    path, continued past its explicit branches by the first inverse branch."""
    if resolution < path.birth:
        raise ValueError(f"resolution {resolution} precedes birth level {path.birth}")
    family = born_family(path)
    u = family[member].copy()
    lam = float(path.seed)
    for level in range(path.birth, resolution):
        step = level - path.birth
        b = path.branches[step] if step < len(path.branches) else 1
        u = extend(u, lam, b, build_level(level + 1))
        lam = u.eigenvalue
    return u


# ---------------------------------------------------------------------------
# linear algebra helpers (elimination with explicit pivot threshold)


def elimination_rank(mat: np.ndarray, rel_tol: float = _PIVOT_REL_TOL) -> int:
    """Rank by Gaussian elimination with partial pivoting; pivots below
    rel_tol times the largest original entry count as zero."""
    a = np.array(mat, dtype=float)
    if a.size == 0:
        return 0
    tol = rel_tol * max(1e-300, np.abs(a).max())
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        piv = rank + int(np.argmax(np.abs(a[rank:, c])))
        if abs(a[piv, c]) <= tol:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank + 1:] -= np.outer(a[rank + 1:, c] / a[rank, c], a[rank])
        rank += 1
    return rank


def nullspace_basis(mat: np.ndarray, rel_tol: float = _PIVOT_REL_TOL) -> np.ndarray:
    """Free-variable nullspace basis from the reduced row echelon form."""
    a = np.array(mat, dtype=float)
    rows, cols = a.shape
    tol = rel_tol * max(1e-300, np.abs(a).max())
    pivot_cols: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[piv, c]) <= tol:
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r] /= a[r, c]
        others = np.arange(rows) != r
        a[others] -= np.outer(a[others, c], a[r])
        pivot_cols.append(c)
        r += 1
    free_cols = [c for c in range(cols) if c not in pivot_cols]
    basis = np.zeros((len(free_cols), cols))
    for k, f in enumerate(free_cols):
        basis[k, f] = 1.0
        for r_idx, c in enumerate(pivot_cols):
            basis[k, c] = -a[r_idx, f]
    basis[np.abs(basis) < 1e-12] = 0.0
    return basis


def _minimize_support(basis: np.ndarray, passes: int = 4) -> np.ndarray:
    """Greedy support reduction: subtract multiples of other basis vectors
    whenever that strictly shrinks a vector's support. Span-preserving."""
    basis = basis.copy()
    n = len(basis)
    for _ in range(passes):
        improved = False
        for i in range(n):
            supp_i = np.count_nonzero(basis[i])
            for j in range(n):
                if i == j:
                    continue
                shared = np.nonzero(basis[j])[0]
                shared = shared[basis[i][shared] != 0.0]
                if len(shared) == 0:
                    continue
                k = shared[np.argmax(np.abs(basis[j][shared]))]
                cand = basis[i] - (basis[i][k] / basis[j][k]) * basis[j]
                cand[np.abs(cand) < 1e-12] = 0.0
                if np.count_nonzero(cand) < supp_i:
                    basis[i] = cand
                    supp_i = np.count_nonzero(cand)
                    improved = True
        if not improved:
            break
    return basis
