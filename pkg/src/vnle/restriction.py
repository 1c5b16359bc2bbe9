"""Restrictions of eigenfunctions to the central circle.

The central circle of the fractal is a Cantor set in the parameter circle:
start from [0, 1/2], delete the open arcs (1/10, 2/10) and (3/10, 4/10)
whose endpoints are glued, and iterate inside the three kept fifths. A
triadic parameter t in [0, 1] indexes the kept structure: the base-3
digits d_1 d_2 ... of t select the kept subinterval at each stage, giving
the circle position x = sum d_i 5^-i. Vertices of the level-m graph on the
circle correspond to t = k/3^m in consecutive order (k = 0 and k = 3^m both
give the origin vertex).

The eigenfunction extension transcribes verbatim to these values: old
points t = 3j/3^(m+1) are copied, and the two new values between f(j/3^m)
and f((j+1)/3^m) follow the same sandwich formulas. Difference quotients
D_m f(j/3^m) = 3^m (f((j+1)/3^m) - f(j/3^m)) then satisfy a three-case
recurrence whose iteration yields convergent candidate derivatives:
midpoint candidates a_{m+1} D_m f at half-integer triadic points and
one-sided candidates built from the b-products at triadic points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circlegraph import CirclePoint, build_level
from .decimation import BranchPath, inverse_branch
from .eigenbasis import NodeFunction, limit_eigenfunction

_TERM_TOL = 1e-16
_MAX_PRODUCT_TERMS = 500


@dataclass(frozen=True)
class TriadicPoint:
    """Exact triadic point k/3^m with 0 <= k <= 3^m; (k, m) equals (3k, m+1)."""

    k: int
    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"negative level {self.m}")
        if not 0 <= self.k <= 3**self.m:
            raise ValueError(f"numerator {self.k} out of range at level {self.m}")

    def reduced(self) -> tuple[int, int]:
        k, m = self.k, self.m
        while m > 0 and k % 3 == 0:
            k //= 3
            m -= 1
        return k, m

    def value(self) -> float:
        return self.k / 3**self.m

    def __eq__(self, other) -> bool:
        if not isinstance(other, TriadicPoint):
            return NotImplemented
        return self.reduced() == other.reduced()

    def __hash__(self) -> int:
        return hash(self.reduced())


def t_to_circle(t: TriadicPoint) -> CirclePoint:
    """Circle position of a triadic point: digit d_i contributes d_i*5^-i.

    The right endpoint t = 1 maps to 1/2 and t = 0 to the point 0 = 1;
    these are the two members of the origin vertex.
    """
    k, m = t.k, t.m
    if m == 0:
        return CirclePoint(2, 0) if k == 0 else CirclePoint(1, 0)
    if k == 3**m:
        return CirclePoint(5**m, m)
    n = 0
    for i in range(1, m + 1):
        n += 2 * ((k // 3 ** (m - i)) % 3) * 5 ** (m - i)
    return CirclePoint(n if n else 2 * 5**m, m)


@dataclass
class RestrictionFn:
    """Values of an eigenfunction at the triadic points of one level.

    ``values`` has length 3^m + 1 with equal endpoints (both are the origin
    vertex). ``eigenvalue`` is the graph eigenvalue at this level; ``path``
    records the symbolic identity when known, which fixes the eigenvalue
    sequence used by the derivative formulas.
    """

    m: int
    values: np.ndarray
    eigenvalue: float | None = None
    path: BranchPath | None = None

    def value_at(self, j: int, level: int) -> float:
        """f(j/3^level) for level <= m, j indexed modulo the circle."""
        stride = 3 ** (self.m - level)
        return float(self.values[(j % 3**level) * stride])


def restrict(u: NodeFunction) -> RestrictionFn:
    """Sample a vertex function at the central-circle triadic points."""
    g = build_level(u.m)
    count = 3**u.m
    vals = np.empty(count + 1)
    for k in range(count + 1):
        vals[k] = u.values[g.point_index[t_to_circle(TriadicPoint(k, u.m)).n]]
    return RestrictionFn(u.m, vals, u.eigenvalue, u.path)


def extend_restriction(f: RestrictionFn, lam_next: float,
                       branch: int | None = None) -> RestrictionFn:
    """One extension step on triadic values (level m -> m+1).

    Old points k = 3j are copied; the two new values in each gap follow the
    sandwich formulas with flanking values f(j/3^m), f((j+1)/3^m). When the
    branch index is supplied the symbolic path is carried along.
    """
    if abs(1.0 - lam_next) < 1e-12 or abs(3.0 - lam_next) < 1e-12:
        raise ValueError(f"extension undefined at eigenvalue {lam_next}")
    den = (1.0 - lam_next) * (3.0 - lam_next)
    f0 = f.values[:-1]
    f1 = f.values[1:]
    out = np.empty(3 * (len(f.values) - 1) + 1)
    out[0::3] = f.values
    out[1::3] = ((2.0 - lam_next) * f0 + f1) / den
    out[2::3] = (f0 + (2.0 - lam_next) * f1) / den
    path = None
    if branch is not None and f.path is not None:
        path = f.path.extended(branch)
        check = inverse_branch(branch, f.eigenvalue)
        if abs(check - lam_next) > 1e-9 * max(1.0, abs(check)):
            raise ValueError(f"eigenvalue {lam_next} is not branch {branch} "
                             f"of {f.eigenvalue}")
    return RestrictionFn(f.m + 1, out, lam_next, path)


def restriction_along_path(path: BranchPath, depth: int, member: int = 0,
                           base_level: int | None = None) -> RestrictionFn:
    """Restriction of a path's eigenfunction, extended to triadic depth.

    The eigenfunction is built on the graph at ``base_level`` (default: the
    path's own level) and from there extended purely on the triadic side.
    """
    base = path.level if base_level is None else base_level
    if base < path.birth:
        raise ValueError(f"base level {base} precedes birth level {path.birth}")
    if depth < base:
        raise ValueError(f"depth {depth} below base level {base}")
    f = restrict(limit_eigenfunction(path, base, member))
    lam = f.eigenvalue
    for level in range(base, depth):
        step = level - path.birth
        b = path.branches[step] if step < len(path.branches) else 1
        lam = inverse_branch(b, lam)
        f = extend_restriction(f, lam, branch=b)
    return f


# ---------------------------------------------------------------------------
# difference quotients and Lipschitz diagnostics


def difference(f: RestrictionFn, m: int) -> np.ndarray:
    """D_m f(j/3^m) = 3^m (f((j+1)/3^m) - f(j/3^m)) for j = 0 .. 3^m - 1."""
    if m > f.m:
        raise ValueError(f"difference level {m} exceeds restriction level {f.m}")
    stride = 3 ** (f.m - m)
    coarse = f.values[::stride]
    return 3.0**m * np.diff(coarse)


@dataclass(frozen=True)
class LipschitzReport:
    path: BranchPath
    member: int
    levels: tuple[int, ...]
    sup_diff: tuple[float, ...]
    eigenvalues: tuple[float, ...]

    @property
    def bound(self) -> float:
        return max(self.sup_diff)

    @property
    def increments(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.sup_diff, self.sup_diff[1:]))


def lipschitz_diagnostic(path: BranchPath, depth: int, member: int = 0,
                         base_level: int | None = None) -> LipschitzReport:
    """Track sup_j |D_m f| for m up to ``depth`` along a path's restriction.

    For eventually-first-branch paths the sups stay bounded: the new-point
    case multiplies by 1/(1 - lambda/3) -> 1 and the old-point correction
    term 3^(m+1) lambda/(1 - lambda) decays like 5^-m.
    """
    base = path.level if base_level is None else base_level
    f = restriction_along_path(path, base, member, base_level=base)
    levels, sups, lams = [], [], []
    lam = f.eigenvalue
    for m in range(base, depth + 1):
        levels.append(m)
        sups.append(float(np.abs(difference(f, m)).max()))
        lams.append(lam)
        if m < depth:
            step = m - path.birth
            b = path.branches[step] if step < len(path.branches) else 1
            lam = inverse_branch(b, lam)
            f = extend_restriction(f, lam, branch=b)
    return LipschitzReport(path, member, tuple(levels), tuple(sups), tuple(lams))


# ---------------------------------------------------------------------------
# derivative candidates


def _eigenvalue_tail(path: BranchPath, start: int, count: int) -> np.ndarray:
    if start < path.birth:
        raise ValueError(f"level {start} precedes birth level {path.birth}")
    return path.eigenvalue_sequence(start, count)


def _converged_tail(path: BranchPath, start: int, extra_terms: int) -> np.ndarray:
    """Eigenvalues lambda_start, lambda_start+1, ... long enough that the
    remaining product/sum terms fall below the truncation threshold."""
    lams = []
    lam = path.value_at(start)
    countdown = extra_terms
    for _ in range(_MAX_PRODUCT_TERMS):
        lams.append(lam)
        if abs(lam) < 3.0 * _TERM_TOL:
            if countdown == 0:
                return np.array(lams)
            countdown -= 1
        step = start + len(lams) - 1 - path.birth
        b = path.branches[step] if step < len(path.branches) else 1
        lam = inverse_branch(b, lam)
    raise ArithmeticError(f"eigenvalue tail of {path} did not decay; "
                          "path is not eventually first-branch")


def a_coeff(m: int, path: BranchPath, extra_terms: int = 0) -> float:
    """Product over k >= m of 1/(1 - lambda_k/3), truncated once the terms
    are within 1e-16 of 1."""
    prod = 1.0
    for lam in _converged_tail(path, m, extra_terms):
        term = 1.0 - lam / 3.0
        if term == 0.0:
            raise ValueError(f"product diverges: eigenvalue 3 at or after level {m}")
        prod /= term
    return prod


def b_coeff(m: int, path: BranchPath, extra_terms: int = 0) -> float:
    """Product over k >= m of 1/((1 - lambda_k)(1 - lambda_k/3))."""
    prod = 1.0
    for lam in _converged_tail(path, m, extra_terms):
        term = (1.0 - lam) * (1.0 - lam / 3.0)
        if term == 0.0:
            raise ValueError(f"product diverges: eigenvalue 1 or 3 at or after level {m}")
        prod /= term
    return prod


def midpoint_derivative(f: RestrictionFn, j: int, m: int) -> float:
    """Candidate derivative at (j + 1/2)/3^m: a_{m+1} * D_m f(j/3^m).

    Obtained by iterating the middle case of the difference recurrence,
    which only rescales D along the triadic points converging to the
    midpoint from the left.
    """
    if f.path is None:
        raise ValueError("restriction carries no symbolic path")
    d = difference(f, m)[j % 3**m]
    return a_coeff(m + 1, f.path) * float(d)


@dataclass(frozen=True)
class OneSidedDerivatives:
    right: float
    left: float

    @property
    def gap(self) -> float:
        return self.right - self.left


def _correction_sum(m: int, path: BranchPath) -> float:
    """Sum over k >= 1 of 3^(m+k) lambda_(m+k) (1 - lambda_(m+k)/3) b_(m+k),
    truncated when the terms drop below 1e-16 of the running scale."""
    total = 0.0
    k = 1
    while k <= _MAX_PRODUCT_TERMS:
        lam = path.value_at(m + k)
        term = 3.0 ** (m + k) * lam * (1.0 - lam / 3.0) * b_coeff(m + k, path)
        total += term
        if abs(term) < _TERM_TOL * max(1.0, abs(total)):
            return total
        k += 1
    raise ArithmeticError("one-sided correction sum did not converge")


def one_sided_derivatives(f: RestrictionFn, j: int, m: int) -> OneSidedDerivatives:
    """Candidate one-sided derivatives at the triadic point j/3^m.

    Iterating the first case of the difference recurrence gives the right
    candidate b_{m+1} D_m f(j/3^m) + S f(j/3^m); the third case gives the
    left candidate b_{m+1} D_m f((j-1)/3^m) - S f(j/3^m), with S the
    correction sum. No equality between the two is asserted anywhere.
    """
    if f.path is None:
        raise ValueError("restriction carries no symbolic path")
    d = difference(f, m)
    b1 = b_coeff(m + 1, f.path)
    s = _correction_sum(m, f.path)
    fx = f.value_at(j, m)
    right = b1 * float(d[j % 3**m]) + s * fx
    left = b1 * float(d[(j - 1) % 3**m]) - s * fx
    return OneSidedDerivatives(right, left)
