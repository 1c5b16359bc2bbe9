"""Spectral decimation for the level-graph Laplacians.

The spectra of -Delta_m are generated recursively. Level 1 is
{0, 1, 3, 3, 5}. Passing from level m to m+1, every eigenvalue lambda
spawns the three preimages of the cubic R(x) = x(3-x)(5-x) (only the first
and third branch when lambda = 0), and fresh eigenvalues are born: 1 with
multiplicity 5^m and 3 with multiplicity 5^m + 1. Each eigenvalue is
tracked symbolically by its birth level, seed and branch choices, so that
float coincidences never corrupt multiplicities.

Normalized eigenvalues carry the factor 15^m; for a fixed spectral index
they increase to a finite limit as m grows, which `limit_eigenvalue`
computes by iterating the first inverse branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# critical points of R(x) = x(3-x)(5-x) = 15x - 8x^2 + x^3
BRANCH_SPLIT_LO = (16.0 - math.sqrt(76.0)) / 6.0
BRANCH_SPLIT_HI = (16.0 + math.sqrt(76.0)) / 6.0
# largest value with three real preimages
LAMBDA_DOMAIN_MAX = BRANCH_SPLIT_LO * (3.0 - BRANCH_SPLIT_LO) * (5.0 - BRANCH_SPLIT_LO)
# supremum of all graph eigenvalues: the upper fixed point x^2 - 8x + 14 = 0
SPECTRUM_SUP = 4.0 + math.sqrt(2.0)

# eigenvalue growth exponent: the k-th eigenvalue grows like k**WEYL_ALPHA
WEYL_ALPHA = math.log(15.0) / math.log(5.0)
# counting-function growth exponent: N(t) grows like t**COUNTING_EXPONENT
# (N(15 t) ~ 5 N(t) forces 15**e = 5, the reciprocal of WEYL_ALPHA)
COUNTING_EXPONENT = math.log(5.0) / math.log(15.0)

_RESIDUAL_TOL = 1e-12


def renorm_poly(x: float) -> float:
    """The decimation cubic R(x) = x(3-x)(5-x)."""
    return x * (3.0 - x) * (5.0 - x)


def renorm_poly_deriv(x: float) -> float:
    return 15.0 - 16.0 * x + 3.0 * x * x


def _cubic_roots(lam: float) -> list[float]:
    """All three real roots of R(x) = lam, ascending (trig closed form)."""
    # depress x^3 - 8x^2 + 15x - lam via x = y + 8/3
    p = -19.0 / 3.0
    q = 56.0 / 27.0 - lam
    rr = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * rr)
    arg = min(1.0, max(-1.0, arg))
    theta = math.acos(arg) / 3.0
    roots = [rr * math.cos(theta - 2.0 * math.pi * k / 3.0) + 8.0 / 3.0 for k in range(3)]
    roots.sort()
    return roots


_BRANCH_BRACKETS = {
    1: (0.0, BRANCH_SPLIT_LO),
    2: (BRANCH_SPLIT_LO, BRANCH_SPLIT_HI),
    3: (BRANCH_SPLIT_HI, 7.0),  # R(7) = 56 > local max, safe upper bracket
}


def _bisect_branch(i: int, lam: float) -> float:
    lo, hi = _BRANCH_BRACKETS[i]
    f_lo = renorm_poly(lo) - lam
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = renorm_poly(mid) - lam
        if (f_mid <= 0.0) == (f_lo <= 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def inverse_branch(i: int, lam: float) -> float:
    """The i-th smallest real solution of R(x) = lam.

    Branches 1 and 3 are increasing, branch 2 decreasing. Closed-form roots
    are polished by Newton; the result is gated on the residual
    |R(x) - lam| <= 1e-12 * max(1, lam), with a bisection fallback.
    """
    if i not in (1, 2, 3):
        raise ValueError(f"branch index must be 1, 2 or 3, got {i}")
    if lam < 0.0 or lam > LAMBDA_DOMAIN_MAX:
        raise ValueError(f"value {lam} outside [0, {LAMBDA_DOMAIN_MAX}]: "
                         "no three real preimages")
    if lam == 0.0:
        return (0.0, 3.0, 5.0)[i - 1]

    x = _cubic_roots(lam)[i - 1]
    for _ in range(4):
        d = renorm_poly_deriv(x)
        if d == 0.0:
            break
        step = (renorm_poly(x) - lam) / d
        x -= step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break

    tol = _RESIDUAL_TOL * max(1.0, abs(lam))
    if abs(renorm_poly(x) - lam) > tol:
        x = _bisect_branch(i, lam)
        x -= (renorm_poly(x) - lam) / renorm_poly_deriv(x)
        if abs(renorm_poly(x) - lam) > tol:
            raise ArithmeticError(f"inverse branch {i} failed residual gate at {lam}")
    return x


def phi1_derivative_at_zero() -> float:
    """Slope of the first inverse branch at 0 (reciprocal of R'(0) = 15)."""
    return 1.0 / 15.0


# ---------------------------------------------------------------------------
# symbolic eigenvalue records


@dataclass(frozen=True)
class BranchPath:
    """Symbolic identity of an eigenvalue.

    ``birth`` is the level where the eigenvalue is born with value ``seed``
    (0, 1, 3 or 5 at birth level 1; 1 or 3 later). ``branches`` lists the
    inverse-branch choices applied at levels birth+1, birth+2, ... While the
    running value is exactly 0 (seed 0 continued by branch 1) the middle
    branch is forbidden, since its image 3 duplicates a born eigenvalue.
    """

    birth: int
    seed: int
    branches: tuple[int, ...] = ()

    def __post_init__(self):
        if self.birth < 1:
            raise ValueError(f"birth level must be >= 1, got {self.birth}")
        allowed = (0, 1, 3, 5) if self.birth == 1 else (1, 3)
        if self.seed not in allowed:
            raise ValueError(f"seed {self.seed} invalid at birth level {self.birth}")
        at_zero = self.seed == 0
        for b in self.branches:
            if b not in (1, 2, 3):
                raise ValueError(f"branch index must be 1, 2 or 3, got {b}")
            if at_zero and b == 2:
                raise ValueError("middle branch is not allowed while the value is 0")
            at_zero = at_zero and b == 1

    @property
    def level(self) -> int:
        return self.birth + len(self.branches)

    @property
    def multiplicity(self) -> int:
        if self.seed == 1:
            return 5 ** (self.birth - 1)
        if self.seed == 3:
            return 5 ** (self.birth - 1) + 1
        return 1  # seeds 0 and 5, birth level 1 only

    def extended(self, branch: int) -> "BranchPath":
        return BranchPath(self.birth, self.seed, self.branches + (branch,))

    def value(self) -> float:
        """Graph eigenvalue at this path's own level."""
        return self.value_at(self.level)

    def value_at(self, level: int) -> float:
        """Graph eigenvalue at ``level`` >= birth; branch 1 continues past
        the explicit choices (the only continuation with a finite limit)."""
        if level < self.birth:
            raise ValueError(f"level {level} precedes birth level {self.birth}")
        lam = float(self.seed)
        for step in range(level - self.birth):
            b = self.branches[step] if step < len(self.branches) else 1
            lam = inverse_branch(b, lam)
        return lam

    def eigenvalue_sequence(self, start: int, count: int) -> np.ndarray:
        """Graph eigenvalues at levels start, ..., start+count-1."""
        lam = self.value_at(start)
        out = np.empty(count)
        for k in range(count):
            out[k] = lam
            step = start + k - self.birth
            b = self.branches[step] if step < len(self.branches) else 1
            lam = inverse_branch(b, lam)
        return out

    def sort_key(self) -> tuple:
        return (self.birth, self.seed, self.branches)

    def __str__(self) -> str:
        if not self.branches:
            return f"{self.seed}@{self.birth}"
        return f"{self.seed}@{self.birth}:" + ",".join(str(b) for b in self.branches)


def parse_branch_path(text: str) -> BranchPath:
    """Parse the grammar ``seed@birth[:i,i,...]``, e.g. ``3@2:1,1,1``."""
    try:
        head, _, tail = text.partition(":")
        seed_s, _, birth_s = head.partition("@")
        seed, birth = int(seed_s), int(birth_s)
        branches = tuple(int(b) for b in tail.split(",")) if tail else ()
        return BranchPath(birth, seed, branches)
    except ValueError as exc:
        raise ValueError(f"bad branch path {text!r}: {exc}") from exc


@dataclass(frozen=True)
class EigenvalueRecord:
    path: BranchPath
    value: float
    normalized: float
    multiplicity: int

    @property
    def last_branch(self) -> int | None:
        """Branch producing this record at its level (None for born records)."""
        return self.path.branches[-1] if self.path.branches else None


@dataclass(frozen=True)
class Spectrum:
    """All eigenvalues of -Delta_M with exact symbolic multiplicities."""

    level: int
    records: tuple[EigenvalueRecord, ...]

    @property
    def total_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.records)

    def expanded(self, normalized: bool = False) -> np.ndarray:
        """Sorted eigenvalues repeated according to multiplicity."""
        vals = [r.normalized if normalized else r.value for r in self.records]
        mults = [r.multiplicity for r in self.records]
        return np.repeat(np.array(vals), mults)

    def aggregated(self, tol: float = 1e-9, normalized: bool = False) -> list[tuple[float, int]]:
        """(value, multiplicity) clusters, merging values within tol."""
        out: list[tuple[float, int]] = []
        for r in self.records:
            v = r.normalized if normalized else r.value
            if out and abs(v - out[-1][0]) <= tol:
                out[-1] = (out[-1][0], out[-1][1] + r.multiplicity)
            else:
                out.append((v, r.multiplicity))
        return out

    def multiplicity_of(self, value: float, tol: float = 1e-9) -> int:
        return sum(mult for v, mult in self.aggregated(tol) if abs(v - value) <= tol)


def _record(path: BranchPath, value: float, level: int, mult: int) -> EigenvalueRecord:
    return EigenvalueRecord(path, value, 15.0**level * value, mult)


@lru_cache(maxsize=None)
def level_spectrum(M: int) -> Spectrum:
    """Generate the full spectrum of -Delta_M by decimation."""
    if M < 1:
        raise ValueError(f"level must be >= 1, got {M}")
    records = [
        (BranchPath(1, 0), 0.0, 1),
        (BranchPath(1, 1), 1.0, 1),
        (BranchPath(1, 3), 3.0, 2),
        (BranchPath(1, 5), 5.0, 1),
    ]
    for m in range(1, M):
        nxt = []
        for path, lam, mult in records:
            branches = (1, 3) if lam == 0.0 else (1, 2, 3)
            for b in branches:
                nxt.append((path.extended(b), inverse_branch(b, lam), mult))
        nxt.append((BranchPath(m + 1, 1), 1.0, 5**m))
        nxt.append((BranchPath(m + 1, 3), 3.0, 5**m + 1))
        records = nxt

    records.sort(key=lambda t: (t[1], t[0].sort_key()))
    recs = tuple(_record(p, v, M, mult) for p, v, mult in records)
    return Spectrum(M, recs)


def limit_eigenvalue(path: BranchPath, rel_tol: float = 1e-14, max_iter: int = 400) -> float:
    """Limit of 15^m * lambda_m along the path continued by branch 1.

    The normalized values increase; iteration stops once the multiplicative
    update 15*phi_1(lam)/lam falls within rel_tol of 1.
    """
    lam = path.value()
    if lam == 0.0:
        return 0.0
    norm = 15.0 ** path.level * lam
    for _ in range(max_iter):
        nxt = inverse_branch(1, lam)
        ratio = 15.0 * nxt / lam
        norm *= ratio
        lam = nxt
        if abs(ratio - 1.0) < rel_tol:
            return norm
    raise ArithmeticError(f"normalized eigenvalue did not stabilize for {path}")


# ---------------------------------------------------------------------------
# counting function and Weyl ratio


def counting_function(spectrum: Spectrum, t: float, normalized: bool = True) -> int:
    """N(t): eigenvalues <= t counted with multiplicity (right-continuous)."""
    if t < 0:
        return 0
    vals = spectrum.expanded(normalized=normalized)
    return int(np.searchsorted(vals, t, side="right"))


def weyl_ratio(spectrum: Spectrum, t: float, normalized: bool = True,
               alpha: float = WEYL_ALPHA) -> float:
    """W(t) = N(t) / t^alpha for t > 0.

    The default exponent is the eigenvalue growth exponent log15/log5.
    With ``alpha=COUNTING_EXPONENT`` (its reciprocal) the ratio is bounded
    above and away from zero and oscillates log-periodically.
    """
    if t <= 0:
        raise ValueError(f"Weyl ratio needs t > 0, got {t}")
    return counting_function(spectrum, t, normalized) / t**alpha


def weyl_samples(spectrum: Spectrum, normalized: bool = True, grid_points: int = 0,
                 alpha: float = WEYL_ALPHA) -> np.ndarray:
    """(t, N(t), W(t)) sampled at both sides of every jump plus an optional
    geometric grid; N is a step function, so the jumps carry the shape."""
    vals = spectrum.expanded(normalized=normalized)
    pos = np.unique(vals[vals > 0])
    ts = [pos * (1.0 - 1e-12), pos]
    if grid_points:
        ts.append(np.geomspace(pos[0], pos[-1], grid_points))
    t = np.unique(np.concatenate(ts))
    n = np.searchsorted(vals, t, side="right").astype(float)
    w = n / t**alpha
    return np.column_stack([t, n, w])


def counting_slope(spectrum: Spectrum, lo: float, hi: float,
                   normalized: bool = True) -> float:
    """Least-squares slope of log N(t) against log t over [lo, hi],
    sampled at the eigenvalue jump points inside the window."""
    vals = spectrum.expanded(normalized=normalized)
    pos = np.unique(vals[(vals >= lo) & (vals <= hi) & (vals > 0)])
    if len(pos) < 2:
        raise ValueError("window contains fewer than two eigenvalues")
    n = np.searchsorted(vals, pos, side="right").astype(float)
    slope, _ = np.polyfit(np.log(pos), np.log(n), 1)
    return float(slope)
