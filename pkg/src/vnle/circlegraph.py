"""Level graphs of the loop-closed Vicsek fractal.

The fractal is parametrized by the unit circle. At level m the relevant
points are n/(2*5^m) for 1 <= n <= 2*5^m, glued in pairs: writing
n = 5^k*(a + 5j) with a in {1,2,3,4} (5^k the exact power of 5 dividing n),
the partner swaps a within {1,2} or {3,4}. Each glued pair is one vertex of
the graph K_m; edges are the 2*5^m unit arcs between consecutive circle
points. Every vertex therefore has exactly four edge slots, two of which
are self-loops at "new" vertices (pairs with k = 0, i.e. consecutive
numerators).

All arithmetic on circle points is exact integer arithmetic; floats enter
only when a Laplacian or a vertex function is evaluated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def _check_level(m: int) -> None:
    # the level-0 graph is never defined; everything starts at m = 1
    if m < 1:
        raise ValueError(f"level must be >= 1, got {m}")


def circle_size(m: int) -> int:
    """Number of circle points at level m (2*5^m)."""
    _check_level(m)
    return 2 * 5**m


def wrap_numerator(n: int, m: int) -> int:
    """Reduce n modulo the circle so the result lies in [1, 2*5^m]."""
    size = 2 * 5**m
    n = n % size
    return size if n == 0 else n


@dataclass(frozen=True)
class CirclePoint:
    """Exact circle point n/(2*5^m), with 0 identified to 1.

    Equality is equality of reduced fractions, so (n, m) and (5n, m+1)
    compare equal.
    """

    n: int
    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"negative level {self.m}")
        if not 1 <= self.n <= 2 * 5**self.m:
            raise ValueError(f"numerator {self.n} out of range at level {self.m}")

    def reduced(self) -> tuple[int, int]:
        n, m = self.n, self.m
        while m > 0 and n % 5 == 0:
            n //= 5
            m -= 1
        return n, m

    def lift(self, m: int) -> "CirclePoint":
        """The same point expressed at a finer level m >= self.m."""
        if m < self.m:
            raise ValueError("cannot lift to a coarser level")
        return CirclePoint(self.n * 5 ** (m - self.m), m)

    def value(self) -> float:
        return self.n / (2 * 5**self.m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CirclePoint):
            return NotImplemented
        return self.reduced() == other.reduced()

    def __hash__(self) -> int:
        return hash(self.reduced())


def partner_numerator(n: int, m: int) -> int:
    """Numerator of the point glued to n/(2*5^m)."""
    if not 1 <= n <= 2 * 5**m:
        raise ValueError(f"numerator {n} out of range at level {m}")
    k = 0
    q = n
    while q % 5 == 0:
        q //= 5
        k += 1
    a = q % 5  # in {1,2,3,4}: q is not divisible by 5
    if a in (1, 3):
        q += 1
    else:
        q -= 1
    return q * 5**k


@dataclass(frozen=True)
class Vertex:
    """A glued pair of circle points at a common level.

    ``n1 < n2`` are the two numerators; n1 is the canonical representative.
    A vertex is *new* at level m when its numerators are not divisible by 5
    (it has no counterpart in K_{m-1}); otherwise it is *old*.
    """

    n1: int
    n2: int
    m: int

    @property
    def canonical(self) -> int:
        return self.n1

    @property
    def is_new(self) -> bool:
        return self.n1 % 5 != 0

    @property
    def points(self) -> tuple[CirclePoint, CirclePoint]:
        return CirclePoint(self.n1, self.m), CirclePoint(self.n2, self.m)


def canonical_vertex(n: int, m: int) -> Vertex:
    """The vertex containing the circle point n/(2*5^m)."""
    _check_level(m)
    p = partner_numerator(n, m)
    return Vertex(min(n, p), max(n, p), m)


@dataclass(frozen=True)
class LevelGraph:
    """The graph K_m: 5^m vertices, four adjacency slots each.

    ``adjacency[i]`` lists the vertex indices reached by the four arcs at
    vertex i, in slot order (n1-1, n1+1, n2-1, n2+1); self-loop slots repeat
    the vertex's own index. ``point_index`` maps every numerator in
    [1, 2*5^m] to its vertex index. Instances are immutable after build.
    """

    m: int
    vertices: tuple[Vertex, ...]
    adjacency: np.ndarray
    point_index: dict[int, int]

    @property
    def size(self) -> int:
        return len(self.vertices)

    def index_of_point(self, p: CirclePoint) -> int:
        q = p.lift(self.m) if p.m < self.m else p
        if q.m != self.m:
            raise ValueError(f"point level {p.m} exceeds graph level {self.m}")
        return self.point_index[q.n]


@lru_cache(maxsize=None)
def build_level(m: int) -> LevelGraph:
    """Construct K_m by gluing all 2*5^m circle points into 5^m vertices."""
    _check_level(m)
    size = 2 * 5**m
    partner = [0] * (size + 1)
    for n in range(1, size + 1):
        partner[n] = partner_numerator(n, m)

    seen = [False] * (size + 1)
    vertices = []
    for n in range(1, size + 1):
        if seen[n]:
            continue
        p = partner[n]
        seen[n] = seen[p] = True
        vertices.append(Vertex(min(n, p), max(n, p), m))
    vertices.sort(key=lambda v: v.canonical)

    point_index: dict[int, int] = {}
    for i, v in enumerate(vertices):
        point_index[v.n1] = i
        point_index[v.n2] = i

    adjacency = np.empty((len(vertices), 4), dtype=np.int64)
    for i, v in enumerate(vertices):
        adjacency[i] = [
            point_index[wrap_numerator(v.n1 - 1, m)],
            point_index[wrap_numerator(v.n1 + 1, m)],
            point_index[wrap_numerator(v.n2 - 1, m)],
            point_index[wrap_numerator(v.n2 + 1, m)],
        ]

    return LevelGraph(m, tuple(vertices), adjacency, point_index)


@dataclass(frozen=True)
class LaplacianMatrix:
    """Dense integer matrix of the level-m graph Laplacian.

    Diagonal entries are 4 at old vertices and 2 at new vertices (the two
    self-loop slots contribute nothing); off-diagonal entries are minus the
    number of arcs joining the two vertices.
    """

    m: int
    matrix: np.ndarray


_DENSE_LEVEL_CAP = 5  # 5^5 x 5^5 is ~78 MB of int64; beyond that use apply_laplacian


def laplacian_matrix(g: LevelGraph) -> LaplacianMatrix:
    """Dense Laplacian of K_m (negative definite sign convention: -Delta)."""
    if g.m > _DENSE_LEVEL_CAP:
        raise ValueError(f"dense Laplacian capped at level {_DENSE_LEVEL_CAP}")
    n = g.size
    mat = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in g.adjacency[i]:
            if j != i:
                mat[i, i] += 1
                mat[i, j] -= 1
    return LaplacianMatrix(g.m, mat)


def apply_laplacian(g: LevelGraph, values: np.ndarray) -> np.ndarray:
    """Matrix-free -Delta_m applied to a vertex function."""
    values = np.asarray(values, dtype=float)
    if values.shape != (g.size,):
        raise ValueError(f"expected {g.size} values, got shape {values.shape}")
    idx = g.adjacency
    own = np.arange(g.size)[:, None]
    terms = np.where(idx == own, 0.0, values[:, None] - values[idx])
    return terms.sum(axis=1)


# ---------------------------------------------------------------------------
# circle symmetries


def half_turn_numerator(n: int, m: int) -> int:
    """t -> t + 1/2 on the circle."""
    return wrap_numerator(n + 5**m, m)


def reflect_numerator(n: int, m: int) -> int:
    """t -> 1 - t on the circle."""
    return wrap_numerator(2 * 5**m - n, m)


def half_reflect_numerator(n: int, m: int) -> int:
    """t -> 1/2 - t on the circle."""
    return wrap_numerator(5**m - n, m)


def vertex_permutation(g: LevelGraph, point_map) -> np.ndarray:
    """Vertex index permutation induced by a numerator map.

    Raises if the map does not respect the gluing (i.e. the images of a
    vertex's two points land in different vertices).
    """
    perm = np.empty(g.size, dtype=np.int64)
    for i, v in enumerate(g.vertices):
        a = g.point_index[point_map(v.n1, g.m)]
        b = g.point_index[point_map(v.n2, g.m)]
        if a != b:
            raise ValueError("numerator map does not preserve the gluing")
        perm[i] = a
    return perm


def is_graph_automorphism(g: LevelGraph, perm: np.ndarray) -> bool:
    """Check a vertex permutation preserves the adjacency multisets."""
    for i in range(g.size):
        image = sorted(perm[g.adjacency[i]])
        target = sorted(g.adjacency[perm[i]])
        if image != target:
            return False
    return True


# ---------------------------------------------------------------------------
# serialization


def graph_to_json(g: LevelGraph) -> str:
    payload = {
        "level": g.m,
        "vertices": [[v.n1, v.n2] for v in g.vertices],
        "adjacency": g.adjacency.tolist(),
    }
    return json.dumps(payload, separators=(",", ":"))


def laplacian_to_csv_rows(lap: LaplacianMatrix):
    """Yield (row, col, value) triplets of the nonzero entries."""
    rows, cols = np.nonzero(lap.matrix)
    for r, c in zip(rows.tolist(), cols.tolist()):
        yield r, c, int(lap.matrix[r, c])
