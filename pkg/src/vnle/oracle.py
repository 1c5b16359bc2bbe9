"""Brute-force verification backend.

Dense symmetric eigendecomposition of the level-graph Laplacians (LAPACK
via numpy: Householder tridiagonalization), eigen-residual measurement and
sorted-spectrum comparison. Deliberately shares no numerical machinery
with the decimation engine, so agreement between the two is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circlegraph import LevelGraph, apply_laplacian, build_level, laplacian_matrix

DEFAULT_LEVEL_CAP = 4  # 625x625; dense decompositions beyond this are out of scope
_RECONSTRUCTION_TOL = 1e-8
CLUSTER_GAP = 1e-7


@dataclass(frozen=True)
class DenseSpectrum:
    m: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


def dense_spectrum(m: int, want_vectors: bool = False,
                   level_cap: int = DEFAULT_LEVEL_CAP) -> DenseSpectrum:
    """Eigendecomposition of the dense -Delta_m, sorted ascending."""
    if m > level_cap:
        raise ValueError(f"dense decomposition capped at level {level_cap}, got {m}")
    lap = laplacian_matrix(build_level(m)).matrix.astype(float)
    if not np.array_equal(lap, lap.T):
        raise ValueError("Laplacian is not symmetric")
    if want_vectors:
        w, q = np.linalg.eigh(lap)
        recon = (q * w) @ q.T
        err = np.abs(recon - lap).max()
        if err > _RECONSTRUCTION_TOL:
            raise ArithmeticError(f"eigendecomposition reconstruction error {err}")
        return DenseSpectrum(m, w, q)
    return DenseSpectrum(m, np.linalg.eigvalsh(lap))


def residual(g: LevelGraph, values: np.ndarray, lam: float) -> float:
    """Relative eigen-residual max|(-Delta)u - lam*u| / max(1, max|u|)."""
    values = np.asarray(values, dtype=float)
    r = apply_laplacian(g, values) - lam * values
    return float(np.abs(r).max() / max(1.0, np.abs(values).max()))


@dataclass(frozen=True)
class ComparisonReport:
    length: int
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def compare_spectra(a: np.ndarray, b: np.ndarray, tol: float) -> ComparisonReport:
    """Max pairwise deviation of two sorted eigenvalue multisets."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    dev = float(np.abs(a - b).max()) if len(a) else 0.0
    return ComparisonReport(len(a), dev, tol)


def cluster_multiplicities(values: np.ndarray, gap: float = CLUSTER_GAP) -> list[tuple[float, int]]:
    """Group a sorted eigenvalue array into (value, multiplicity) clusters."""
    values = np.sort(np.asarray(values, dtype=float))
    clusters: list[tuple[float, int]] = []
    for v in values:
        if clusters and v - clusters[-1][0] <= gap:
            val, n = clusters[-1]
            clusters[-1] = (val, n + 1)
        else:
            clusters.append((float(v), 1))
    return clusters


def multiplicity_near(values: np.ndarray, target: float, tol: float = 1e-7) -> int:
    values = np.asarray(values, dtype=float)
    return int(np.count_nonzero(np.abs(values - target) <= tol))
