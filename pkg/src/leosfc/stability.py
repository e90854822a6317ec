"""Coefficient-of-variation statistics for pairwise and multi-hop delays."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .pathdelay import AvgDelayMatrix, DelayTensor


class PairStability(NamedTuple):
    u: int
    v: int
    mean: float
    std: float
    cv: float


def series_cv(series: np.ndarray) -> float:
    """Population std over mean; ``nan`` if any sample is infinite."""
    series = np.asarray(series, dtype=float)
    if not np.all(np.isfinite(series)):
        return math.nan
    mu = series.mean()
    if mu <= 0:
        return math.nan
    return float(series.std() / mu)


def pairwise_cv(matrix: AvgDelayMatrix) -> list[PairStability]:
    """One entry per unordered pair with full coverage and positive mean."""
    n = matrix.n_nodes
    iu, iv = np.triu_indices(n, k=1)
    mean = matrix.mean[iu, iv]
    std = matrix.std[iu, iv]
    ok = (matrix.coverage[iu, iv] == 1.0) & np.isfinite(mean) & (mean > 0)
    return [
        PairStability(int(u), int(v), float(m), float(s), float(s / m))
        for u, v, m, s in zip(iu[ok], iv[ok], mean[ok], std[ok])
    ]


def cv_quantiles(stats: Sequence[PairStability] | np.ndarray, fractions: Sequence[float]) -> list[float]:
    """Smallest CV ``c`` with at least a fraction ``p`` of entries ``<= c``."""
    if len(stats) == 0:
        raise ValueError("no CV values")
    cvs = np.sort(np.array([s.cv for s in stats]) if not isinstance(stats, np.ndarray) else stats)
    n = len(cvs)
    out = []
    for p in fractions:
        if not 0 < p <= 1:
            raise ValueError(f"fraction {p} outside (0, 1]")
        rank = max(int(math.ceil(p * n - 1e-9)), 1)
        out.append(float(cvs[rank - 1]))
    return out


def sample_paths(n_sats: int, M: int, n: int, seed: int) -> list[tuple[int, ...]]:
    """``n`` random satellite sequences of length ``M + 2``, no consecutive repeats."""
    if M < 0 or n_sats < 2:
        raise ValueError("need M >= 0 and at least two satellites")
    if n == 0:
        return []
    rng = np.random.default_rng(seed)
    out = np.empty((n, M + 2), dtype=np.int64)
    out[:, 0] = rng.integers(n_sats, size=n)
    for k in range(1, M + 2):
        r = rng.integers(n_sats - 1, size=n)
        out[:, k] = r + (r >= out[:, k - 1])
    return [tuple(int(x) for x in row) for row in out]


def path_series(tensor: DelayTensor, path: Sequence[int]) -> np.ndarray:
    """Summed hop delays of ``path`` at each slot, every hop read at the same slot."""
    if len(path) < 2:
        raise ValueError("path needs at least two satellites")
    path = np.asarray(path)
    return tensor.delays[path[:-1], path[1:], :].sum(axis=0)


def path_cv(tensor: DelayTensor, path: Sequence[int]) -> float:
    return series_cv(path_series(tensor, path))


def empirical_cdf(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    values = np.sort(np.asarray(values))
    return np.searchsorted(values, grid, side="right") / len(values)


@dataclass
class PathStabilityReport:
    M: int
    cvs: np.ndarray
    excluded: int = 0
    grid: np.ndarray = field(default=None)

    def __post_init__(self):
        self.cvs = np.asarray(self.cvs, dtype=float)
        if self.grid is None:
            hi = float(self.cvs.max()) if len(self.cvs) else 1.0
            self.grid = np.linspace(0.0, hi, 100)

    @property
    def average_cv(self) -> float:
        return float(self.cvs.mean())

    @property
    def sorted_cvs(self) -> np.ndarray:
        return np.sort(self.cvs)

    @property
    def cdf(self) -> np.ndarray:
        return empirical_cdf(self.cvs, self.grid)


def path_report(M: int, cvs: Sequence[float], grid: np.ndarray | None = None) -> PathStabilityReport:
    cvs = np.asarray(cvs, dtype=float)
    keep = np.isfinite(cvs)
    return PathStabilityReport(M, cvs[keep], int((~keep).sum()), grid)
