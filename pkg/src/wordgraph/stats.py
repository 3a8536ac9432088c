"""Corpus statistics: rank correlation with grade and the saturation-curve fit.

The growth model is

    f(t) = f0 + (f_inf - f0) * (1 - exp(-t / T))

with ``t`` the recommended school year. For a fixed ``T`` the model is linear
in ``(f0, f_inf)``, so :func:`fit_asymptotic` profiles ``T`` over a log grid,
solves the two linear parameters in closed form at every grid point, and then
refines ``T`` with a bounded scalar minimizer around the best grid cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import optimize, special

from wordgraph.errors import DataError
from wordgraph.graphcore import ATTRIBUTES, AttributeVector
from wordgraph.pipeline import MAX_GRADE, MIN_GRADE, CorpusRecord

ALPHA = 0.05 / len(ATTRIBUTES)
T_MIN, T_MAX = 0.1, 50.0
GRID_SIZE = 600
REFINE_RTOL = 1e-8
IDENTIFIABLE_RTOL = 1e-6


@dataclass(frozen=True)
class CorrelationResult:
    attribute: str
    rho: float
    p_value: float
    n: int
    significant: bool
    degenerate: bool = False


@dataclass(frozen=True)
class FitPoint:
    t: int
    y: float

    def __post_init__(self) -> None:
        if not MIN_GRADE <= self.t <= MAX_GRADE:
            raise DataError(f"year {self.t} outside {MIN_GRADE}-{MAX_GRADE}")


@dataclass(frozen=True)
class FitResult:
    attribute: str
    f0: float
    f_inf: float
    T: float  # nan when not identifiable
    r_squared: float
    mse: float
    identifiable: bool
    n: int

    @property
    def T_rounded(self) -> int | None:
        return int(round(self.T)) if self.identifiable else None

    def predict(self, t: float | np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if not self.identifiable:
            return np.full(t.shape, (self.f0 + self.f_inf) / 2.0)
        return asymptotic_model(t, self.f0, self.f_inf, self.T)


def asymptotic_model(t, f0: float, f_inf: float, T: float):
    return f0 + (f_inf - f0) * (1.0 - np.exp(-np.asarray(t, dtype=float) / T))


# -- rank correlation ---------------------------------------------------------


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    a = np.asarray(values, dtype=float)
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(a.size, dtype=float)
    sorted_a = a[order]
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _check_pair(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise DataError(f"spearman needs two equal-length vectors, got {xa.shape} and {ya.shape}")
    if xa.size < 3:
        raise DataError(f"spearman needs at least 3 observations, got {xa.size}")
    return xa, ya


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    if denom == 0.0:
        return 0.0
    return max(-1.0, min(1.0, float(np.dot(da, db)) / denom))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman's rho (Pearson on mid-ranks). Returns 0 when either input is constant."""
    xa, ya = _check_pair(x, y)
    return _pearson(average_ranks(xa), average_ranks(ya))


def spearman_pvalue(rho: float, n: int) -> float:
    """Two-sided p-value of rho via the Student t approximation with n - 2 dof."""
    if not n >= 3:
        raise DataError(f"p-value needs n >= 3, got {n}")
    if not -1.0 <= rho <= 1.0 or math.isnan(rho):
        raise DataError(f"rho must lie in [-1, 1], got {rho}")
    if abs(rho) == 1.0:
        return 0.0
    df = n - 2
    t2 = rho * rho * df / (1.0 - rho * rho)
    # P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
    p = float(special.betainc(df / 2.0, 0.5, df / (df + t2)))
    return min(1.0, max(0.0, p))


def spearman_permutation_pvalue(
    x: Sequence[float], y: Sequence[float], n_resamples: int = 10_000, seed: int = 0
) -> float:
    """Two-sided permutation p-value, ``(hits + 1) / (n_resamples + 1)``."""
    xa, ya = _check_pair(x, y)
    rx, ry = average_ranks(xa), average_ranks(ya)
    observed = abs(_pearson(rx, ry))
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(n_resamples):
        if abs(_pearson(rx, rng.permutation(ry))) >= observed - 1e-12:
            hits += 1
    return (hits + 1) / (n_resamples + 1)


def correlate(attribute: str, x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    xa, ya = _check_pair(x, y)
    degenerate = bool(np.all(xa == xa[0]) or np.all(ya == ya[0]))
    if degenerate:
        return CorrelationResult(attribute, 0.0, 1.0, xa.size, False, True)
    rho = spearman(xa, ya)
    p = spearman_pvalue(rho, xa.size)
    return CorrelationResult(attribute, rho, p, xa.size, p < ALPHA)


# -- asymptotic fit -------------------------------------------------------------


def _linear_solve(phi: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares (f0, f_inf) for a fixed saturation profile ``phi``."""
    dphi = phi - phi.mean()
    sxx = float(np.dot(dphi, dphi))
    if sxx <= 0.0:
        return float(y.mean()), float(y.mean())
    slope = float(np.dot(dphi, y - y.mean())) / sxx
    f0 = float(y.mean()) - slope * float(phi.mean())
    return f0, f0 + slope


def _ss_res(T: float, t: np.ndarray, y: np.ndarray) -> float:
    phi = -np.expm1(-t / T)
    f0, f_inf = _linear_solve(phi, y)
    r = y - (f0 + (f_inf - f0) * phi)
    return float(np.dot(r, r))


def _grid_ss_res(grid: np.ndarray, t: np.ndarray, y: np.ndarray) -> np.ndarray:
    phi = -np.expm1(-t[None, :] / grid[:, None])
    dphi = phi - phi.mean(axis=1, keepdims=True)
    dy = y - y.mean()
    sxx = np.einsum("ij,ij->i", dphi, dphi)
    sxy = dphi @ dy
    syy = float(np.dot(dy, dy))
    with np.errstate(divide="ignore", invalid="ignore"):
        explained = np.where(sxx > 0, sxy * sxy / sxx, 0.0)
    return np.maximum(syy - explained, 0.0)


def t_grid(size: int = GRID_SIZE) -> np.ndarray:
    return np.geomspace(T_MIN, T_MAX, size)


def fit_asymptotic(t: Sequence[float], y: Sequence[float], attribute: str = "") -> FitResult:
    """Least-squares fit of the saturation model to points ``(t_i, y_i)``."""
    ta = np.asarray(t, dtype=float)
    ya = np.asarray(y, dtype=float)
    if ta.shape != ya.shape or ta.ndim != 1:
        raise DataError("t and y must be equal-length vectors")
    if ta.size < 3:
        raise DataError(f"need at least 3 points to fit, got {ta.size}")
    if np.unique(ta).size < 2:
        raise DataError("need >= 2 distinct grades")
    if not (np.all(np.isfinite(ta)) and np.all(np.isfinite(ya))):
        raise DataError("non-finite values in fit input")

    n = ta.size
    mean = float(ya.mean())
    ss_tot = float(np.dot(ya - mean, ya - mean))
    if ss_tot == 0.0:
        return FitResult(attribute, mean, mean, math.nan, 1.0, 0.0, False, n)

    grid = t_grid()
    k = int(np.argmin(_grid_ss_res(grid, ta, ya)))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = optimize.minimize_scalar(
        _ss_res,
        bounds=(lo, hi),
        args=(ta, ya),
        method="bounded",
        options={"xatol": REFINE_RTOL * grid[k], "maxiter": 500},
    )
    T = float(res.x)
    if _ss_res(grid[k], ta, ya) < _ss_res(T, ta, ya):
        T = float(grid[k])

    phi = -np.expm1(-ta / T)
    f0, f_inf = _linear_solve(phi, ya)
    resid = ya - (f0 + (f_inf - f0) * phi)
    ss_res = float(np.dot(resid, resid))
    scale = max(abs(f0), abs(f_inf))
    identifiable = abs(f_inf - f0) > IDENTIFIABLE_RTOL * scale if scale > 0 else False
    return FitResult(
        attribute,
        f0,
        f_inf,
        T if identifiable else math.nan,
        1.0 - ss_res / ss_tot,
        ss_res / n,
        identifiable,
        n,
    )


def fit_points(points: Sequence[FitPoint], attribute: str = "") -> FitResult:
    return fit_asymptotic([p.t for p in points], [p.y for p in points], attribute)


# -- corpus level -------------------------------------------------------------


@dataclass(frozen=True)
class YearMean:
    grade: int
    count: int
    mean: AttributeVector


def _column(records: Sequence[CorpusRecord], attribute: str) -> list[float]:
    return [getattr(r.profile.mean, attribute) for r in records]


def _check_corpus(records: Sequence[CorpusRecord]) -> None:
    if len(records) < 3:
        raise DataError(f"need at least 3 texts, got {len(records)}")
    if len({r.grade for r in records}) < 2:
        raise DataError("need >= 2 distinct grades")


def per_year_means(records: Sequence[CorpusRecord]) -> dict[int, YearMean]:
    """Unweighted mean of per-text profiles within each grade (order independent)."""
    if not records:
        raise DataError("no records")
    by_year: dict[int, list[CorpusRecord]] = {}
    for r in records:
        by_year.setdefault(r.grade, []).append(r)
    table = {}
    for grade in sorted(by_year):
        group = by_year[grade]
        means = [math.fsum(_column(group, a)) / len(group) for a in ATTRIBUTES]
        table[grade] = YearMean(grade, len(group), AttributeVector.from_sequence(means))
    return table


def attribute_sd(records: Sequence[CorpusRecord]) -> dict[str, float]:
    """Whole-corpus sample standard deviation of each attribute."""
    out = {}
    for a in ATTRIBUTES:
        col = _column(records, a)
        if len(col) < 2:
            out[a] = 0.0
            continue
        m = math.fsum(col) / len(col)
        out[a] = math.sqrt(math.fsum((v - m) ** 2 for v in col) / (len(col) - 1))
    return out


def correlate_corpus(records: Sequence[CorpusRecord]) -> list[CorrelationResult]:
    _check_corpus(records)
    grades = [float(r.grade) for r in records]
    return [correlate(a, grades, _column(records, a)) for a in ATTRIBUTES]


def fit_corpus(records: Sequence[CorpusRecord]) -> list[FitResult]:
    """One fit per attribute, using one point per text."""
    _check_corpus(records)
    grades = [float(r.grade) for r in records]
    return [fit_asymptotic(grades, _column(records, a), a) for a in ATTRIBUTES]


# -- grade suggestion ---------------------------------------------------------


@dataclass(frozen=True)
class Recommendation:
    grade: int
    distances: dict[int, float]
    z_scores: dict[str, float]  # (profile - mean of chosen grade) / sd
    used_attributes: tuple[str, ...]


def suggest_grade(
    profile: AttributeVector,
    year_means: Mapping[int, AttributeVector],
    sd: Mapping[str, float],
) -> Recommendation:
    """Grade whose mean vector is nearest in summed squared z-score; ties go to the lower grade.

    Attributes with zero or missing spread carry no information and are ignored.
    """
    years = sorted(g for g in year_means if MIN_GRADE <= g <= MAX_GRADE)
    if not years:
        raise DataError("no per-year statistics available")
    used = tuple(a for a in ATTRIBUTES if sd.get(a, 0.0) > 0.0 and math.isfinite(sd[a]))
    values = profile.as_dict()
    distances: dict[int, float] = {}
    for g in years:
        m = year_means[g].as_dict()
        distances[g] = math.fsum(((values[a] - m[a]) / sd[a]) ** 2 for a in used)
    best = min(years, key=lambda g: (distances[g], g))
    chosen = year_means[best].as_dict()
    z = {a: (values[a] - chosen[a]) / sd[a] for a in used}
    return Recommendation(best, distances, z, used)
