"""Shared domain types: samples, grouping plans, per-group maxima and models.

All containers are frozen dataclasses; ndarray fields are marked read-only at
construction, so instances can be shared freely between threads or processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptySample,
    InvalidModel,
    NonFiniteEntry,
)

UNIT_NORM_TOL = 1e-12

AngularDensity = Callable[[np.ndarray], np.ndarray]
Region = Callable[[np.ndarray], bool]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DataMatrix:
    """An N x d sample of real vectors.

    ``values`` is coerced to a read-only float64 array of shape (N, d);
    1-D input is treated as a single-column (d=1) sample.
    """

    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.values, dtype=np.float64)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2:
            raise InvalidModel(f"expected a 2-D sample, got ndim={a.ndim}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise EmptySample(f"sample shape {a.shape} has an empty axis")
        object.__setattr__(self, "values", _frozen(a))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def scaled(self, c: float) -> "DataMatrix":
        return DataMatrix(self.values * float(c))


def validate_data(data: DataMatrix) -> DataMatrix:
    """Return ``data`` unchanged after checking every entry is finite.

    Raises NonFiniteEntry with the 0-based position of the first bad entry,
    or EmptySample for a 0-row matrix (already impossible post-construction,
    kept for callers passing raw arrays through DataMatrix).
    """
    a = data.values
    if a.shape[0] < 1:
        raise EmptySample("no rows")
    finite = np.isfinite(a)
    if not finite.all():
        row, col = np.argwhere(~finite)[0]
        raise NonFiniteEntry(int(row), int(col))
    return data


@dataclass(frozen=True)
class GroupScheme:
    """Partition plan: n groups of m consecutive rows, trailing rows dropped.

    ``m >= 2`` is required by every statistic that uses the second-largest
    norm; schemes with m == 1 are only produced on request (theta-only paths).
    """

    r: float
    n: int
    m: int
    discarded: int

    def __post_init__(self):
        if not (0.0 < self.r < 1.0):
            raise InvalidModel(f"r={self.r} outside (0,1)")
        if self.n < 1 or self.m < 1:
            raise InvalidModel("group counts must be positive")
        if not (0 <= self.discarded < self.n):
            raise InvalidModel(
                f"discarded={self.discarded} outside [0, n={self.n})"
            )

    @property
    def total_rows(self) -> int:
        return self.n * self.m + self.discarded


@dataclass(frozen=True)
class GroupSummary:
    """Largest/second-largest norms, their ratio and the maximiser direction.

    ``m2`` and ``kappa`` are None for singleton groups (m == 1), where the
    second-largest norm does not exist.
    """

    m1: float
    m2: float | None
    kappa: float | None
    theta: np.ndarray
    argmax_index: int

    def __post_init__(self):
        object.__setattr__(self, "theta", _frozen(np.atleast_1d(self.theta)))
        if self.m1 <= 0.0:
            raise InvalidModel("m1 must be positive")
        if self.m2 is not None and self.m2 > self.m1:
            raise InvalidModel("m2 exceeds m1")
        # hot path: dot product beats np.linalg.norm for these tiny vectors
        if abs(math.sqrt(float(self.theta @ self.theta)) - 1.0) > UNIT_NORM_TOL:
            raise InvalidModel("theta is not unit-norm")


@dataclass(frozen=True)
class SpectralEstimate:
    """Atomic probability measure (1/n on each of n unit directions)."""

    atoms: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=np.float64)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.shape[0] < 1:
            raise EmptySample("spectral estimate needs at least one atom")
        norms = np.sqrt((a * a).sum(axis=1))
        if np.abs(norms - 1.0).max() > UNIT_NORM_TOL:
            raise InvalidModel("atoms must be unit vectors")
        object.__setattr__(self, "atoms", _frozen(a))

    @property
    def n(self) -> int:
        return self.atoms.shape[0]

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def weight(self) -> float:
        return 1.0 / self.n

    def angles_2d(self) -> np.ndarray:
        """Planar angles of the atoms in [0, 2*pi), d=2 only."""
        if self.dim != 2:
            raise DimensionMismatch(f"angles need d=2, have d={self.dim}")
        a = np.arctan2(self.atoms[:, 1], self.atoms[:, 0])
        return np.mod(a, 2.0 * math.pi)


@dataclass(frozen=True)
class NormalizedStat:
    """A centered estimator value with its plug-in variance and sample count."""

    point: float
    variance_hat: float
    n: int

    def __post_init__(self):
        if self.variance_hat < 0.0:
            raise InvalidModel("variance_hat must be nonnegative")
        if self.n < 1:
            raise EmptySample("n must be positive")

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance_hat / self.n)


@dataclass(frozen=True)
class Interval:
    """A confidence interval; endpoints may be +-inf, never clamped silently."""

    lo: float
    hi: float
    level: float

    def __post_init__(self):
        if not (0.0 < self.level < 1.0):
            raise InvalidModel("level must be in (0,1)")
        if self.lo > self.hi:
            raise InvalidModel(f"lo={self.lo} > hi={self.hi}")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def halfwidth(self) -> float:
        return (self.hi - self.lo) / 2.0


# number of midpoint nodes used when integrating an angular density
_DENSITY_QUAD_CELLS = 1 << 15


@dataclass(frozen=True)
class ModelSpec:
    """Ground truth for simulation and tuning.

    Exactly one of ``atoms`` (list of (unit vector, positive weight) pairs,
    weights summing to ``total_mass``) or ``density`` (angular density on
    [0, 2*pi) integrating to ``total_mass``, d=2 only) must be given.  The
    slowly varying factor is the constant 1 throughout.
    """

    alpha: float
    total_mass: float
    beta: float = math.inf
    atoms: tuple[tuple[np.ndarray, float], ...] | None = None
    density: AngularDensity | None = None
    c1: float | None = None
    c2: float | None = None

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise InvalidModel("alpha must be positive")
        if self.total_mass <= 0.0:
            raise InvalidModel("total_mass must be positive")
        if self.beta <= self.alpha:
            raise InvalidModel("beta must exceed alpha (use +inf if exact)")
        if (self.atoms is None) == (self.density is None):
            raise InvalidModel("specify exactly one of atoms or density")
        if self.atoms is not None:
            cooked = []
            for vec, w in self.atoms:
                v = np.atleast_1d(np.asarray(vec, dtype=np.float64))
                if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                    raise InvalidModel(f"atom {v} is not a unit vector")
                if w <= 0.0:
                    raise InvalidModel("atom weights must be positive")
                cooked.append((_frozen(v), float(w)))
            dims = {v.shape[0] for v, _ in cooked}
            if len(dims) != 1:
                raise InvalidModel("atoms have mixed dimensions")
            total = sum(w for _, w in cooked)
            if abs(total - self.total_mass) > 1e-9:
                raise InvalidModel(
                    f"atom weights sum to {total}, expected {self.total_mass}"
                )
            object.__setattr__(self, "atoms", tuple(cooked))
        else:
            total = self._density_integral()
            if abs(total - self.total_mass) > 1e-6:
                raise InvalidModel(
                    f"density integrates to {total}, expected {self.total_mass}"
                )

    def _density_integral(self) -> float:
        mids, step = _density_grid()
        vals = np.asarray(self.density(mids), dtype=np.float64)
        if (vals < 0).any():
            raise InvalidModel("density takes negative values")
        return float(vals.sum() * step)

    @property
    def dim(self) -> int:
        if self.atoms is not None:
            return self.atoms[0][0].shape[0]
        return 2

    @property
    def rho(self) -> float:
        """(sigma(+1) - sigma(-1)) / sigma(S) for d=1 atom models."""
        if self.atoms is None or self.dim != 1:
            raise DimensionMismatch("rho is defined for d=1 atom models")
        pos = sum(w for v, w in self.atoms if v[0] > 0)
        neg = sum(w for v, w in self.atoms if v[0] < 0)
        return (pos - neg) / self.total_mass

    def normalized_mass(self, region: Region) -> float:
        """sigma~(B) = sigma(B)/sigma(S) for a membership predicate B."""
        if self.atoms is not None:
            hit = sum(w for v, w in self.atoms if region(v))
            return hit / self.total_mass
        mids, step = _density_grid()
        vals = np.asarray(self.density(mids), dtype=np.float64)
        dirs = np.c_[np.cos(mids), np.sin(mids)]
        inside = np.fromiter((region(d) for d in dirs), dtype=bool, count=len(mids))
        return float((vals * inside).sum() * step / self.total_mass)

    def spectral_cdf(self, angles: Sequence[float]) -> np.ndarray:
        """Exact normalized spectral cdf at the given angles (d=2 only).

        Atom mass sitting exactly at an angle is included (closed [0, a]).
        """
        if self.dim != 2:
            raise DimensionMismatch("spectral cdf needs d=2")
        a = np.asarray(angles, dtype=np.float64)
        if self.atoms is not None:
            at = np.mod(np.arctan2([v[1] for v, _ in self.atoms],
                                   [v[0] for v, _ in self.atoms]), 2 * math.pi)
            order = np.argsort(at, kind="stable")
            w = np.array([wt for _, wt in self.atoms])[order]
            cum = np.concatenate([[0.0], np.cumsum(w)]) / self.total_mass
            return cum[np.searchsorted(at[order], a, side="right")]
        mids, step = _density_grid()
        vals = np.asarray(self.density(mids), dtype=np.float64) * step
        edges_cum = np.concatenate([[0.0], np.cumsum(vals)])
        edges = np.linspace(0.0, 2 * math.pi, len(mids) + 1)
        # normalize by the quadrature total so the cdf ends exactly at 1
        return np.interp(a, edges, edges_cum) / edges_cum[-1]


def _density_grid() -> tuple[np.ndarray, float]:
    step = 2.0 * math.pi / _DENSITY_QUAD_CELLS
    mids = (np.arange(_DENSITY_QUAD_CELLS) + 0.5) * step
    return mids, step
