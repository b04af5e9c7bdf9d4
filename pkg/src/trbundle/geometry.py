"""Shared numerical vocabulary: points, norms, trust regions, tolerances, seeding."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

Point = np.ndarray  # dense real vector, all entries finite


class NormKind(enum.Enum):
    EUCLIDEAN = "euclidean"
    MAX = "max"


@dataclass(frozen=True)
class Tolerances:
    feas_tol: float = 1e-9          # relative trust-region membership slack
    sub_opt_tol_factor: float = 0.01  # subproblem accuracy relative to the bundle stopping threshold
    fd_check_tol: float = 1e-5
    grid_oracle_tol: float = 1e-6

    def __post_init__(self):
        if not (self.feas_tol > 0 and self.fd_check_tol > 0 and self.grid_oracle_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.sub_opt_tol_factor < 1:
            raise ValueError("sub_opt_tol_factor must lie in (0, 1)")


DEFAULT_TOL = Tolerances()


def as_point(x) -> Point:
    """Coerce to a finite 1-d float64 array (copies its input)."""
    v = np.array(x, dtype=float, ndmin=1)
    if v.ndim != 1:
        raise ValueError(f"point must be a vector, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ValueError("point has non-finite entries")
    return v


def norm(v: Point, kind: NormKind = NormKind.EUCLIDEAN) -> float:
    """2-norm or max-norm of a finite vector."""
    v = np.asarray(v, dtype=float)
    if not np.isfinite(v).all():
        raise ValueError("norm of non-finite vector")
    if kind is NormKind.EUCLIDEAN:
        return float(np.linalg.norm(v))
    if kind is NormKind.MAX:
        return float(np.max(np.abs(v))) if v.size else 0.0
    raise ValueError(f"unknown norm kind {kind!r}")


@dataclass(frozen=True)
class TrustRegion:
    """Closed ball around ``center`` of radius ``radius`` in the given norm."""

    center: Point
    radius: float
    kind: NormKind = NormKind.EUCLIDEAN
    feas_tol: float = DEFAULT_TOL.feas_tol

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius > 0:
            raise ValueError("trust-region radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.size

    def distance_from_center(self, z: Point) -> float:
        return norm(np.asarray(z, dtype=float) - self.center, self.kind)

    def contains(self, z: Point) -> bool:
        # relative slack: subproblem solvers return boundary points inexactly
        return self.distance_from_center(z) <= self.radius * (1.0 + self.feas_tol)

    def project(self, z: Point) -> Point:
        """Nearest point of the region (exact for both norms)."""
        z = np.asarray(z, dtype=float)
        d = z - self.center
        if self.kind is NormKind.EUCLIDEAN:
            r = np.linalg.norm(d)
            if r <= self.radius:
                return z.copy()
            return self.center + d * (self.radius / r)
        return self.center + np.clip(d, -self.radius, self.radius)


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Deterministic sub-stream of the single 64-bit run seed.

    Every random draw in the package flows through here so that runs are
    bit-reproducible; ``key`` names the consumer (instance generation,
    solver restarts, ...).
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))
