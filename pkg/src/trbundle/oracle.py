"""Derivative oracle for max-type objectives.

A query at x returns f(x) together with the derivative tensors (up to the
model order q) of one smooth selection branch that attains the max at x.
Which branch was chosen is recorded only as an opaque tag for diagnostics;
algorithm code never reads it.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Point, as_point

_HESS_SYM_TOL = 1e-12


@dataclass(frozen=True)
class OracleSample:
    """Value and branch derivatives of one oracle query."""

    base: Point
    value: float
    grad: Point
    hess: Optional[np.ndarray]  # present iff order == 2
    order: int
    selector_tag: int = 0  # diagnostic only; never consumed by the algorithm

    def __post_init__(self):
        object.__setattr__(self, "base", as_point(self.base))
        object.__setattr__(self, "grad", as_point(self.grad))
        if not np.isfinite(self.value):
            raise ValueError("non-finite oracle value")
        if self.order not in (1, 2):
            raise ValueError(f"model order must be 1 or 2, got {self.order}")
        if self.order == 2:
            if self.hess is None:
                raise ValueError("order-2 sample requires a Hessian")
            h = np.array(self.hess, dtype=float)
            scale = max(1.0, float(np.abs(h).max()))
            if np.abs(h - h.T).max() > _HESS_SYM_TOL * scale:
                raise ValueError("Hessian is not symmetric")
            object.__setattr__(self, "hess", h)
        elif self.hess is not None:
            raise ValueError("order-1 sample must not carry a Hessian")

    @property
    def dim(self) -> int:
        return self.base.size


class OracleInterface(abc.ABC):
    """Deterministic value-and-derivative oracle of a max-type function."""

    @property
    @abc.abstractmethod
    def dim(self) -> int:
        ...

    @abc.abstractmethod
    def query(self, x: Point, order: int) -> OracleSample:
        """f(x) plus derivatives of one active branch; identical x gives identical samples."""

    @abc.abstractmethod
    def eval_value(self, x: Point) -> float:
        """f(x) alone (must agree with query(x, order).value)."""

    def eval_values(self, points: np.ndarray) -> np.ndarray:
        """f at each row of ``points``; overridden with vectorized code where it pays."""
        pts = np.asarray(points, dtype=float)
        return np.array([self.eval_value(p) for p in pts])

    def branch_value(self, tag: int, z: Point) -> float:
        """Value of the selection branch named by ``tag`` at z (diagnostics only).

        Only available for problems whose branches are explicitly enumerable.
        """
        raise NotImplementedError("this oracle does not expose branch values")


def taylor_eval(sample: OracleSample, z: Point) -> float:
    """q-order Taylor value of the sampled branch at z."""
    z = np.asarray(z, dtype=float)
    if z.shape != sample.base.shape:
        raise ValueError(f"dimension mismatch: {z.shape} vs {sample.base.shape}")
    d = z - sample.base
    out = sample.value + float(sample.grad @ d)
    if sample.order == 2:
        out += 0.5 * float(d @ sample.hess @ d)
    return out


@dataclass(frozen=True)
class FDCheckResult:
    max_rel_error: float
    kink_adjacent: bool
    rejected_fraction: float


def finite_difference_check(oracle: OracleInterface, x: Point, h: float = 1e-5) -> FDCheckResult:
    """Central-difference check of the sampled branch's gradient (and Hessian).

    Every stencil point of a difference must land on the same selection
    branch as the base query; a difference whose stencil strays onto another
    branch is rejected, and if more than half of the attempted differences
    are rejected the point is flagged as kink-adjacent instead of scored.
    """
    x = as_point(x)
    n = x.size
    sample = oracle.query(x, 2)
    tag = sample.selector_tag

    def probe(y):
        s = oracle.query(y, 1)
        return s.value, s.selector_tag == tag

    n_stencils = 0
    n_rejected = 0
    max_err = 0.0

    # gradient: (f(x+h e_i) - f(x-h e_i)) / 2h
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fp, okp = probe(x + e)
        fm, okm = probe(x - e)
        n_stencils += 1
        if not (okp and okm):
            n_rejected += 1
            continue
        fd = (fp - fm) / (2.0 * h)
        g = sample.grad[i]
        max_err = max(max_err, abs(fd - g) / max(1.0, abs(g)))

    # Hessian: standard 4-point cross differences
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n); ei[i] = h
            ej = np.zeros(n); ej[j] = h
            fpp, ok1 = probe(x + ei + ej)
            fpm, ok2 = probe(x + ei - ej)
            fmp, ok3 = probe(x - ei + ej)
            fmm, ok4 = probe(x - ei - ej)
            n_stencils += 1
            if not (ok1 and ok2 and ok3 and ok4):
                n_rejected += 1
                continue
            fd = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
            hij = sample.hess[i, j]
            max_err = max(max_err, abs(fd - hij) / max(1.0, abs(hij)))

    rejected = n_rejected / n_stencils if n_stencils else 0.0
    if rejected > 0.5:
        return FDCheckResult(max_rel_error=float("nan"), kink_adjacent=True, rejected_fraction=rejected)
    return FDCheckResult(max_rel_error=max_err, kink_adjacent=False, rejected_fraction=rejected)
