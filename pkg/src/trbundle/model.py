"""Cutting-plane model: the bundle of Taylor cuts, its max-model, the model
gap against the oracle, and the recent-point memory used to re-seed bundles.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Optional, Tuple

import numpy as np

from .geometry import TrustRegion
from .oracle import OracleInterface, OracleSample

DUPLICATE_TOL = 1e-14  # absolute, per coordinate


def _is_duplicate(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.max(np.abs(a - b)) <= DUPLICATE_TOL) if a.size else True


class Bundle:
    """Immutable ordered set of oracle samples inside one trust region.

    The model value at z is the max over samples of the sample's Taylor
    expansion. Extension returns a new bundle (value semantics).
    """

    def __init__(self, samples: Iterable[OracleSample], region: TrustRegion):
        samples = tuple(samples)
        if not samples:
            raise ValueError("bundle must be nonempty")
        order = samples[0].order
        for s in samples:
            if s.order != order:
                raise ValueError("mixed Taylor orders in one bundle")
            if not region.contains(s.base):
                raise ValueError("bundle point outside the trust region")
        for i in range(len(samples)):
            for j in range(i + 1, len(samples)):
                if _is_duplicate(samples[i].base, samples[j].base):
                    raise ValueError("duplicate base points in bundle")
        self.samples = samples
        self.region = region
        self.order = order
        self.bases = np.stack([s.base for s in samples])
        self.values = np.array([s.value for s in samples])
        self.grads = np.stack([s.grad for s in samples])
        self.hesses = np.stack([s.hess for s in samples]) if order == 2 else None

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def dim(self) -> int:
        return self.bases.shape[1]

    def has_base(self, point: np.ndarray) -> bool:
        point = np.asarray(point, dtype=float)
        return any(_is_duplicate(point, b) for b in self.bases)

    def extended(self, sample: OracleSample) -> "Bundle":
        return Bundle(self.samples + (sample,), self.region)

    def _values_chunk(self, Z: np.ndarray, with_grads: bool):
        D = Z[:, None, :] - self.bases[None, :, :]
        vals = self.values[None, :] + np.einsum("pkn,kn->pk", D, self.grads)
        grads = None
        if self.order == 2:
            Dt = np.ascontiguousarray(D.transpose(1, 2, 0))  # (K, n, P)
            HD = np.matmul(self.hesses, Dt)                  # BLAS, (K, n, P)
            vals = vals + 0.5 * np.einsum("knp,knp->pk", Dt, HD)
            if with_grads:
                grads = self.grads[None, :, :] + HD.transpose(2, 0, 1)
        elif with_grads:
            grads = np.broadcast_to(self.grads[None, :, :], D.shape).copy()
        return vals, grads

    def cut_values(self, Z: np.ndarray) -> np.ndarray:
        """Taylor value of every cut at every row of Z, shape (rows, cuts)."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        P, K, n = Z.shape[0], len(self), self.dim
        out = np.empty((P, K))
        chunk = max(1, 4_000_000 // max(1, K * n))
        for lo in range(0, P, chunk):
            hi = min(lo + chunk, P)
            out[lo:hi] = self._values_chunk(Z[lo:hi], with_grads=False)[0]
        return out

    def cut_values_at(self, z: np.ndarray) -> np.ndarray:
        return self.cut_values(z)[0]

    def cut_values_and_grads(self, Z: np.ndarray):
        """Values (rows, cuts) and gradients (rows, cuts, dim) in one pass."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        return self._values_chunk(Z, with_grads=True)

    def cut_grads(self, Z: np.ndarray) -> np.ndarray:
        """Gradient of every cut at every row of Z, shape (rows, cuts, dim)."""
        return self.cut_values_and_grads(Z)[1]


def model_eval(bundle: Bundle, z: np.ndarray) -> Tuple[float, int]:
    """Model value at z and the first cut attaining it."""
    z = np.asarray(z, dtype=float)
    if z.shape != (bundle.dim,):
        raise ValueError(f"dimension mismatch: {z.shape} vs ({bundle.dim},)")
    vals = bundle.cut_values_at(z)
    i = int(np.argmax(vals))
    return float(vals[i]), i


def model_gap(bundle: Bundle, oracle: OracleInterface, z: np.ndarray) -> float:
    """f(z) minus the model value at z; nonpositive at bundle points."""
    return oracle.eval_value(z) - model_eval(bundle, z)[0]


class PointMemory:
    """FIFO ring buffer of the most recent oracle samples."""

    def __init__(self, capacity: int = 100):
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        self._buf: deque = deque(maxlen=capacity)

    def push(self, sample: OracleSample) -> None:
        if self._buf.maxlen:
            self._buf.append(sample)

    def __len__(self) -> int:
        return len(self._buf)

    def __iter__(self):
        return iter(self._buf)

    @property
    def capacity(self) -> int:
        return self._buf.maxlen or 0


def seed_bundle(memory: Optional[PointMemory], center_sample: OracleSample,
                region: TrustRegion) -> Bundle:
    """Center sample plus every memorized sample inside the region, deduplicated."""
    if not _is_duplicate(center_sample.base, region.center):
        raise ValueError("center sample must sit at the region center")
    picked = [center_sample]
    if memory is not None:
        for s in memory:
            if s.order != center_sample.order or not region.contains(s.base):
                continue
            if any(_is_duplicate(s.base, p.base) for p in picked):
                continue
            picked.append(s)
    return Bundle(picked, region)
