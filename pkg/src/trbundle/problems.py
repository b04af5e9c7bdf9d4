"""Seeded test problems: max-of-quartics, sum-of-absolute-quartics, max
eigenvalue, the oscillating 1-d growth example, and the 1-d quadratic toy.

Each instance is immutable, serializable to a self-describing text file, and
exposes an oracle plus ground-truth metadata (minimizer, growth order) where
known.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .geometry import Point, as_point, derive_rng
from .oracle import OracleInterface, OracleSample

_HESS_REG = 0.1        # ridge added to B^T B
_C_RANGE = (0.5, 1.5)  # quartic coefficient range
_RAY_CHECKS = 64       # boundedness heuristic rays for the eigenvalue family


class Family(enum.Enum):
    MAX_QUARTIC = "max-quartic"
    SUM_ABS_QUARTIC = "sum-abs-quartic"
    MAX_EIGENVALUE = "max-eig"
    SINE_GROWTH = "sine-growth"
    TOY_QUADRATIC = "toy-quadratic"


@dataclass(frozen=True)
class ProblemInstance:
    family: Family
    n: int
    m: int
    seed: int
    data: dict
    growth_order: Optional[int]
    x_star: Optional[Point]
    f_star: Optional[float]

    def with_reference_minimizer(self, x_star: Point, f_star: float) -> "ProblemInstance":
        """Attach a reference minimizer computed by a long high-accuracy run."""
        return replace(self, x_star=as_point(x_star), f_star=float(f_star))


# ---------------------------------------------------------------------------
# generation


def _draw_quartic_data(n: int, m: int, rng: np.random.Generator) -> dict:
    k = min(n + 1, m)
    for _ in range(64):
        G = rng.standard_normal((m, n))
        lam = rng.uniform(0.5, 1.5, k)
        lam /= lam.sum()
        G[:k] -= lam @ G[:k]  # now sum_i lam_i g_i = 0 with lam strictly positive
        diffs = G[1:k] - G[0]
        if k == 1 or np.linalg.matrix_rank(diffs, tol=1e-10) == k - 1:
            break
    else:
        raise RuntimeError("could not draw affinely independent gradients")
    B = rng.standard_normal((m, n, n)) / math.sqrt(n)
    H = np.einsum("mji,mjk->mik", B, B) + _HESS_REG * np.eye(n)
    c = rng.uniform(*_C_RANGE, m)
    return {"g": G, "H": H, "c": c}


def _draw_eig_data(n: int, m: int, rng: np.random.Generator) -> dict:
    def sym(mat):
        return (mat + mat.T) / 2.0

    A = np.stack([sym(rng.standard_normal((m, m))) for _ in range(n + 1)])

    def unbounded_ray_found():
        for _ in range(_RAY_CHECKS):
            d = rng.standard_normal(n)
            d /= np.linalg.norm(d)
            S = np.einsum("i,ijk->jk", d, A[1:])
            w = np.linalg.eigvalsh(S)
            if w[0] > 0 or w[-1] < 0:  # sum definite along +/-d: f unbounded below
                return True
        return False

    if unbounded_ray_found():
        # traceless coefficient matrices cannot combine to a definite matrix
        for i in range(1, n + 1):
            A[i] -= (np.trace(A[i]) / m) * np.eye(m)
        if unbounded_ray_found():
            raise RuntimeError("boundedness repair failed")
    return {"A": A}


def generate(family: Family, n: int, m: int = 0, seed: int = 0, p: Optional[int] = None) -> ProblemInstance:
    """Draw a seeded instance of the given family."""
    if n < 1:
        raise ValueError("n must be >= 1")
    salt = list(Family).index(family)
    rng = derive_rng(seed, salt)

    if family in (Family.MAX_QUARTIC, Family.SUM_ABS_QUARTIC):
        if m < 1:
            raise ValueError("m must be >= 1")
        data = _draw_quartic_data(n, m, rng)
        growth = 1 if n < m else 2
        return ProblemInstance(family, n, m, seed, data, growth,
                               x_star=np.zeros(n), f_star=0.0)

    if family is Family.MAX_EIGENVALUE:
        if m < 1:
            raise ValueError("m (matrix size) must be >= 1")
        data = _draw_eig_data(n, m, rng)
        return ProblemInstance(family, n, m, seed, data, growth_order=None,
                               x_star=None, f_star=None)

    if family is Family.SINE_GROWTH:
        if n != 1:
            raise ValueError("sine-growth is one-dimensional")
        p = 1 if p is None else int(p)
        if p not in (1, 2, 4):
            raise ValueError("sine-growth supports p in {1, 2, 4}")
        return ProblemInstance(family, 1, 0, seed, {"p": p}, growth_order=p,
                               x_star=np.zeros(1), f_star=0.0)

    if family is Family.TOY_QUADRATIC:
        if n != 1:
            raise ValueError("toy-quadratic is one-dimensional")
        return ProblemInstance(family, 1, 0, seed, {}, growth_order=2,
                               x_star=np.zeros(1), f_star=0.0)

    raise ValueError(f"unknown family {family!r}")


def default_start(instance: ProblemInstance) -> Point:
    """Initial point used for the reference experiments of each family."""
    if instance.family in (Family.MAX_QUARTIC, Family.MAX_EIGENVALUE):
        return np.ones(instance.n)
    if instance.family is Family.SUM_ABS_QUARTIC:
        x0 = np.ones(instance.n)
        x0[0] = 2.0
        return x0
    return np.array([0.5])


# ---------------------------------------------------------------------------
# oracles


class _QuarticBase(OracleInterface):
    def __init__(self, instance: ProblemInstance):
        self.G = instance.data["g"]
        self.H = instance.data["H"]
        self.c = instance.data["c"]
        self._n = instance.n
        self._eye = np.eye(instance.n)

    @property
    def dim(self) -> int:
        return self._n

    def _terms(self, x: Point) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        quad = 0.5 * np.einsum("i,mij,j->m", x, self.H, x)
        r2 = float(x @ x)
        return self.G @ x + quad + (self.c / 24.0) * r2 * r2

    def _terms_batch(self, X: np.ndarray) -> np.ndarray:
        lin = X @ self.G.T
        quad = 0.5 * np.einsum("pi,mij,pj->pm", X, self.H, X)
        r2 = np.einsum("pi,pi->p", X, X)
        return lin + quad + np.outer(r2 * r2, self.c / 24.0)

    def _term_grads(self, x: Point) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        return self.G + np.einsum("mij,j->mi", self.H, x) + np.outer(self.c / 6.0 * r2, x)

    def _term_hess(self, i: int, x: Point) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        return self.H[i] + (self.c[i] / 6.0) * (r2 * self._eye + 2.0 * np.outer(x, x))


class MaxQuarticOracle(_QuarticBase):
    """max_i of the quartic terms; active branch = first argmax."""

    def query(self, x: Point, order: int) -> OracleSample:
        x = as_point(x)
        terms = self._terms(x)
        i = int(np.argmax(terms))
        grad = self._term_grads(x)[i]
        hess = self._term_hess(i, x) if order == 2 else None
        return OracleSample(base=x, value=float(terms[i]), grad=grad, hess=hess,
                            order=order, selector_tag=i)

    def eval_value(self, x: Point) -> float:
        terms = self._terms(np.asarray(x, dtype=float))
        return float(terms[int(np.argmax(terms))])

    def eval_values(self, points: np.ndarray) -> np.ndarray:
        return self._terms_batch(np.asarray(points, dtype=float)).max(axis=1)

    def branch_value(self, tag: int, z: Point) -> float:
        return float(self._terms(np.asarray(z, dtype=float))[tag])


class SumAbsQuarticOracle(_QuarticBase):
    """sum_i |term_i|; branches are sign patterns, encoded as a bitmask tag."""

    def _signs(self, terms: np.ndarray) -> np.ndarray:
        return np.where(terms >= 0.0, 1.0, -1.0)  # zero terms count as +1

    def query(self, x: Point, order: int) -> OracleSample:
        x = as_point(x)
        terms = self._terms(x)
        s = self._signs(terms)
        grad = s @ self._term_grads(x)
        hess = None
        if order == 2:
            r2 = float(x @ x)
            hess = (np.einsum("m,mij->ij", s, self.H)
                    + (float(s @ self.c) / 6.0) * (r2 * self._eye + 2.0 * np.outer(x, x)))
        tag = sum(1 << i for i in range(len(s)) if s[i] < 0)
        return OracleSample(base=x, value=float(s @ terms), grad=grad, hess=hess,
                            order=order, selector_tag=tag)

    def eval_value(self, x: Point) -> float:
        terms = self._terms(np.asarray(x, dtype=float))
        return float(self._signs(terms) @ terms)

    def eval_values(self, points: np.ndarray) -> np.ndarray:
        return np.abs(self._terms_batch(np.asarray(points, dtype=float))).sum(axis=1)

    def branch_value(self, tag: int, z: Point) -> float:
        terms = self._terms(np.asarray(z, dtype=float))
        s = np.array([-1.0 if tag >> i & 1 else 1.0 for i in range(len(terms))])
        return float(s @ terms)


class MaxEigOracle(OracleInterface):
    """Largest eigenvalue of A_0 + sum_i x_i A_i.

    The sampled branch is u^T (A_0 + sum x_i A_i) u for the (sign-fixed) top
    eigenvector u, which is affine in x, so the branch Hessian is zero.
    """

    def __init__(self, instance: ProblemInstance):
        self.A = instance.data["A"]
        self._n = instance.n
        self._m = instance.m

    @property
    def dim(self) -> int:
        return self._n

    def _matrix(self, x: Point) -> np.ndarray:
        return self.A[0] + np.einsum("i,ijk->jk", np.asarray(x, dtype=float), self.A[1:])

    def _top_pair(self, x: Point):
        w, V = np.linalg.eigh(self._matrix(x))
        u = V[:, -1]
        nz = np.nonzero(np.abs(u) > 1e-12)[0]
        if nz.size and u[nz[0]] < 0:
            u = -u
        return float(w[-1]), u

    def query(self, x: Point, order: int) -> OracleSample:
        x = as_point(x)
        val, u = self._top_pair(x)
        grad = np.einsum("j,ijk,k->i", u, self.A[1:], u)
        hess = np.zeros((self._n, self._n)) if order == 2 else None
        return OracleSample(base=x, value=val, grad=grad, hess=hess, order=order,
                            selector_tag=int(np.argmax(np.abs(u))))

    def eval_value(self, x: Point) -> float:
        return self._top_pair(np.asarray(x, dtype=float))[0]

    def eval_values(self, points: np.ndarray) -> np.ndarray:
        X = np.asarray(points, dtype=float)
        out = np.empty(X.shape[0])
        chunk = max(1, int(2_000_000 / (self._m * self._m)))
        for lo in range(0, X.shape[0], chunk):
            hi = min(lo + chunk, X.shape[0])
            M = self.A[0] + np.einsum("pi,ijk->pjk", X[lo:hi], self.A[1:])
            out[lo:hi] = np.linalg.eigvalsh(M)[:, -1]
        return out


class SineGrowthOracle(OracleInterface):
    """x^{p+1} sin(1/x) + |x|^p / p (0 at x = 0); one-dimensional."""

    def __init__(self, instance: ProblemInstance):
        self.p = instance.data["p"]

    @property
    def dim(self) -> int:
        return 1

    def _pieces(self, t: float):
        p = self.p
        s, c = math.sin(1.0 / t), math.cos(1.0 / t)
        u = t ** (p + 1) * s
        du = (p + 1) * t ** p * s - t ** (p - 1) * c
        d2u = p * (p + 1) * t ** (p - 1) * s - 2 * p * t ** (p - 2) * c - t ** (p - 3) * s
        return u, du, d2u

    def query(self, x: Point, order: int) -> OracleSample:
        x = as_point(x)
        t = float(x[0])
        p = self.p
        tag = 0 if p % 2 == 0 else (1 if t >= 0 else -1)
        if t == 0.0:
            val, g, h = 0.0, (1.0 if p == 1 else 0.0), 0.0
        else:
            u, du, d2u = self._pieces(t)
            sgn = 1.0 if t > 0 else -1.0
            val = u + abs(t) ** p / p
            g = du + sgn * abs(t) ** (p - 1)
            h = d2u + (p - 1) * abs(t) ** (p - 2)
        hess = np.array([[h]]) if order == 2 else None
        return OracleSample(base=x, value=val, grad=np.array([g]), hess=hess,
                            order=order, selector_tag=tag)

    def eval_value(self, x: Point) -> float:
        t = float(np.asarray(x, dtype=float).reshape(-1)[0])
        if t == 0.0:
            return 0.0
        return t ** (self.p + 1) * math.sin(1.0 / t) + abs(t) ** self.p / self.p

    def eval_values(self, points: np.ndarray) -> np.ndarray:
        t = np.asarray(points, dtype=float).reshape(-1)
        out = np.zeros_like(t)
        nz = t != 0.0
        tz = t[nz]
        out[nz] = tz ** (self.p + 1) * np.sin(1.0 / tz) + np.abs(tz) ** self.p / self.p
        return out

    def branch_value(self, tag: int, z: Point) -> float:
        t = float(np.asarray(z, dtype=float).reshape(-1)[0])
        p = self.p
        u = 0.0 if t == 0.0 else t ** (p + 1) * math.sin(1.0 / t)
        if p % 2 == 0:
            return u + t ** p / p
        return u + tag * t ** p / p


class ToyQuadraticOracle(OracleInterface):
    """f(x) = x^2 in one dimension."""

    @property
    def dim(self) -> int:
        return 1

    def query(self, x: Point, order: int) -> OracleSample:
        x = as_point(x)
        t = float(x[0])
        hess = np.array([[2.0]]) if order == 2 else None
        return OracleSample(base=x, value=t * t, grad=np.array([2.0 * t]), hess=hess,
                            order=order, selector_tag=0)

    def eval_value(self, x: Point) -> float:
        t = float(np.asarray(x, dtype=float).reshape(-1)[0])
        return t * t

    def eval_values(self, points: np.ndarray) -> np.ndarray:
        t = np.asarray(points, dtype=float).reshape(-1)
        return t * t

    def branch_value(self, tag: int, z: Point) -> float:
        return self.eval_value(z)


_ORACLES = {
    Family.MAX_QUARTIC: MaxQuarticOracle,
    Family.SUM_ABS_QUARTIC: SumAbsQuarticOracle,
    Family.MAX_EIGENVALUE: MaxEigOracle,
    Family.SINE_GROWTH: SineGrowthOracle,
}


def oracle_of(instance: ProblemInstance) -> OracleInterface:
    if instance.family is Family.TOY_QUADRATIC:
        return ToyQuadraticOracle()
    return _ORACLES[instance.family](instance)


# ---------------------------------------------------------------------------
# serialization (self-describing text, 17 significant digits)

_FMT = "%.17g"


def _fmt_row(row) -> str:
    return " ".join(_FMT % v for v in np.atleast_1d(row))


def serialize(instance: ProblemInstance) -> str:
    lines = ["trbundle-instance v1"]
    lines.append(f"family {instance.family.value}")
    lines.append(f"n {instance.n}")
    lines.append(f"m {instance.m}")
    lines.append(f"seed {instance.seed}")
    lines.append(f"growth_order {instance.growth_order if instance.growth_order is not None else 'none'}")
    lines.append(f"f_star {_FMT % instance.f_star if instance.f_star is not None else 'none'}")
    lines.append(f"x_star {_fmt_row(instance.x_star) if instance.x_star is not None else 'none'}")
    if instance.family in (Family.MAX_QUARTIC, Family.SUM_ABS_QUARTIC):
        lines.append("g")
        lines.extend(_fmt_row(r) for r in instance.data["g"])
        lines.append("H")
        for Hi in instance.data["H"]:
            lines.extend(_fmt_row(r) for r in Hi)
        lines.append("c")
        lines.append(_fmt_row(instance.data["c"]))
    elif instance.family is Family.MAX_EIGENVALUE:
        lines.append("A")
        for Ai in instance.data["A"]:
            lines.extend(_fmt_row(r) for r in Ai)
    elif instance.family is Family.SINE_GROWTH:
        lines.append(f"p {instance.data['p']}")
    return "\n".join(lines) + "\n"


class InstanceParseError(ValueError):
    pass


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.idx = 0

    def next(self, what: str) -> str:
        while self.idx < len(self.lines):
            line = self.lines[self.idx].strip()
            self.idx += 1
            if line:
                return line
        raise InstanceParseError(f"line {self.idx + 1}: unexpected end of file while reading {what}")

    def key(self, name: str) -> str:
        line = self.next(name)
        parts = line.split(None, 1)
        if parts[0] != name:
            raise InstanceParseError(f"line {self.idx}: expected '{name}', got '{parts[0]}'")
        return parts[1] if len(parts) > 1 else ""

    def floats(self, count: int, what: str) -> np.ndarray:
        line = self.next(what)
        try:
            vals = np.array([float(v) for v in line.split()])
        except ValueError as exc:
            raise InstanceParseError(f"line {self.idx}: bad number in {what}: {exc}") from None
        if vals.size != count:
            raise InstanceParseError(f"line {self.idx}: expected {count} values for {what}, got {vals.size}")
        return vals

    def matrix(self, rows: int, cols: int, what: str) -> np.ndarray:
        return np.stack([self.floats(cols, what) for _ in range(rows)])


def deserialize(text: str) -> ProblemInstance:
    r = _Reader(text)
    magic = r.next("header")
    if magic != "trbundle-instance v1":
        raise InstanceParseError("line 1: not a trbundle instance file")
    try:
        family = Family(r.key("family"))
    except ValueError as exc:
        raise InstanceParseError(f"line {r.idx}: {exc}") from None
    n = int(r.key("n"))
    m = int(r.key("m"))
    seed = int(r.key("seed"))
    go_raw = r.key("growth_order")
    growth = None if go_raw == "none" else int(go_raw)
    fs_raw = r.key("f_star")
    f_star = None if fs_raw == "none" else float(fs_raw)
    xs_raw = r.key("x_star")
    x_star = None if xs_raw == "none" else np.array([float(v) for v in xs_raw.split()])
    if x_star is not None and x_star.size != n:
        raise InstanceParseError(f"line {r.idx}: x_star has {x_star.size} entries, expected {n}")

    data: dict = {}
    if family in (Family.MAX_QUARTIC, Family.SUM_ABS_QUARTIC):
        r.key("g")
        data["g"] = r.matrix(m, n, "g")
        r.key("H")
        data["H"] = np.stack([r.matrix(n, n, f"H[{i}]") for i in range(m)])
        r.key("c")
        data["c"] = r.floats(m, "c")
    elif family is Family.MAX_EIGENVALUE:
        r.key("A")
        data["A"] = np.stack([r.matrix(m, m, f"A[{i}]") for i in range(n + 1)])
    elif family is Family.SINE_GROWTH:
        data["p"] = int(r.key("p"))

    return ProblemInstance(family, n, m, seed, data, growth, x_star, f_star)


def save_instance(instance: ProblemInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(instance))


def load_instance(path) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return deserialize(fh.read())
