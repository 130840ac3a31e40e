"""One-parameter subgroups of SL(n, R) acting on lattice bases.

Unipotent flows are kept in Jordan normal form with the blocks listed
largest-last, so the bottom-right 2x2 corner is always the horocycle
``(1 t; 0 1)``.  Their matrices are evaluated from the closed form
``t^j / j!`` and, where precision matters, in exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .lattice import LatticeBasis, _shortest_from_cols, lll_inplace

OVERFLOW_LIMIT = 1e300
KINDS = ("unipotent", "diagonal", "horocycle_2d", "geodesic_2d")


class FlowOverflowError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FlowSpec:
    kind: str
    n: int
    block_sizes: tuple[int, ...] = ()
    exponents: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown flow kind {self.kind!r}")
        if self.kind in ("horocycle_2d", "geodesic_2d"):
            if self.n != 2:
                raise ValueError(f"{self.kind} is two-dimensional")
        if self.kind == "horocycle_2d":
            object.__setattr__(self, "block_sizes", (2,))
        if self.kind == "geodesic_2d":
            object.__setattr__(self, "exponents", (0.5, -0.5))
        if self.is_unipotent:
            bs = tuple(int(b) for b in self.block_sizes)
            if sum(bs) != self.n or min(bs) < 1:
                raise ValueError(f"block sizes {bs} do not partition {self.n}")
            if max(bs) < 2:
                raise ValueError("a unipotent flow needs a Jordan block of size >= 2")
            if bs[-1] != max(bs):
                raise ValueError("Jordan blocks must be listed largest-last")
            object.__setattr__(self, "block_sizes", bs)
        else:
            ex = tuple(float(e) for e in self.exponents)
            if len(ex) != self.n:
                raise ValueError("need one exponent per coordinate")
            if abs(sum(ex)) > 1e-12:
                raise ValueError("diagonal exponents must sum to zero")
            object.__setattr__(self, "exponents", ex)

    @property
    def is_unipotent(self) -> bool:
        return self.kind in ("unipotent", "horocycle_2d")

    @classmethod
    def unipotent(cls, block_sizes: Sequence[int]) -> "FlowSpec":
        return cls("unipotent", sum(block_sizes), tuple(block_sizes))

    @classmethod
    def regular(cls, n: int) -> "FlowSpec":
        return cls.unipotent((n,))

    @classmethod
    def split(cls, n: int = 3) -> "FlowSpec":
        """A single horocycle block in the bottom-right corner."""
        return cls.unipotent((1,) * (n - 2) + (2,))

    @classmethod
    def horocycle(cls) -> "FlowSpec":
        return cls("horocycle_2d", 2)

    @classmethod
    def geodesic(cls) -> "FlowSpec":
        return cls("geodesic_2d", 2)

    @classmethod
    def diagonal(cls, exponents: Sequence[float]) -> "FlowSpec":
        return cls("diagonal", len(exponents), exponents=tuple(exponents))

    @classmethod
    def default_diagonal(cls, n: int) -> "FlowSpec":
        return cls.diagonal((0.5, -0.5) + (0.0,) * (n - 2))

    def blocks(self):
        """``(offset, size)`` of each Jordan block."""
        out, o = [], 0
        for b in self.block_sizes:
            out.append((o, b))
            o += b
        return out


@dataclass(frozen=True)
class FlowMatrix:
    t: float
    matrix: np.ndarray = field(repr=False)


def flow_matrix(spec: FlowSpec, t: float) -> FlowMatrix:
    """The group element at time ``t``."""
    n = spec.n
    if spec.is_unipotent:
        m = np.zeros((n, n))
        for o, b in spec.blocks():
            for i in range(b):
                for j in range(i, b):
                    m[o + i, o + j] = t ** (j - i) / math.factorial(j - i)
    else:
        ex = np.array(spec.exponents) * t
        if np.max(np.abs(ex)) > 690:
            raise FlowOverflowError(f"diagonal flow overflows at t = {t}")
        m = np.diag(np.exp(ex))
    return FlowMatrix(float(t), m)


def unipotent_apply(spec: FlowSpec, t, v):
    """``u_t v`` by the closed-form polynomials; works for floats and Fractions."""
    out = list(v)
    for o, b in spec.blocks():
        for i in range(b):
            acc = v[o + i]
            tp = 1
            for m in range(1, b - i):
                tp = tp * t
                acc = acc + tp * v[o + i + m] / math.factorial(m)
            out[o + i] = acc
    return out


def flow_apply(spec: FlowSpec, t: float, v):
    if spec.is_unipotent:
        return unipotent_apply(spec, t, v)
    return [x * math.exp(e * t) for x, e in zip(v, spec.exponents)]


def abs_spread(spec: FlowSpec, delta: float, widths: Sequence[float]) -> list[float]:
    """Largest ``|(g_{-tau} w)_i|`` over ``|tau| <= delta`` and ``|w_j| <= widths[j]``."""
    n = spec.n
    if spec.is_unipotent:
        out = list(widths)
        for o, b in spec.blocks():
            for i in range(b):
                acc = widths[o + i]
                for m in range(1, b - i):
                    acc += delta**m / math.factorial(m) * widths[o + i + m]
                out[o + i] = acc
        return out
    return [w * math.exp(abs(e) * delta) for w, e in zip(widths, spec.exponents)]


def apply_flow(spec: FlowSpec, t: float, basis: LatticeBasis) -> LatticeBasis:
    """``g_t`` times the basis (left multiplication)."""
    m = flow_matrix(spec, t).matrix @ basis.matrix
    if not np.all(np.isfinite(m)) or np.max(np.abs(m)) > OVERFLOW_LIMIT:
        raise FlowOverflowError(f"flowed basis overflows at t = {t}")
    # the determinant is 1 exactly; a numerical det of a huge matrix is not
    big = np.max(np.abs(m)) > 1e6
    return LatticeBasis(m, check=basis.check and not big)


# ---------------------------------------------------------------------------
# exact orbit bookkeeping


def exact_time(t) -> Fraction:
    """Exact rational value of a float, Fraction, int or mpmath ``mpf`` time."""
    if isinstance(t, (Fraction, int, float)):
        return Fraction(t)
    man, exp = getattr(t, "man", None), getattr(t, "exp", None)
    if man is not None and exp is not None:
        return Fraction(int(man)) * Fraction(2) ** int(exp)
    return Fraction(t)


def _dyadic(matrix):
    """Write a float matrix as ``Bint / 2**E`` with integer ``Bint`` (row-major)."""
    fr = [[Fraction(float(x)) for x in row] for row in matrix]
    e = 0
    for row in fr:
        for x in row:
            e = max(e, x.denominator.bit_length() - 1)
    ints = [[int(x * (1 << e)) for x in row] for row in fr]
    return ints, e


class OrbitFrame:
    """Reduced bases of ``g_t Lambda`` along an orbit.

    The integer matrix ``C`` (one row per current basis vector, expressed in
    the starting basis) is exact.  Float coordinates are always recomputed
    from ``C`` in exact arithmetic, so there is no drift however far the
    orbit runs.  ``scale`` optionally multiplies coordinate ``i`` by
    ``scale[i]`` (used to make a box look like a cube).
    """

    def __init__(self, spec: FlowSpec, basis: LatticeBasis, scale: Sequence[float] | None = None):
        self.spec = spec
        self.n = basis.n
        self.bint, self.exp = _dyadic(basis.matrix)
        self.scale = None if scale is None else [float(s) for s in scale]
        self.C = [[int(i == j) for j in range(self.n)] for i in range(self.n)]
        self.t = None
        self.R = None

    def exact_vector(self, coeffs) -> list[Fraction]:
        """Exact coordinates of ``basis @ coeffs`` (before the flow)."""
        den = 1 << self.exp
        return [Fraction(sum(r * c for r, c in zip(row, coeffs)), den) for row in self.bint]

    def _int_vector(self, coeffs):
        return [sum(r * c for r, c in zip(row, coeffs)) for row in self.bint]

    def flowed(self, coeffs, t) -> list[float]:
        """Correctly rounded coordinates of ``g_t (basis @ coeffs)`` (times ``scale``)."""
        V = self._int_vector(coeffs)
        spec = self.spec
        if spec.is_unipotent:
            tf = exact_time(t)
            a, b = tf.numerator, tf.denominator
            out = [0.0] * self.n
            for o, bs in spec.blocks():
                top = bs - 1
                den = (1 << self.exp) * b**top * math.factorial(top)
                for i in range(bs):
                    num = 0
                    ap = 1
                    for m in range(0, bs - i):
                        if m:
                            ap *= a
                        num += ap * b ** (top - m) * (math.factorial(top) // math.factorial(m)) * V[o + i + m]
                    out[o + i] = num / den
        else:
            den = 1 << self.exp
            out = [x / den * math.exp(e * float(t)) for x, e in zip(V, spec.exponents)]
        if self.scale is not None:
            out = [x * s for x, s in zip(out, self.scale)]
        return out

    def exact_flowed(self, coeffs, t) -> list[Fraction]:
        """Exact ``u_t (basis @ coeffs)`` for a unipotent flow and rational ``t``."""
        if not self.spec.is_unipotent:
            raise ValueError("exact evaluation needs a unipotent flow")
        return unipotent_apply(self.spec, exact_time(t), self.exact_vector(coeffs))

    def move(self, t) -> list[list[float]]:
        """Jump to time ``t`` and return an LLL-reduced basis there."""
        R = [self.flowed(c, t) for c in self.C]
        if not all(math.isfinite(x) and abs(x) < OVERFLOW_LIMIT for v in R for x in v):
            raise FlowOverflowError(f"orbit overflows at t = {t}")
        lll_inplace(R, self.C)
        self.R = [self.flowed(c, t) for c in self.C]
        self.t = t
        return self.R

    def original_coeffs(self, c) -> tuple[int, ...]:
        out = [0] * self.n
        for ci, row in zip(c, self.C):
            if ci:
                for j, x in enumerate(row):
                    out[j] += ci * x
        return tuple(out)

    def alpha1(self, norm: str = "l2") -> float:
        if self.scale is not None:
            raise ValueError("alpha1 is only meaningful in an unscaled frame")
        coords, _ = _shortest_from_cols(self.R, norm)
        if norm == "l1":
            return 1.0 / sum(abs(x) for x in coords)
        return 1.0 / math.sqrt(sum(x * x for x in coords))


def alpha1_at(spec: FlowSpec, basis: LatticeBasis, t, norm: str = "l2") -> float:
    """``alpha1(g_t basis)`` computed through an exact orbit frame."""
    frame = OrbitFrame(spec, basis)
    frame.move(t)
    return frame.alpha1(norm)


@dataclass
class ExcursionTrace:
    times: list[float]
    alpha1: list[float]
    envelope: list[float]

    def rows(self):
        return list(zip(self.times, self.alpha1, self.envelope))


def excursion_trace(spec: FlowSpec, basis: LatticeBasis, times: Sequence[float], norm: str = "l2") -> ExcursionTrace:
    """``alpha1(g_t basis)`` along sorted positive times.

    ``envelope[i]`` is the running maximum of ``log alpha1`` up to
    ``times[i]`` divided by ``log times[i]`` (NaN while ``t <= 1``).
    """
    times = [float(t) for t in times]
    if any(t <= 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be positive and sorted")
    frame = OrbitFrame(spec, basis)
    vals, env = [], []
    best = -math.inf
    for t in times:
        frame.move(t)
        a = frame.alpha1(norm)
        vals.append(a)
        best = max(best, math.log(a))
        env.append(best / math.log(t) if t > 1 else math.nan)
    return ExcursionTrace(times, vals, env)


def geometric_times(t0: float, horizon: float, ratio: float = 1.05) -> list[float]:
    """``t0 * ratio**k`` up to ``horizon`` (inclusive of the last grid point below it)."""
    if ratio <= 1 or t0 <= 0:
        raise ValueError("need t0 > 0 and ratio > 1")
    out, t = [], float(t0)
    while t <= horizon * (1 + 1e-12):
        out.append(t)
        t *= ratio
    return out
