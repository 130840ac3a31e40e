"""Measurable regions of R^n with exact volumes.

Besides balls and boxes this module carries the shrinking-target families
used for cusp-excursion witnesses.  A flow-adapted region is described in
the frame moved by the unipotent flow: a point ``x`` with ``x_n != 0`` is
sent to ``w = u_{t0} x`` with ``t0 = -x_{n-1}/x_n``, which kills coordinate
``n-1``; the region constrains ``t0 > 0``, the remaining coordinates of
``w`` and the last two coordinates of ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .flows import FlowSpec, abs_spread, unipotent_apply


def ball_volume(n: int, radius: float = 1.0) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * radius**n


def ball_radius_for_volume(n: int, volume: float) -> float:
    return (volume / ball_volume(n)) ** (1.0 / n)


class Region:
    kind = "region"
    n: int

    def measure(self) -> float:
        raise NotImplementedError

    def contains(self, v) -> bool:
        raise NotImplementedError

    def bounding_box(self):
        """``(lower, upper)`` corners of an axis-parallel box containing the region."""
        raise NotImplementedError

    def bounding_radius(self) -> float:
        lo, hi = self.bounding_box()
        return math.sqrt(sum(max(abs(a), abs(b)) ** 2 for a, b in zip(lo, hi)))

    def sample_uniform_box(self, rng, count):
        lo, hi = (np.array(x) for x in self.bounding_box())
        return lo + (hi - lo) * rng.random((count, self.n))


@dataclass(frozen=True)
class Ball(Region):
    n: int
    radius: float
    kind = "ball"

    @classmethod
    def of_volume(cls, n: int, volume: float) -> "Ball":
        return cls(n, ball_radius_for_volume(n, volume))

    def measure(self):
        return ball_volume(self.n, self.radius)

    def contains(self, v):
        return math.fsum(x * x for x in v) <= self.radius**2

    def bounding_box(self):
        r = self.radius
        return [-r] * self.n, [r] * self.n

    def bounding_radius(self):
        return self.radius


@dataclass(frozen=True)
class Box(Region):
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    kind = "box"

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lower)
        hi = tuple(float(x) for x in self.upper)
        if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("box needs lower < upper in every coordinate")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n(self):
        return len(self.lower)

    @classmethod
    def centered(cls, half_widths: Sequence[float]) -> "Box":
        return cls(tuple(-h for h in half_widths), tuple(half_widths))

    @classmethod
    def cube(cls, n: int, volume: float, anchor: str = "center") -> "Box":
        """Cube of the given volume, centred at 0 or with a corner at 0 (``anchor="corner"``)."""
        s = volume ** (1.0 / n)
        if anchor == "center":
            return cls.centered([s / 2] * n)
        if anchor == "corner":
            return cls((0.0,) * n, (s,) * n)
        raise ValueError(f"unknown anchor {anchor!r}")

    @classmethod
    def square_strip(cls, area: float, aspect: float) -> "Box":
        """Centred rectangle ``|x| <= w, |y| <= h`` of the given area and ``w/h = aspect``."""
        h = math.sqrt(area / (4 * aspect))
        return cls.centered([aspect * h, h])

    def measure(self):
        return math.prod(b - a for a, b in zip(self.lower, self.upper))

    def contains(self, v):
        return all(a <= x <= b for x, a, b in zip(v, self.lower, self.upper))

    def bounding_box(self):
        return list(self.lower), list(self.upper)


# ---------------------------------------------------------------------------
# rate functions for the sharpened shrinking targets


@dataclass(frozen=True)
class RateFunction:
    """``r(t) = t^(1/n) * (log t)^(beta/n)``; ``beta = 0`` is the pure power."""

    n: int
    beta: float = 0.0

    @property
    def name(self):
        return "power" if self.beta == 0 else f"log{self.beta:g}"

    def r(self, t: float) -> float:
        if self.beta == 0:
            return t ** (1.0 / self.n)
        return t ** (1.0 / self.n) * math.log(t) ** (self.beta / self.n)

    def l(self, t: float) -> float:
        return self.r(t) / t ** (1.0 / self.n)

    def log_r(self, log_t: float) -> float:
        return self.log_l(log_t) + log_t / self.n

    def log_l(self, log_t: float) -> float:
        return 0.0 if self.beta == 0 else self.beta / self.n * math.log(log_t)

    @classmethod
    def from_id(cls, rate_id: str, n: int) -> "RateFunction":
        if rate_id == "power":
            return cls(n, 0.0)
        if rate_id.startswith("log"):
            beta = float(rate_id[3:] or 1.0)
            return cls(n, beta)
        raise ValueError(f"unknown rate function {rate_id!r}")


def check_rate_conditions(rate: RateFunction, c: float, delta: float,
                          t_min: float = 1e2, t_max: float = 1e12, points: int = 400) -> dict:
    """Numerical check of the three admissibility conditions on a log grid.

    1. ``l(t) = r(t)/t^(1/n)`` is non-decreasing;
    2. ``r(t)/t^((1+delta)/n)`` decreases towards 0;
    3. ``r(t) t^(2 delta/n) / r(t^(1+2 delta)) >= c`` on the upper half of the grid.

    Everything is done with ``log t`` so the grid can reach far enough for
    the slowly varying factor to settle: the top is at least ``log t = 50/delta``.
    """
    n = rate.n
    if delta <= 0:
        return {"l_nondecreasing": False, "r_over_power_vanishes": False, "liminf_ratio": math.nan,
                "liminf_exceeds_c": False, "ok": False}
    L = np.linspace(math.log(t_min), max(math.log(t_max), 50.0 / delta), points)
    log_l = np.array([rate.log_l(x) for x in L])
    mono = bool(np.all(np.diff(log_l) >= -1e-12))
    upper = L[points // 2:]
    log_decay = np.array([rate.log_r(x) - (1 + delta) / n * x for x in upper])
    slope = float((log_decay[-1] - log_decay[0]) / (upper[-1] - upper[0]))
    # eventually decreasing, with a log-log slope bounded away from 0
    vanishing = bool(np.all(np.diff(log_decay) < 0) and slope < -1e-3 * delta)
    log_ratio = np.array([rate.log_r(x) + 2 * delta / n * x - rate.log_r((1 + 2 * delta) * x) for x in upper])
    liminf = float(np.exp(log_ratio.min()))
    return {
        "l_nondecreasing": mono,
        "r_over_power_vanishes": vanishing,
        "liminf_ratio": liminf,
        "liminf_exceeds_c": liminf >= c * (1 - 1e-12),
        "ok": mono and vanishing and liminf >= c * (1 - 1e-12),
    }


# ---------------------------------------------------------------------------
# flow-adapted regions


class FlowRegion(Region):
    """Common machinery: membership through ``t0 = -x_{n-1}/x_n`` and orbit search."""

    flow: FlowSpec
    n: int

    # subclasses define: moved_bound (on coords i < n-2 of w), last-two bounds,
    # time range and the search widths
    def moved_bound(self) -> float:
        raise NotImplementedError

    def penultimate_range(self) -> tuple[float, float]:
        raise NotImplementedError

    def last_range(self) -> tuple[float, float]:
        raise NotImplementedError

    def time_range(self) -> tuple[float, float]:
        lo1, hi1 = self.penultimate_range()
        lo2, hi2 = self.last_range()
        return lo1 / hi2, hi1 / lo2

    def search_widths(self) -> list[float]:
        w = [self.moved_bound()] * self.n
        w[-2] = 0.0
        w[-1] = self.last_range()[1]
        return w

    def _check(self, v, t0_of):
        n = self.n
        xn, xm = v[n - 1], v[n - 2]
        if xn == 0:
            return False
        lo2, hi2 = self.last_range()
        if not lo2 <= abs(xn) <= hi2:
            return False
        lo1, hi1 = self.penultimate_range()
        if not lo1 <= abs(xm) <= hi1:
            return False
        if xm / xn >= 0:
            return False
        t0 = t0_of(xm, xn)
        w = unipotent_apply(self.flow, t0, list(v))
        b = self.moved_bound()
        return all(abs(w[i]) <= b for i in range(n - 2))

    def contains(self, v) -> bool:
        return self._check([float(x) for x in v], lambda a, b: -a / b)

    def plausibly_contains(self, v, rel: float = 1e-6) -> bool:
        """Float test that never rejects a true member (bounds widened by ``rel``)."""
        n = self.n
        v = [float(x) for x in v]
        xn, xm = v[n - 1], v[n - 2]
        if xn == 0:
            return True
        lo2, hi2 = self.last_range()
        if not lo2 * (1 - rel) <= abs(xn) <= hi2 * (1 + rel):
            return False
        lo1, hi1 = self.penultimate_range()
        if not lo1 * (1 - rel) - 1e-12 <= abs(xm) <= hi1 * (1 + rel) + 1e-12:
            return False
        t0 = -xm / xn
        if t0 < -1e-9:
            return False
        w = unipotent_apply(self.flow, t0, v)
        mag = unipotent_apply(self.flow, abs(t0), [abs(x) for x in v])
        b = self.moved_bound()
        return all(abs(w[i]) <= b * (1 + rel) + 1e-9 * mag[i] for i in range(n - 2))

    def contains_exact(self, v: Sequence[Fraction]) -> bool:
        return self._check([Fraction(x) for x in v], lambda a, b: -a / b)

    def moved_point(self, v):
        """``(t0, u_{t0} v)`` for a point of the region (exact if ``v`` is)."""
        t0 = -v[self.n - 2] / v[self.n - 1]
        return t0, unipotent_apply(self.flow, t0, list(v))

    def bounding_box(self):
        t_lo, t_hi = self.time_range()
        h = abs_spread(self.flow, t_hi, self.search_widths())
        h[-2] = self.penultimate_range()[1]
        h[-1] = self.last_range()[1]
        return [-x for x in h], h

    def lattice_search(self, basis, first: bool = False):
        """Every nonzero lattice point in the region, by exact orbit search."""
        from .lattice import LatticeVector
        from .scan import scan_windows

        t_lo, t_hi = self.time_range()
        mat = basis.matrix
        seen = set()
        out = []
        for win in scan_windows(self.flow, basis, t_lo, t_hi, self.search_widths()):
            for c in win.coeffs:
                if c in seen:
                    continue
                seen.add(c)
                if not self.plausibly_contains(mat @ np.array(c, dtype=float)):
                    continue
                v = win.frame.exact_vector(c)
                if self.contains_exact(v):
                    out.append(LatticeVector(tuple(float(x) for x in v), c))
            if first and out:
                break
        return out


@dataclass(frozen=True)
class JordanRegion(FlowRegion):
    """Shrinking target ``A_k`` adapted to a unipotent flow in Jordan form.

    ``t0 > 0``; ``|w_i| <= k^(-1/n)`` for ``i < n-1``;
    ``|x_{n-1}| <= k^((n-1)/n)``; ``k^(-1/n-eps) <= |x_n| <= k^(-1/n+eps)``.
    For blocks ``(1, 2)`` this is the split family, for ``(3,)`` the sheared
    (regular) one.  Volume ``2^(n-1) (k^eps - k^-eps)``.
    """

    flow: FlowSpec
    k: float
    eps: float

    def __post_init__(self):
        if not self.flow.is_unipotent:
            raise ValueError("flow-adapted regions need a unipotent flow")
        if self.k <= 1:
            raise ValueError("k must exceed 1")
        if not 0 < self.eps < 1.0 / self.n:
            raise ValueError("eps must lie in (0, 1/n)")

    @property
    def n(self):
        return self.flow.n

    @property
    def kind(self):
        bs = self.flow.block_sizes
        if bs == (1, 2):
            return "ak_split"
        if bs == (3,):
            return "ak_regular"
        return "ak_general"

    @classmethod
    def split(cls, k, eps, n: int = 3):
        return cls(FlowSpec.split(n), k, eps)

    @classmethod
    def regular(cls, k, eps, n: int = 3):
        return cls(FlowSpec.regular(n), k, eps)

    def moved_bound(self):
        return self.k ** (-1.0 / self.n)

    def penultimate_range(self):
        return 0.0, self.k ** ((self.n - 1.0) / self.n)

    def last_range(self):
        n, k, e = self.n, self.k, self.eps
        return k ** (-1.0 / n - e), k ** (-1.0 / n + e)

    def time_range(self):
        return 0.0, self.penultimate_range()[1] / self.last_range()[0]

    def measure(self):
        return 2.0 ** (self.n - 1) * (self.k**self.eps - self.k**-self.eps)

    def alpha_bound(self) -> float:
        """Certified ``alpha1`` at the witness time: ``1/((n-1) k^(-1/n+eps))``."""
        return 1.0 / ((self.n - 1) * self.last_range()[1])


@dataclass(frozen=True)
class SharpRegion(FlowRegion):
    """Target adapted to a rate function ``r``: with ``l = r/t^(1/n)``,

    ``|w_i| <= 1/r(k)``; ``k^((n-1)/n)/l(k) <= |x_{n-1}| <= k^((n-1)/n+delta)/l(k)``;
    ``k^(-1/n-delta)/l(k) <= |x_n| <= 1/r(k)``; ``t0 > 0``.
    Volume ``2^(n-1) l(k)^(-n) (k^delta + k^(-delta) - 2)``.
    """

    flow: FlowSpec
    k: float
    delta: float
    rate: RateFunction

    kind = "ak_sharp"

    def __post_init__(self):
        if not self.flow.is_unipotent:
            raise ValueError("flow-adapted regions need a unipotent flow")
        if self.rate.n != self.flow.n:
            raise ValueError("rate function dimension mismatch")
        if self.k <= 1 or self.delta <= 0:
            raise ValueError("need k > 1 and delta > 0")

    @property
    def n(self):
        return self.flow.n

    def moved_bound(self):
        return 1.0 / self.rate.r(self.k)

    def penultimate_range(self):
        n, k, d = self.n, self.k, self.delta
        lk = self.rate.l(k)
        return k ** ((n - 1.0) / n) / lk, k ** ((n - 1.0) / n + d) / lk

    def last_range(self):
        n, k, d = self.n, self.k, self.delta
        lk = self.rate.l(k)
        return k ** (-1.0 / n - d) / lk, 1.0 / self.rate.r(k)

    def measure(self):
        n, k, d = self.n, self.k, self.delta
        return 2.0 ** (n - 1) * self.rate.l(k) ** (-n) * (k**d + k**-d - 2)

    def alpha_bound(self) -> float:
        return self.rate.r(self.k) / (self.n - 1)


def witness_box_2d(k: float) -> Box:
    """``|x| <= sqrt(k)``, ``|y| <= 1/sqrt(k)``: area 4."""
    s = math.sqrt(k)
    return Box.centered([s, 1.0 / s])


def monte_carlo_measure(region: Region, samples: int, rng) -> tuple[float, float]:
    """Hit rate times bounding-box volume, with its standard error."""
    lo, hi = region.bounding_box()
    vol = math.prod(b - a for a, b in zip(lo, hi))
    pts = region.sample_uniform_box(rng, samples)
    hits = sum(1 for p in pts if region.contains(p))
    frac = hits / samples
    return vol * frac, vol * math.sqrt(frac * (1 - frac) / samples)
