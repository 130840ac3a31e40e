"""Siegel and primitive transforms, zeta values and moment estimators.

All probabilities here are with respect to the *normalized* Haar
probability measure.  The two-dimensional primitive-vector bounds are
classically stated for the Haar measure of total mass ``zeta(2)``; the
conversion (multiply a probability by ``zeta(2)``) is done explicitly and
both numbers are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Sequence

import numpy as np

from .harness import mean_and_stderr, run_trials
from .lattice import LatticeBasis, alpha1, region_points
from .regions import Ball, Box, Region, ball_volume
from .sampling import SamplerSpec, sample_trial

ZETA_TOL = 1e-12
# "a sufficiently large" for the two-dimensional deviation bound
THETA_MIN_AREA = 100.0


# ---------------------------------------------------------------------------
# zeta and the Rogers constant


def zeta_with_error(s: float, tol: float = ZETA_TOL) -> tuple[float, float]:
    """``zeta(s)`` for real ``s > 1`` by direct summation, with a rigorous error bound.

    The tail ``sum_{k > N} k^-s`` lies between ``int_{N+1}^inf`` and
    ``int_N^inf`` of ``x^-s``; the midpoint of that bracket is added and half
    its width is the error bound.  ``N`` is the smallest value making the
    bound at most ``tol``.
    """
    if s <= 1:
        raise ValueError("the series diverges for s <= 1")

    def half_width(N):
        return (N ** (1 - s) - (N + 1) ** (1 - s)) / (2 * (s - 1))

    N = max(10, int(math.ceil((1.0 / (2 * tol)) ** (1.0 / s))))
    while half_width(N) > tol:
        N = int(N * 1.1) + 1
    k = np.arange(1, N + 1, dtype=float)
    head = math.fsum((k[::-1]) ** (-s))
    tail = (N ** (1 - s) + (N + 1) ** (1 - s)) / (2 * (s - 1))
    return head + tail, half_width(N)


def zeta(s: float, tol: float = ZETA_TOL) -> float:
    return zeta_with_error(s, tol)[0]


def rogers_constant(n: int) -> float:
    """``C_n = 8 zeta(n-1) / zeta(n)``, the coprime-pair constant of the second moment."""
    if n < 3:
        raise ValueError("C_n needs n >= 3 (zeta(1) diverges)")
    return 8.0 * zeta(n - 1) / zeta(n)


def totients(K: int) -> list[int]:
    """``phi(0..K)`` by a sieve (``phi(0)`` set to 0)."""
    phi = list(range(K + 1))
    for p in range(2, K + 1):
        if phi[p] == p:
            for m in range(p, K + 1, p):
                phi[m] -= phi[m] // p
    return phi


def totient_series(n: int, K: int) -> Fraction:
    """``8 sum_{k <= K} phi(k) / k^n`` exactly."""
    phi = totients(K)
    return 8 * sum((Fraction(phi[k], k**n) for k in range(1, K + 1)), Fraction(0))


def coprime_pair_counts(K: int) -> list[int]:
    """Number of coprime pairs ``(k, q)`` with ``max(|k|, |q|) = m``, for ``m = 0..K``.

    Brute force over the whole square ``[-K, K]^2``.
    """
    r = np.arange(-K, K + 1)
    kk, qq = np.meshgrid(r, r, indexing="ij")
    g = np.gcd(kk, qq)
    m = np.maximum(np.abs(kk), np.abs(qq))
    sel = g == 1
    return [int(c) for c in np.bincount(m[sel], minlength=K + 1)]


def coprime_pair_sum(n: int, K: int, exact: bool = False):
    """``sum over coprime (k, q), 1 <= max(|k|,|q|) <= K, of max(|k|,|q|)^-n``."""
    if n < 3:
        raise ValueError("need n >= 3")
    if K < 1:
        raise ValueError("need K >= 1")
    counts = coprime_pair_counts(K)
    total = sum((Fraction(c, m**n) for m, c in enumerate(counts) if m >= 1 and c), Fraction(0))
    return total if exact else float(total)


def coprime_tail_bound(n: int, K: int) -> float:
    """Upper bound for the omitted part ``8 sum_{k > K} phi(k)/k^n <= 8 K^(2-n)/(n-2)``."""
    return 8.0 * K ** (2 - n) / (n - 2)


def rogers_second_moment_rhs(a: float, n: int) -> float:
    """Second moment ``a^2 + C_n a`` of the Siegel transform of a ball of volume ``a``."""
    if a <= 0:
        raise ValueError("volume must be positive")
    return a * a + rogers_constant(n) * a


def ball_second_moment(a: float, n: int) -> float:
    """Exact ``E[f^2]`` for a ball of volume ``a``: ``a^2 + a (4 zeta(n-1)/zeta(n) - 2)``.

    Dependent pairs ``(v, w)`` of nonzero lattice vectors are ``(k u, q u)``
    with ``(k, q)`` coprime, both nonzero, counted once per sign class.
    ``a^2 + C_n a`` bounds this from above.
    """
    if a <= 0:
        raise ValueError("volume must be positive")
    if n < 3:
        raise ValueError("need n >= 3")
    return a * a + a * (4.0 * zeta(n - 1) / zeta(n) - 2.0)


def nonzero_coprime_half_sum(n: int, K: int) -> float:
    """``1/2 sum max(|k|,|q|)^-n`` over coprime pairs with ``k, q != 0`` and ``max <= K`` (brute force)."""
    r = np.arange(-K, K + 1)
    kk, qq = np.meshgrid(r, r, indexing="ij")
    sel = (kk != 0) & (qq != 0) & (np.gcd(kk, qq) == 1)
    m = np.maximum(np.abs(kk), np.abs(qq))[sel].astype(float)
    return 0.5 * math.fsum(m ** (-n))


def avoidance_bound(n: int, measure: float) -> float:
    """Upper bound on the probability that a random lattice misses a set of this measure."""
    if measure <= 0:
        raise ValueError("the bound is vacuous for measure 0")
    if n == 2:
        return 16 * zeta(2) ** 2 / measure
    return rogers_constant(n) / measure


# ---------------------------------------------------------------------------
# transforms


def siegel_transform(region: Region, basis: LatticeBasis) -> int:
    """Number of nonzero lattice points in the region."""
    return len(region_points(basis, region))


def primitive_transform(region: Region, basis: LatticeBasis) -> int:
    """Number of primitive lattice points in the region (planar lattices only)."""
    if basis.n != 2:
        raise ValueError("the primitive transform is implemented for n = 2 only")
    return sum(1 for v in region_points(basis, region) if v.is_primitive())


@dataclass
class MomentReport:
    """Sample mean and second moment of a per-lattice statistic, with targets."""

    sample_count: int
    mean: float
    second_moment: float
    mean_stderr: float
    second_stderr: float
    targets: dict[str, float] = field(default_factory=dict)
    extra: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_values(cls, values: Sequence[float], **targets) -> "MomentReport":
        a = np.asarray(values, dtype=float)
        m, se = mean_and_stderr(a)
        m2, se2 = mean_and_stderr(a * a)
        return cls(int(a.size), m, m2, se, se2, dict(targets))

    def mean_within(self, target: str = "mean", sigmas: float = 4.0) -> bool:
        return abs(self.mean - self.targets[target]) <= sigmas * self.mean_stderr

    def second_within(self, target: str = "second", sigmas: float = 4.0) -> bool:
        return abs(self.second_moment - self.targets[target]) <= sigmas * self.second_stderr


def _count_trial(spec, region, primitive, trial):
    b = sample_trial(spec, trial)
    return primitive_transform(region, b) if primitive else siegel_transform(region, b)


def transform_counts(region: Region, sampler: SamplerSpec, trials: int, threads=None,
                     primitive: bool = False) -> list[int]:
    return run_trials(partial(_count_trial, sampler, region, primitive), trials, threads)


def siegel_moments(region: Region, sampler: SamplerSpec, trials: int, threads=None) -> MomentReport:
    """Monte Carlo mean and second moment of the Siegel transform of ``region``.

    Targets: ``mean`` is the measure; for a ball in dimension >= 3,
    ``second`` is ``a^2 + C_n a`` and ``second_exact`` the exact value
    from :func:`ball_second_moment`.
    """
    counts = transform_counts(region, sampler, trials, threads)
    rep = MomentReport.from_values(counts, mean=region.measure())
    if isinstance(region, Ball) and region.n >= 3:
        rep.targets["second"] = rogers_second_moment_rhs(region.measure(), region.n)
        rep.targets["second_exact"] = ball_second_moment(region.measure(), region.n)
    return rep


def _avoid_trial(spec, regions, trial):
    b = sample_trial(spec, trial)
    return tuple(not region_points(b, r, first=True) for r in regions)


def avoidance_indicators(regions: Sequence[Region], sampler: SamplerSpec, trials: int,
                         threads=None) -> list[tuple[bool, ...]]:
    """Per trial, whether the lattice misses each region (same lattices for all regions)."""
    return run_trials(partial(_avoid_trial, sampler, tuple(regions)), trials, threads)


def _binomial_report(flags, **targets) -> MomentReport:
    a = np.asarray(flags, dtype=float)
    p = float(a.mean()) if a.size else 0.0
    se = math.sqrt(p * (1 - p) / a.size)
    return MomentReport(int(a.size), p, p, se, se, dict(targets))


def avoidance_probability(region: Region, sampler: SamplerSpec, trials: int, threads=None) -> MomentReport:
    """Empirical probability of missing ``region`` with its binomial stderr and the analytic bound."""
    return avoidance_probabilities([region], sampler, trials, threads)[0]


def avoidance_probabilities(regions: Sequence[Region], sampler: SamplerSpec, trials: int,
                            threads=None) -> list[MomentReport]:
    """Coupled version of :func:`avoidance_probability` (one lattice sample for all regions)."""
    if trials < 100:
        raise ValueError("need at least 100 trials")
    for r in regions:
        if r.measure() <= 0:
            raise ValueError("region of measure 0")
    flags = avoidance_indicators(regions, sampler, trials, threads)
    out = []
    for j, r in enumerate(regions):
        out.append(_binomial_report([f[j] for f in flags], bound=avoidance_bound(r.n, r.measure())))
    return out


def _alpha_trial(spec, trial):
    return alpha1(sample_trial(spec, trial))


def sample_alpha1(sampler: SamplerSpec, trials: int, threads=None) -> np.ndarray:
    return np.array(run_trials(partial(_alpha_trial, sampler), trials, threads))


def tail_bound_check(r_values: Sequence[float], sampler: SamplerSpec, trials: int,
                     threads=None) -> dict[float, MomentReport]:
    """Empirical ``P(log alpha1 > r)`` against ``omega_n e^(-n r)`` for each ``r``."""
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    n = sampler.n
    logs = np.log(sample_alpha1(sampler, trials, threads))
    return {r: _binomial_report(logs > r, bound=ball_volume(n) * math.exp(-n * r)) for r in r_values}


def theta_deviation_check(a: float, sampler: SamplerSpec, trials: int, region: Region | None = None,
                          threads=None) -> MomentReport:
    """Primitive-count statistics for a planar region of area ``a`` (default: centred square).

    ``mean`` is the probability-normalized mean of ``T_A`` (target
    ``a / zeta(2)``).  ``extra`` holds

    * ``deviation``: ``zeta(2) E[(T_A - a/zeta(2))^2]`` (total-mass-``zeta(2)``
      convention) with stderr ``deviation_stderr``, target ``16 a``;
    * ``p_empty``: ``P(T_A = 0)`` with stderr, and ``p_empty_mass``, the same
      event measured with total mass ``zeta(2)``; target ``16 zeta(2)^2 / a``.
    """
    if sampler.n != 2:
        raise ValueError("theta_deviation_check is planar")
    if a < THETA_MIN_AREA:
        raise ValueError(f"area must be at least {THETA_MIN_AREA:g}")
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    if region is None:
        region = Box.cube(2, a)
    if abs(region.measure() - a) > 1e-9 * a:
        raise ValueError("region area does not match a")
    z2 = zeta(2)
    counts = np.array(transform_counts(region, sampler, trials, threads, primitive=True), dtype=float)
    rep = MomentReport.from_values(counts, mean=a / z2)
    dev = z2 * (counts - a / z2) ** 2
    d, dse = mean_and_stderr(dev)
    empty = counts == 0
    p = float(empty.mean())
    pse = math.sqrt(p * (1 - p) / counts.size)
    rep.targets.update(deviation=16 * a, p_empty=16 * z2**2 / a)
    rep.extra.update(deviation=d, deviation_stderr=dse, p_empty=p, p_empty_stderr=pse,
                     p_empty_mass=z2 * p, p_empty_mass_stderr=z2 * pse)
    return rep
