"""Random unimodular lattices.

Two samplers:

* ``goldstein_mayer``: a uniformly random index-``p`` sublattice of ``Z^n``
  rescaled by ``p^(-1/n)``.  These equidistribute to Haar measure as ``p``
  grows and work in every dimension.
* ``exact_2d``: an exact Haar sample on ``X_2`` from Iwasawa coordinates on
  the standard fundamental domain plus a uniform rotation.

Every trial draws from its own counter-based stream (Philox keyed by
``(seed, trial)``), so trials can run in any order or process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeBasis, lll_inplace

DEFAULT_PRIME = 1_000_003  # smallest prime >= 10**6
MIN_PRIME = 1000


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if p % q == 0:
            return p == q
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic Miller-Rabin for p < 3.3e24
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def next_prime(m: int) -> int:
    p = max(2, m)
    while not is_prime(p):
        p += 1
    return p


class SamplerConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SamplerSpec:
    kind: str = "goldstein_mayer"
    n: int = 2
    p: int = DEFAULT_PRIME
    seed: int = 0

    def __post_init__(self):
        if self.kind == "goldstein_mayer":
            if self.n < 2:
                raise SamplerConfigError("dimension must be >= 2")
            if not is_prime(self.p):
                raise SamplerConfigError(f"p = {self.p} is not prime")
            if self.p < MIN_PRIME:
                raise SamplerConfigError(f"p must be >= {MIN_PRIME}")
        elif self.kind == "exact_2d":
            if self.n != 2:
                raise SamplerConfigError("exact_2d sampler requires n = 2")
        else:
            raise SamplerConfigError(f"unknown sampler kind {self.kind!r}")
        if not 0 <= self.seed < 2**64:
            raise SamplerConfigError("seed must be an unsigned 64-bit integer")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial: Philox with key ``(seed, trial)``."""
    key = np.array([seed % 2**64, trial % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def count_index_p_sublattices(n: int, p: int) -> int:
    return (p**n - 1) // (p - 1)


def sublattice_basis(n: int, p: int, index: int) -> list[list[int]]:
    """Hermite-form basis (as columns) of the ``index``-th sublattice of index ``p``.

    Sublattices of index ``p`` are kernels ``{x : a.x = 0 mod p}`` of nonzero
    functionals ``a`` over ``F_p`` up to scaling.  Scale ``a`` so its last
    nonzero entry (position ``j``) is 1; the ``p^j`` choices for the earlier
    entries are numbered consecutively, ``j = 0, 1, ...``.
    """
    j = 0
    while index >= p**j:
        index -= p**j
        j += 1
    a = []
    for _ in range(j):
        index, r = divmod(index, p)
        a.append(r)
    cols = []
    for i in range(n):
        e = [0] * n
        if i < j:
            e[i] = 1
            e[j] = -a[i]
        elif i == j:
            e[j] = p
        else:
            e[i] = 1
        cols.append(e)
    return cols


def random_sublattice(n: int, p: int, rng: np.random.Generator) -> list[list[float]]:
    """Columns of an LLL-reduced basis of a uniform index-``p`` sublattice of ``Z^n``."""
    total = count_index_p_sublattices(n, p)
    if total < 2**63:
        index = int(rng.integers(0, total))
    else:
        index = int.from_bytes(rng.bytes(16 + total.bit_length() // 8), "little") % total
    cols = [[float(x) for x in c] for c in sublattice_basis(n, p, index)]
    # integer entries below 2**53, so the reduction is exact
    lll_inplace(cols)
    return cols


def sample_gm(spec: SamplerSpec, rng: np.random.Generator) -> LatticeBasis:
    """Uniform index-``p`` sublattice of ``Z^n`` scaled to covolume 1, LLL-reduced."""
    if spec.kind != "goldstein_mayer":
        raise SamplerConfigError("sample_gm needs a goldstein_mayer spec")
    cols = random_sublattice(spec.n, spec.p, rng)
    m = np.array(cols).T * spec.p ** (-1.0 / spec.n)
    return LatticeBasis(m)


def sample_exact_2d(spec: SamplerSpec, rng: np.random.Generator) -> LatticeBasis:
    """Exact Haar sample on ``X_2``.

    ``x`` has marginal density proportional to ``1/sqrt(1-x^2)`` on
    ``[-1/2, 1/2]``, i.e. ``x = sin(phi)`` with ``phi`` uniform on
    ``[-pi/6, pi/6]``; given ``x``, ``y`` has density ``y0/y^2`` on
    ``[y0, inf)``, ``y0 = sqrt(1-x^2)``.  The basis ``(1, 0), (x, y)`` is
    scaled by ``y^(-1/2)`` and rotated by a uniform angle.
    """
    if spec.n != 2:
        raise SamplerConfigError("exact_2d requires n = 2")
    phi = rng.uniform(-math.pi / 6, math.pi / 6)
    x = math.sin(phi)
    y0 = math.sqrt(1.0 - x * x)
    u = rng.random()
    y = y0 / (1.0 - u)
    theta = rng.uniform(0.0, 2 * math.pi)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    m = rot @ (np.array([[1.0, x], [0.0, y]]) / math.sqrt(y))
    return LatticeBasis(m)


def draw(spec: SamplerSpec, rng: np.random.Generator) -> LatticeBasis:
    if spec.kind == "exact_2d":
        return sample_exact_2d(spec, rng)
    return sample_gm(spec, rng)


def sample_trial(spec: SamplerSpec, trial: int) -> LatticeBasis:
    """The lattice of trial ``trial`` under ``spec.seed``."""
    return draw(spec, trial_rng(spec.seed, trial))


def sample_many(spec: SamplerSpec, count: int, start: int = 0) -> list[LatticeBasis]:
    return [sample_trial(spec, i) for i in range(start, start + count)]
