"""Exhaustive search for lattice vectors that become small along an orbit.

Given widths ``W`` and a time interval ``[t_lo, t_hi]`` we want every
lattice vector ``v`` such that ``|(g_t v)_i| <= W_i`` for some ``t`` in the
interval.  The interval is cut into windows of half-length ``Delta``; if
``t = t_j + tau`` with ``|tau| <= Delta`` then ``g_{t_j} v = g_{-tau} g_t v``
lies in the box with half-widths ``abs_spread(Delta, W)``.  Each window is
therefore an ordinary box enumeration on the reduced basis of
``g_{t_j} Lambda``.  The result is a superset; callers verify exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .flows import FlowSpec, OrbitFrame, abs_spread
from .lattice import EnumerationLimitError, LatticeBasis, enumerate_coeffs

MAX_WINDOWS = 10**7
TARGET_POINTS = 24.0
MARGIN = 1e-7


def _volume(h):
    return math.prod(2.0 * x for x in h)


def choose_halfwidth(spec: FlowSpec, span: float, widths: Sequence[float], target: float = TARGET_POINTS) -> float:
    """Largest window half-length (at most ``span/2``) whose box holds ~``target`` points."""
    full = span / 2.0
    if full <= 0:
        return 0.0
    if _volume(abs_spread(spec, full, widths)) <= target:
        return full
    lo, hi = 0.0, full
    for _ in range(60):
        mid = (lo + hi) / 2
        if _volume(abs_spread(spec, mid, widths)) <= target:
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        # even a degenerate window is crowded; fall back to a fixed split
        lo = full / max(1.0, math.ceil(_volume(abs_spread(spec, full, widths)) / target))
    return lo


@dataclass
class Window:
    center: float
    halfwidth: float
    frame: OrbitFrame
    coeffs: list[tuple[int, ...]]


def scan_windows(spec: FlowSpec, basis: LatticeBasis, t_lo: float, t_hi: float, widths: Sequence[float],
                 target: float = TARGET_POINTS) -> Iterator[Window]:
    """Yield the windows in increasing time with their candidate coefficient vectors.

    Candidate coefficients are expressed in ``basis``.  Both ``v`` and
    ``-v`` are reported.
    """
    if t_hi < t_lo:
        return
    n = spec.n
    span = t_hi - t_lo
    delta = choose_halfwidth(spec, span, widths, target)
    if span == 0.0:
        count = 1
    else:
        count = max(1, math.ceil(span / (2 * delta)))
        delta = span / (2 * count)
    if count > MAX_WINDOWS:
        raise EnumerationLimitError(f"orbit search needs {count} windows")
    h = [x * (1 + MARGIN) + 1e-300 for x in abs_spread(spec, delta, widths)]
    frame = OrbitFrame(spec, basis, scale=[1.0 / x for x in h])
    radius = math.sqrt(n) * (1 + MARGIN)
    for j in range(count):
        tc = t_lo + (2 * j + 1) * delta
        R = frame.move(tc)
        cs = enumerate_coeffs(R, radius)
        if not cs:
            yield Window(tc, delta, frame, [])
            continue
        cm = np.array(cs, dtype=float)
        pts = cm @ np.array(R)
        keep = np.max(np.abs(pts), axis=1) <= 1.0 + 1e-9
        yield Window(tc, delta, frame, [frame.original_coeffs(c) for c, k in zip(cs, keep) if k])
