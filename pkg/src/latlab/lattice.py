"""Lattice bases, LLL reduction, shortest vectors and point enumeration.

Bases are stored as ``n x n`` float matrices whose *columns* generate the
lattice.  Integer coefficient vectors are kept as Python ints so that the
coefficient side of every computation is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

LLL_DELTA = 0.99
MAX_POINTS = 10**7
DET_TOL = 1e-9
# relative slack on radii so that points exactly on a sphere are kept
RADIUS_SLACK = 1e-10


class EnumerationLimitError(RuntimeError):
    """Raised when an enumeration would return more than ``MAX_POINTS`` points."""


@dataclass(frozen=True)
class LatticeBasis:
    """Unimodular lattice given by the columns of ``matrix``.

    ``check=False`` skips the determinant test; it exists for internal frames
    (rescaled or dilated lattices) that are deliberately not unimodular.
    """

    matrix: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"basis must be square, got shape {m.shape}")
        if m.shape[0] < 2:
            raise ValueError("dimension must be at least 2")
        if not np.all(np.isfinite(m)):
            raise ValueError("basis has non-finite entries")
        if self.check:
            det = np.linalg.det(m)
            if abs(det - 1.0) > DET_TOL:
                raise ValueError(f"basis is not unimodular: det = {det!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def unchecked(cls, matrix) -> "LatticeBasis":
        return cls(matrix, check=False)

    @classmethod
    def identity(cls, n: int) -> "LatticeBasis":
        return cls(np.eye(n))

    def columns(self) -> list[list[float]]:
        return [list(map(float, col)) for col in self.matrix.T]

    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


@dataclass(frozen=True)
class LatticeVector:
    coords: tuple[float, ...]
    coeffs: tuple[int, ...]

    @property
    def norm(self) -> float:
        return math.sqrt(sum(x * x for x in self.coords))

    @property
    def l1_norm(self) -> float:
        return sum(abs(x) for x in self.coords)

    def is_primitive(self) -> bool:
        return math.gcd(*self.coeffs) == 1


# ---------------------------------------------------------------------------
# kernels on lists of column vectors


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def gram_schmidt(b):
    """Return ``(mu, bn)``: GSO coefficients and squared GSO norms."""
    n = len(b)
    bstar = []
    mu = [[0.0] * n for _ in range(n)]
    bn = [0.0] * n
    for i in range(n):
        v = list(b[i])
        for j in range(i):
            m = _dot(b[i], bstar[j]) / bn[j]
            mu[i][j] = m
            w = bstar[j]
            v = [x - m * y for x, y in zip(v, w)]
        bstar.append(v)
        bn[i] = _dot(v, v)
        if bn[i] <= 0.0:
            raise ValueError("basis vectors are linearly dependent")
    return mu, bn


def lll_inplace(b, coeffs=None, delta=LLL_DELTA):
    """LLL-reduce the vectors ``b`` in place.

    ``coeffs`` (a list of integer rows, one per vector) receives the same
    row operations, so it keeps expressing each vector of ``b`` in terms of
    whatever ``b`` originally was.
    """
    n = len(b)
    mu, bn = gram_schmidt(b)
    swaps = 0
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                bj = b[j]
                b[k] = [x - q * y for x, y in zip(b[k], bj)]
                if coeffs is not None:
                    cj = coeffs[j]
                    coeffs[k] = [x - q * y for x, y in zip(coeffs[k], cj)]
                mk, mj = mu[k], mu[j]
                for l in range(j):
                    mk[l] -= q * mj[l]
                mk[j] -= q
        if bn[k] >= (delta - mu[k][k - 1] ** 2) * bn[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            if coeffs is not None:
                coeffs[k], coeffs[k - 1] = coeffs[k - 1], coeffs[k]
            swaps += 1
            mu, bn = gram_schmidt(b)
            k = max(k - 1, 1)
    if swaps % 2:
        # keep the orientation (determinant sign) of the input
        b[-1] = [-x for x in b[-1]]
        if coeffs is not None:
            coeffs[-1] = [-x for x in coeffs[-1]]
    return b


def enumerate_coeffs(b, radius: float, limit: int = MAX_POINTS):
    """All nonzero integer vectors ``c`` with ``|sum c_i b_i| <= radius``.

    Fincke-Pohst depth-first search; ``b`` should be LLL-reduced for speed
    but any basis gives the correct set.
    """
    n = len(b)
    mu, bn = gram_schmidt(b)
    r2 = radius * radius * (1.0 + RADIUS_SLACK) + 1e-300
    out = []
    c = [0] * n

    def rec(i, rem):
        center = 0.0
        for j in range(i + 1, n):
            center -= mu[j][i] * c[j]
        w = math.sqrt(max(rem, 0.0) / bn[i])
        lo = math.ceil(center - w)
        hi = math.floor(center + w)
        bi = bn[i]
        for x in range(lo, hi + 1):
            d = rem - bi * (x - center) ** 2
            if d < 0.0:
                continue
            c[i] = x
            if i == 0:
                if any(c):
                    out.append(tuple(c))
                    if len(out) > limit:
                        raise EnumerationLimitError(
                            f"more than {limit} lattice points requested"
                        )
            else:
                rec(i - 1, d)
        c[i] = 0

    rec(n - 1, r2)
    return out


def _combine(c, rows):
    """Integer combination ``sum_i c_i rows[i]``."""
    out = [0] * len(rows[0])
    for ci, row in zip(c, rows):
        if ci:
            for j, x in enumerate(row):
                out[j] += ci * x
    return out


def _fcombine(c, vecs):
    out = [0.0] * len(vecs[0])
    for ci, v in zip(c, vecs):
        if ci:
            for j, x in enumerate(v):
                out[j] += ci * x
    return out


def reduced_frame(cols):
    """LLL-reduce a copy of ``cols``; return ``(reduced, transform_rows)``."""
    b = [list(v) for v in cols]
    n = len(b)
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    lll_inplace(b, rows)
    return b, rows


def box_coeffs(b, half_widths: Sequence[float], limit: int = MAX_POINTS, margin: float = 0.0):
    """Nonzero ``c`` with ``|(sum c_i b_i)_j| <= half_widths[j]`` for all ``j``.

    Rescales the axes so the box becomes a cube, enumerates the circumscribed
    ball of the cube on an LLL-reduced basis and filters.  ``margin`` inflates
    the box relatively (callers that verify exactly afterwards use it to
    absorb floating-point error).
    """
    n = len(b)
    h = [w * (1.0 + margin) for w in half_widths]
    if any(w <= 0.0 for w in h):
        raise ValueError("box half-widths must be positive")
    scaled = [[x / w for x, w in zip(v, h)] for v in b]
    red, rows = reduced_frame(scaled)
    found = enumerate_coeffs(red, math.sqrt(n), limit)
    out = []
    for c in found:
        p = _fcombine(c, red)
        if all(abs(x) <= 1.0 + 1e-12 for x in p):
            out.append(tuple(_combine(c, rows)))
    return out


# ---------------------------------------------------------------------------
# public operations


def _vector(coeffs, cols) -> LatticeVector:
    coords = _fcombine(coeffs, cols)
    return LatticeVector(tuple(coords), tuple(int(c) for c in coeffs))


def lll_reduce(basis: LatticeBasis, delta: float = LLL_DELTA) -> LatticeBasis:
    """LLL-reduced basis of the same lattice (Lovasz constant ``delta``)."""
    b = basis.columns()
    lll_inplace(b, None, delta)
    return LatticeBasis(np.array(b).T, check=basis.check)


def lll_transform(basis: LatticeBasis, delta: float = LLL_DELTA):
    """Return ``(reduced_basis, U)`` with ``reduced = basis @ U``, ``U`` integral."""
    b = basis.columns()
    n = len(b)
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    lll_inplace(b, rows, delta)
    U = np.array(rows, dtype=object).T
    return LatticeBasis(np.array(b).T, check=basis.check), U


def _normalize_sign(coords, coeffs, tol):
    for x in coords:
        if abs(x) > tol:
            if x < 0:
                return [-y for y in coords], [-c for c in coeffs]
            break
    return list(coords), list(coeffs)


def _shortest_from_cols(cols, norm: str = "l2"):
    """Shortest nonzero vector of the lattice spanned by ``cols``.

    Returns ``(coords, coeffs)`` with coefficients w.r.t. ``cols``.  Ties are
    broken by sign normalisation then lexicographic order of coordinates.
    """
    red, rows = reduced_frame(cols)
    b0 = math.sqrt(min(_dot(v, v) for v in red))
    if norm == "l1":
        b0 = min(sum(abs(x) for x in v) for v in red)
    elif norm != "l2":
        raise ValueError(f"unknown norm {norm!r}")
    cands = enumerate_coeffs(red, b0)
    best = None
    for c in cands:
        p = _fcombine(c, red)
        val = math.sqrt(_dot(p, p)) if norm == "l2" else sum(abs(x) for x in p)
        best_val = best[0] if best else math.inf
        if val < best_val * (1 - 1e-12):
            best = (val, [(p, c)])
        elif val <= best_val * (1 + 1e-12):
            best[1].append((p, c))
    val, ties = best
    tol = 1e-12 * max(val, 1e-300)
    normed = []
    for p, c in ties:
        p2, c2 = _normalize_sign(p, c, tol)
        normed.append((tuple(round(x, 12) for x in p2), p2, c2))
    normed.sort(key=lambda t: t[0])
    _, coords, c = normed[0]
    return [x + 0.0 for x in coords], _combine(c, rows)


def shortest_vector(basis: LatticeBasis) -> LatticeVector:
    """Exact shortest nonzero vector (LLL followed by exhaustive enumeration)."""
    cols = basis.columns()
    coords, coeffs = _shortest_from_cols(cols)
    return LatticeVector(tuple(coords), tuple(coeffs))


def alpha1(basis: LatticeBasis, norm: str = "l2") -> float:
    """``1 / |v|`` for the shortest nonzero ``v``; ``norm`` is ``"l2"`` or ``"l1"``."""
    coords, _ = _shortest_from_cols(basis.columns(), norm)
    if norm == "l1":
        return 1.0 / sum(abs(x) for x in coords)
    return 1.0 / math.sqrt(_dot(coords, coords))


def alpha1_cols(cols, norm: str = "l2") -> float:
    coords, _ = _shortest_from_cols(cols, norm)
    if norm == "l1":
        return 1.0 / sum(abs(x) for x in coords)
    return 1.0 / math.sqrt(_dot(coords, coords))


def _sorted_vectors(vectors: Iterable[LatticeVector]) -> list[LatticeVector]:
    return sorted(vectors, key=lambda v: (round(v.norm, 12), v.coords))


def enumerate_points(basis: LatticeBasis, radius: float, limit: int = MAX_POINTS) -> list[LatticeVector]:
    """All nonzero lattice vectors of Euclidean norm at most ``radius``."""
    if not (math.isfinite(radius) and radius >= 0):
        raise ValueError("radius must be finite and nonnegative")
    cols = basis.columns()
    n = len(cols)
    vol = math.pi ** (n / 2) / math.gamma(n / 2 + 1) * radius**n
    if vol > 4 * limit:
        raise EnumerationLimitError(f"ball of volume {vol:.3g} exceeds the point guard")
    red, rows = reduced_frame(cols)
    out = []
    for c in enumerate_coeffs(red, radius, limit):
        coords = _fcombine(c, red)
        if math.sqrt(_dot(coords, coords)) <= radius * (1 + RADIUS_SLACK):
            out.append(LatticeVector(tuple(coords), tuple(_combine(c, rows))))
    return _sorted_vectors(out)


def enumerate_primitive_points(basis: LatticeBasis, radius: float, limit: int = MAX_POINTS) -> list[LatticeVector]:
    return [v for v in enumerate_points(basis, radius, limit) if v.is_primitive()]


def box_points(basis: LatticeBasis, half_widths: Sequence[float], center=None,
               limit: int = MAX_POINTS) -> list[LatticeVector]:
    """Nonzero lattice points in the axis-parallel box ``|x - center| <= half_widths``.

    A box not centred at the origin is handled through the centred box that
    contains it.
    """
    cols = basis.columns()
    n = len(cols)
    h = list(half_widths)
    if center is not None:
        h = [abs(c) + w for c, w in zip(center, h)]
    vol = math.prod(2 * w for w in h)
    if vol > 4 * limit:
        raise EnumerationLimitError(f"box of volume {vol:.3g} exceeds the point guard")
    out = []
    for c in box_coeffs(cols, h, limit, margin=1e-12):
        out.append(_vector(c, cols))
    if center is not None:
        out = [v for v in out
               if all(abs(x - c0) <= w * (1 + 1e-12) for x, c0, w in zip(v.coords, center, half_widths))]
    return out


def region_points(basis: LatticeBasis, region, first: bool = False) -> list[LatticeVector]:
    """Nonzero lattice points inside ``region`` (exhaustive, no sampling).

    Regions with a specialised search (the flow-adapted families) supply a
    ``lattice_search`` method; everything else is enumerated inside its
    axis-parallel bounding box and filtered by ``region.contains``.
    """
    search = getattr(region, "lattice_search", None)
    if search is not None:
        return search(basis, first=first)
    lo, hi = region.bounding_box()
    center = [(a + b) / 2 for a, b in zip(lo, hi)]
    half = [(b - a) / 2 for a, b in zip(lo, hi)]
    out = []
    for v in box_points(basis, half, center=center):
        if region.contains(v.coords):
            out.append(v)
            if first:
                break
    return out


def region_intersects(basis: LatticeBasis, region) -> bool:
    """True iff some nonzero lattice point lies in ``region``."""
    return bool(region_points(basis, region, first=True))


def brute_force_points(basis: LatticeBasis, radius: float, box: int) -> list[tuple[int, ...]]:
    """Coefficient-box oracle: all ``c`` with ``|c_i| <= box`` and norm <= radius."""
    n = basis.n
    grid = np.array(np.meshgrid(*[np.arange(-box, box + 1)] * n, indexing="ij")).reshape(n, -1)
    pts = basis.matrix @ grid
    norms = np.sqrt((pts**2).sum(axis=0))
    keep = (norms <= radius * (1 + RADIUS_SLACK)) & np.any(grid != 0, axis=0)
    return [tuple(int(x) for x in col) for col in grid[:, keep].T]


def dual_box_bound(basis: LatticeBasis, radius: float) -> int:
    """Coefficient bound valid for every lattice vector of norm <= radius.

    ``c_i = <d_i, v>`` for the dual basis ``d``, hence ``|c_i| <= |d_i| radius``.
    """
    dual = np.linalg.inv(basis.matrix).T
    return int(math.ceil(radius * np.max(np.linalg.norm(dual, axis=0)) + 1e-9))
