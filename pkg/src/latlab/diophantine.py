"""Continued fractions, approximation exponents and the lattices ``Lambda_s``.

Partial quotients and convergents are exact Python integers.  Quadratic
surds are expanded by the classical ``(P + sqrt(D)) / Q`` recurrence with
exact floors; explicit quotient rules let one build numbers with any
prescribed growth of ``q_n``.

``Lambda_s`` has basis ``(1, s), (0, 1)``; the convergent ``(p, q)`` gives
the lattice vector ``(q, s q - p)``, which the horocycle ``h_t`` makes
vertical at ``t_q = -q / (s q - p)``.  Quantities that depend on ``s q - p``
are evaluated in mpmath at a precision proportional to the size of the
deepest convergent used.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .lattice import LatticeBasis

GUARD_BITS = 128


class InsufficientDepthError(ValueError):
    pass


def _squarefree_part(d: int) -> tuple[int, int]:
    """``d = m^2 * e`` with ``e`` square-free; returns ``(m, e)``."""
    m, e, f = 1, d, 2
    while f * f <= e:
        while e % (f * f) == 0:
            e //= f * f
            m *= f
        f += 1
    return m, e


def _isqrt_exact(d: int) -> int | None:
    r = math.isqrt(d)
    return r if r * r == d else None


# ---------------------------------------------------------------------------
# quotient rules


def _floor_power(q: int, x: Fraction) -> int:
    """``floor(q ** x)`` for an integer ``q >= 1`` and rational ``x >= 0``."""
    if x.denominator == 1:
        return q ** int(x)
    bits = int(q.bit_length() * float(x)) + 64
    with mpmath.workprec(bits):
        return int(mpmath.floor(mpmath.power(mpmath.mpf(q), mpmath.mpf(x.numerator) / x.denominator)))


def _rule_mu(params, n, q, q_prev):
    (mu,) = params
    return max(1, _floor_power(q, mu - 2))


def _rule_split(params, n, q, q_prev):
    mu_plus, mu_minus = params
    return max(1, _floor_power(q, (mu_plus if n % 2 else mu_minus) - 2))


def _rule_liouville(params, n, q, q_prev):
    return max(1, q**n)


def _rule_const(params, n, q, q_prev):
    (a,) = params
    return int(a)


# name -> (arity, generator for a_{n+1} given n, q_n, q_{n-1}, minimum parameter)
RULES: dict[str, tuple[int, Callable]] = {
    "mu": (1, _rule_mu),
    "split": (2, _rule_split),
    "liouville": (0, _rule_liouville),
    "const": (1, _rule_const),
}


# ---------------------------------------------------------------------------
# real numbers


@dataclass(frozen=True)
class RealSpec:
    """A real number with an exactly computable continued fraction.

    ``rational``: ``p/q``.  ``quadratic_surd``: ``a + b sqrt(d)``.
    ``cf_rule``: ``[0; a_1, a_2, ...]`` with ``a_{n+1}`` produced by a named
    rule from ``(n, q_n, q_{n-1})``:

    * ``mu(m)``: ``a_{n+1} = floor(q_n^(m-2))``, so ``q_{n+1} ~ q_n^(m-1)``
      and the approximation exponent is ``m``;
    * ``split(m_plus, m_minus)``: as ``mu`` with ``m_plus`` for odd ``n``
      (convergents above the number) and ``m_minus`` for even ``n``;
    * ``liouville()``: ``a_{n+1} = q_n^n``;
    * ``const(a)``: every quotient equal to ``a``.
    """

    kind: str
    description: str = ""
    p: int = 0
    q: int = 1
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    d: int = 0
    rule: str = ""
    params: tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.kind == "rational":
            if self.q < 1 or math.gcd(abs(self.p), self.q) != 1:
                raise ValueError("rational needs q >= 1 and gcd(p, q) = 1")
        elif self.kind == "quadratic_surd":
            if self.d < 2 or _squarefree_part(self.d)[0] != 1:
                raise ValueError("surd needs a square-free d >= 2")
            if self.b == 0:
                raise ValueError("surd needs b != 0")
        elif self.kind == "cf_rule":
            if self.rule not in RULES:
                raise ValueError(f"unknown quotient rule {self.rule!r}")
            if len(self.params) != RULES[self.rule][0]:
                raise ValueError(f"rule {self.rule} takes {RULES[self.rule][0]} parameters")
            if self.rule in ("mu", "split") and min(self.params) < 2:
                raise ValueError("approximation exponents of irrationals are >= 2")
            if self.rule == "const" and (self.params[0].denominator != 1 or self.params[0] < 1):
                raise ValueError("const rule needs a positive integer")
        else:
            raise ValueError(f"unknown real kind {self.kind!r}")
        if not self.description:
            object.__setattr__(self, "description", self._describe())

    def _describe(self):
        if self.kind == "rational":
            return f"rat:{self.p}/{self.q}"
        if self.kind == "quadratic_surd":
            return f"surd:{self.a}+{self.b}*sqrt({self.d})"
        return f"rule:{self.rule}({','.join(str(x) for x in self.params)})"

    @classmethod
    def rational(cls, p: int, q: int = 1) -> "RealSpec":
        if q == 0:
            raise ValueError("zero denominator")
        f = Fraction(p, q)
        return cls("rational", p=f.numerator, q=f.denominator)

    @classmethod
    def surd(cls, a, b, d: int) -> "RealSpec":
        """``a + b sqrt(d)``; a non-square-free ``d`` is normalized, a square ``d`` gives a rational."""
        a, b = Fraction(a), Fraction(b)
        if d < 0:
            raise ValueError("d must be non-negative")
        m, e = _squarefree_part(d)
        if e == 1:
            return cls.rational_from(a + b * m)
        return cls("quadratic_surd", a=a, b=b * m, d=e)

    @classmethod
    def rational_from(cls, f: Fraction) -> "RealSpec":
        return cls.rational(f.numerator, f.denominator)

    @classmethod
    def golden(cls) -> "RealSpec":
        return cls.surd(Fraction(1, 2), Fraction(1, 2), 5)

    @classmethod
    def from_rule(cls, rule: str, *params) -> "RealSpec":
        return cls("cf_rule", rule=rule, params=tuple(Fraction(x) for x in params))

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    def surd_form(self) -> "QuadraticSurd":
        if self.kind != "quadratic_surd":
            raise ValueError("not a quadratic surd")
        return QuadraticSurd.from_abd(self.a, self.b, self.d)


def parse_real(text: str) -> RealSpec:
    """Parse ``rat:p/q``, ``surd:a+b*sqrt(d)`` (also ``surd:golden``) or ``rule:name(params)``."""
    text = text.strip()
    kind, _, body = text.partition(":")
    body = body.replace(" ", "")
    if kind == "rat":
        m = re.fullmatch(r"([-+]?\d+)(?:/(\d+))?", body)
        if not m:
            raise ValueError(f"bad rational {body!r}")
        return RealSpec.rational(int(m.group(1)), int(m.group(2) or 1))
    if kind == "surd":
        if body in ("golden", "phi"):
            return RealSpec.golden()
        body = body.replace("√", "sqrt")
        num = r"\d+(?:/\d+)?"
        m = re.fullmatch(rf"(?:([-+]?{num})(?=[-+]))?([-+]?)({num})?\*?sqrt\(?(\d+)\)?", body)
        if not m:
            raise ValueError(f"bad surd {body!r}; expected a+b*sqrt(d)")
        a = Fraction(m.group(1) or 0)
        b = Fraction(m.group(3) or 1) * (-1 if m.group(2) == "-" else 1)
        return RealSpec.surd(a, b, int(m.group(4)))
    if kind == "rule":
        m = re.fullmatch(r"([a-z_]+)\(([^)]*)\)", body)
        if not m:
            raise ValueError(f"bad rule {body!r}; expected name(params)")
        params = [Fraction(x) for x in m.group(2).split(",") if x]
        return RealSpec.from_rule(m.group(1), *params)
    raise ValueError(f"unknown real syntax {text!r}; use rat:, surd: or rule:")


@dataclass(frozen=True)
class QuadraticSurd:
    """``(P + sqrt(D)) / Q`` with integers, ``D`` not a square and ``Q | D - P^2``."""

    P: int
    D: int
    Q: int

    @classmethod
    def from_abd(cls, a: Fraction, b: Fraction, d: int) -> "QuadraticSurd":
        # a + b sqrt(d) = (a1 b2 +- sqrt(d a2^2 b1^2)) / (a2 b2)
        den = a.denominator * b.denominator
        P = a.numerator * b.denominator
        D = d * (a.denominator * b.numerator) ** 2
        Q = den
        if b < 0:
            P, Q = -P, -Q
        # make Q divide D - P^2
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
        return cls(P, D, Q)

    def floor(self) -> int:
        r = math.isqrt(self.D)
        if self.Q > 0:
            return (self.P + r) // self.Q
        return -((self.P + r) // -self.Q) - 1

    def step(self) -> tuple[int, "QuadraticSurd"]:
        """``a = floor(x)`` and the complete quotient ``1 / (x - a)``."""
        a = self.floor()
        P = a * self.Q - self.P
        Q = (self.D - P * P) // self.Q
        return a, QuadraticSurd(P, self.D, Q)

    def sign_minus(self, x: Fraction) -> int:
        """Sign of ``self - x``, exactly."""
        x = Fraction(x)
        u = Fraction(self.P) - x * self.Q  # self - x = (u + sqrt D) / Q
        if u >= 0:
            s = 1
        else:
            s = 1 if self.D > u * u else -1
        return s if self.Q > 0 else -s

    def mp_value(self, prec: int = 53):
        with mpmath.workprec(prec):
            return (mpmath.mpf(self.P) + mpmath.sqrt(mpmath.mpf(self.D))) / self.Q


# ---------------------------------------------------------------------------
# continued fractions


@dataclass
class ContinuedFraction:
    quotients: list[int]
    convergents: list[tuple[int, int]]
    terminated: bool = False
    period_start: int | None = None
    period: tuple[int, ...] | None = None
    spec: RealSpec | None = field(default=None, repr=False)

    @property
    def depth(self) -> int:
        return len(self.quotients) - 1

    def __str__(self):
        a = self.quotients
        tail = ", ".join(str(x) for x in a[1:])
        return f"[{a[0]}; {tail}]" if tail else f"[{a[0]}]"


def convergents_of(quotients: Sequence[int]) -> list[tuple[int, int]]:
    """``p_n/q_n`` by ``p_n = a_n p_{n-1} + p_{n-2}`` (same for ``q``)."""
    out = []
    p2, p1, q2, q1 = 0, 1, 1, 0
    for a in quotients:
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        out.append((p1, q1))
    return out


def cf_expand(s: RealSpec, depth: int) -> ContinuedFraction:
    """Partial quotients ``a_0 .. a_depth`` (fewer if a rational expansion ends)."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if s.kind == "rational":
        a, num, den = [], s.p, s.q
        while den and len(a) <= depth:
            qt, r = divmod(num, den)
            a.append(qt)
            num, den = den, r
        return ContinuedFraction(a, convergents_of(a), terminated=den == 0, spec=s)
    if s.kind == "quadratic_surd":
        x = s.surd_form()
        a, states = [], {}
        start = None
        while len(a) <= depth:
            key = (x.P, x.Q)
            if len(a) >= 1 and key in states:
                start = states[key]
                break
            if len(a) >= 1:
                states[key] = len(a)
            ai, x = x.step()
            a.append(ai)
        period = None
        if start is not None:
            period = tuple(a[start:])
            while len(a) <= depth:
                a.append(period[(len(a) - start) % len(period)])
        return ContinuedFraction(a, convergents_of(a), period_start=start, period=period, spec=s)
    _, gen = RULES[s.rule]
    a = [0]
    q_prev, q = 0, 1
    for n in range(depth):
        an = int(gen(s.params, n, q, q_prev))
        a.append(an)
        q_prev, q = q, an * q + q_prev
    return ContinuedFraction(a, convergents_of(a), spec=s)


def rational_approximation(s: RealSpec, bits: int = 128) -> Fraction:
    """A convergent with ``q^2 > 2^bits`` (the number itself if rational)."""
    if s.kind == "rational":
        return Fraction(s.p, s.q)
    depth = 8
    while True:
        cf = cf_expand(s, depth)
        p, q = cf.convergents[-1]
        if q.bit_length() * 2 > bits:
            return Fraction(p, q)
        depth *= 2


def real_value(s: RealSpec) -> float:
    if s.kind == "quadratic_surd":
        return float(s.a) + float(s.b) * math.sqrt(s.d)
    f = rational_approximation(s, 128)
    return f.numerator / f.denominator


def mp_value(s: RealSpec, cf: ContinuedFraction, prec: int):
    """``s`` to ``prec`` bits; rule-defined numbers use the deepest available convergent."""
    with mpmath.workprec(prec):
        if s.kind == "rational":
            return mpmath.mpf(s.p) / s.q
        if s.kind == "quadratic_surd":
            return s.surd_form().mp_value(prec)
        p, q = cf.convergents[-1]
        return mpmath.mpf(p) / q


def _precision_for(cf: ContinuedFraction) -> int:
    return 2 * cf.convergents[-1][1].bit_length() + GUARD_BITS


# ---------------------------------------------------------------------------
# approximation exponents


@dataclass
class ApproxExponents:
    mu: float
    mu_plus: float
    mu_minus: float
    r_sequence: list[tuple[int, float]]
    depth: int

    def as_dict(self):
        return {"mu": self.mu, "mu_plus": self.mu_plus, "mu_minus": self.mu_minus, "depth": self.depth}


def log_int(x: int) -> float:
    """Natural log of a positive integer of any size."""
    return math.log(x)


def r_sequence(cf: ContinuedFraction) -> list[tuple[int, float]]:
    """``(n, log q_{n+1} / log q_n)`` for every ``n`` with ``q_n > 1``."""
    conv = cf.convergents
    out = []
    for n in range(len(conv) - 1):
        q, q1 = conv[n][1], conv[n + 1][1]
        if q > 1:
            out.append((n, log_int(q1) / log_int(q)))
    return out


def last_half(items: Sequence) -> list:
    k = len(items)
    return list(items[k // 2:]) if k > 1 else list(items)


def exponents(cf: ContinuedFraction, depth: int | None = None) -> ApproxExponents:
    """Finite-depth estimates ``1 + max`` of ``r_n`` over the last half of the sequence.

    ``mu_plus`` uses odd ``n`` (convergents above the number), ``mu_minus``
    even ``n``.  A terminated (rational) expansion has all three equal to 1.
    """
    if depth is None:
        depth = cf.depth
    if cf.terminated:
        return ApproxExponents(1.0, 1.0, 1.0, [], cf.depth)
    if depth + 1 > len(cf.convergents):
        raise InsufficientDepthError(f"need {depth + 1} convergents, have {len(cf.convergents)}")
    if depth + 1 < 4:
        raise InsufficientDepthError("need at least 4 convergents")
    sub = ContinuedFraction(cf.quotients[: depth + 1], cf.convergents[: depth + 1])
    rs = r_sequence(sub)
    if not rs:
        raise InsufficientDepthError("no convergent with q > 1")
    tail = last_half(rs)

    def est(vals):
        return 1.0 + max(vals) if vals else math.nan

    return ApproxExponents(
        est([r for _, r in tail]),
        est([r for n, r in tail if n % 2 == 1]),
        est([r for n, r in tail if n % 2 == 0]),
        rs,
        depth,
    )


def split_exponents_demo(target_plus: float, target_minus: float, depth: int):
    """A number with one-sided exponents ``(target_plus, target_minus)`` and its measured estimates."""
    if target_plus < 2 or target_minus < 2:
        raise ValueError("targets must be >= 2: every irrational has exponent >= 2")
    s = RealSpec.from_rule("split", Fraction(target_plus).limit_denominator(10**6),
                           Fraction(target_minus).limit_denominator(10**6))
    return s, exponents(cf_expand(s, depth))


# ---------------------------------------------------------------------------
# the lattices Lambda_s and their cusp excursions


def lambda_s(s: RealSpec | float) -> LatticeBasis:
    """Basis ``(1, s), (0, 1)`` (as columns)."""
    x = s if isinstance(s, (int, float)) else real_value(s)
    return LatticeBasis([[1.0, 0.0], [float(x), 1.0]])


def horizontal_vector(s: RealSpec, depth: int = 64) -> tuple[int, int] | None:
    """For rational ``s = p/q``: coefficients ``(q, -p)`` of the horizontal vector ``(q, 0)``."""
    if s.kind != "rational":
        return None
    return (s.q, -s.p)


GAP_PREC = 96


@dataclass
class ExcursionTime:
    """Convergent ``(p, q)`` and the horocycle time making ``(q, sq - p)`` vertical.

    ``gap = |s q - p|``; when ``gap < 1`` the vertical vector ``(0, s q - p)``
    is the shortest vector of ``h_t Lambda_s`` (any independent vector would
    make the covolume smaller than 1), so ``alpha1 = 1/gap`` exactly.
    """

    index: int
    p: int
    q: int
    sign: int
    gap: object = field(repr=False)
    log_gap: float = 0.0
    log_abs_t: float = 0.0
    prec: int = field(default=GAP_PREC, repr=False)

    @property
    def t(self):
        """``-q / (s q - p)`` to ``prec`` bits (enough that ``q + t (s q - p)`` stays below the gap)."""
        with mpmath.workprec(self.prec):
            return self.sign * self.q / self.gap

    @property
    def alpha_lower(self):
        with mpmath.workprec(self.prec):
            return 1 / self.gap

    @property
    def log_alpha(self) -> float:
        """``log alpha1(h_t Lambda_s)``; exact for ``gap < 1``."""
        return -self.log_gap

    @property
    def ratio(self) -> float:
        return self.log_alpha / self.log_abs_t if self.log_abs_t > 0 else math.nan


def _gaps(s: RealSpec, cf: ContinuedFraction, prec: int):
    """``(n, p_n, q_n, s q_n - p_n)`` by direct high-precision evaluation of ``s``."""
    x = mp_value(s, cf, prec)
    out = []
    with mpmath.workprec(prec):
        for n, (p, q) in enumerate(cf.convergents[:-2]):
            out.append((n, p, q, x * q - p))
    return out


def _complete_quotients(cf: ContinuedFraction, prec: int):
    """Complete quotients ``xi_n = [a_n; a_{n+1}, ...]`` for ``n = 1..N``.

    Exact for quadratic surds; otherwise truncated after ``a_N``.
    """
    a = cf.quotients
    xi = [None] * len(a)
    if cf.spec is not None and cf.spec.kind == "quadratic_surd":
        # exact complete quotients from the surd recurrence
        x = cf.spec.surd_form()
        for n in range(len(a)):
            if n:
                xi[n] = x.mp_value(prec)
            _, x = x.step()
        return xi
    with mpmath.workprec(prec):
        acc = mpmath.mpf(a[-1])
        xi[-1] = acc
        for n in range(len(a) - 2, 0, -1):
            acc = a[n] + 1 / acc
            xi[n] = acc
    return xi


def excursion_times(s: RealSpec, cf: ContinuedFraction) -> list[ExcursionTime]:
    """One horocycle excursion time per convergent ``n < N`` of a depth-``N`` expansion.

    Uses ``q_n s - p_n = (-1)^n / (q_n xi_{n+1} + q_{n-1})`` with the complete
    quotient ``xi_{n+1}`` (truncated at ``a_N`` unless ``s`` is a surd).  Every
    term is positive, so the gap has full relative accuracy; the working
    precision also covers ``log2 q_N`` bits so that ``t`` itself is usable.
    The sign of ``t_q`` is ``(-1)^(n+1)``: positive exactly when ``p_n/q_n > s``.
    """
    if s.is_rational:
        raise ValueError("excursion times need an irrational number")
    conv = cf.convergents
    prec = GAP_PREC + conv[-1][1].bit_length()
    xi = _complete_quotients(cf, prec)
    out = []
    with mpmath.workprec(prec):
        for n in range(len(conv) - 1):
            p, q = conv[n]
            q_prev = conv[n - 1][1] if n else 0
            gap = 1 / (q * xi[n + 1] + q_prev)
            lg = float(mpmath.log(gap))
            out.append(ExcursionTime(n, p, q, -1 if n % 2 == 0 else 1, gap, lg, math.log(q) - lg, prec))
    return out


def horocycle_envelope(times: Sequence[ExcursionTime], side: int = 0) -> float:
    """``max log alpha1 / log|t|`` over the last half of the excursion times.

    ``side = +1`` (``-1``) keeps only positive (negative) times.
    """
    pts = [e for e in times if e.log_abs_t > 0 and e.log_gap < 0]
    if side:
        pts = [e for e in pts if e.sign == side]
    tail = last_half(pts)
    if not tail:
        raise InsufficientDepthError("no usable excursion times")
    return max(e.ratio for e in tail)


def horocycle_prediction(mu: float) -> float:
    return 1.0 - 1.0 / mu


def geodesic_prediction(mu: float) -> float:
    return 0.5 - 1.0 / mu


# generic exact 2D reduction, used as a cross-check of the closed forms


def reduce_2d(u, v, norm: str = "l2"):
    """Shortest nonzero vector of the planar lattice spanned by ``u, v``.

    Works for any ordered field type (Fractions, mpmath numbers).  Lagrange
    reduction gives the Euclidean minimum; for the L1 norm the minimum is
    among ``c1 u + c2 v`` with ``|c_i| <= 2`` on the reduced basis.
    """
    def n2(w):
        return w[0] * w[0] + w[1] * w[1]

    def dot(a, b):
        return a[0] * b[0] + a[1] * b[1]

    u, v = list(u), list(v)
    if n2(u) > n2(v):
        u, v = v, u
    while True:
        mu = dot(u, v) / n2(u)
        m = int(mpmath.nint(mu)) if not isinstance(mu, Fraction) else round(mu)
        v = [v[0] - m * u[0], v[1] - m * u[1]]
        if n2(v) >= n2(u):
            break
        u, v = v, u
    if norm == "l2":
        return u
    best = None
    for c1 in range(-2, 3):
        for c2 in range(-2, 3):
            if c1 == 0 and c2 == 0:
                continue
            w = [c1 * u[0] + c2 * v[0], c1 * u[1] + c2 * v[1]]
            val = abs(w[0]) + abs(w[1])
            if best is None or val < best[0]:
                best = (val, w)
    return best[1]


def alpha1_horocycle_direct(s: RealSpec, cf: ContinuedFraction, t, norm: str = "l2") -> float:
    """``log alpha1(h_t Lambda_s)`` by reducing the flowed basis in high precision."""
    prec = _precision_for(cf) + 2 * int(abs(mpmath.log(abs(mpmath.mpf(t)) + 2, 2)))
    with mpmath.workprec(prec):
        x = mp_value(s, cf, prec)
        t = mpmath.mpf(t)
        u = [1 + t * x, x]
        v = [t, mpmath.mpf(1)]
        w = reduce_2d(u, v, norm)
        size = abs(w[0]) + abs(w[1]) if norm == "l1" else mpmath.sqrt(w[0] ** 2 + w[1] ** 2)
        return float(-mpmath.log(size))


@dataclass
class GeodesicTime:
    """Time ``t* = log(q / gap)`` minimizing ``e^(-t/2) q + e^(t/2) gap``."""

    index: int
    p: int
    q: int
    t: float
    nu: float
    predicted_ratio: float
    log_alpha_l1: float

    @property
    def ratio(self) -> float:
        return self.log_alpha_l1 / self.t


def geodesic_excursion_times(s: RealSpec, cf: ContinuedFraction) -> list[GeodesicTime]:
    """Per convergent with ``q > 1``: ``t*``, ``nu`` with ``gap = q^(1-nu)``, the predicted
    ratio ``1/2 - 1/nu`` and the measured ``log alpha1 / t*`` of ``g_{-t*} Lambda_s``
    (L1 norm, exact planar reduction in high precision).
    """
    if s.is_rational:
        raise ValueError("excursion times need an irrational number")
    prec = _precision_for(cf)
    out = []
    with mpmath.workprec(prec):
        x = mp_value(s, cf, prec)
        for n, p, q, d in _gaps(s, cf, prec):
            if q <= 1:
                continue
            gap = abs(d)
            lq = mpmath.log(q)
            tstar = lq - mpmath.log(gap)
            nu = 1 - mpmath.log(gap) / lq
            a = mpmath.exp(-tstar / 2)
            b = mpmath.exp(tstar / 2)
            w = reduce_2d([a, b * x], [mpmath.mpf(0), b], "l1")
            la = -mpmath.log(abs(w[0]) + abs(w[1]))
            out.append(GeodesicTime(n, p, q, float(tstar), float(nu), float(0.5 - 1 / nu), float(la)))
    return out


def geodesic_envelope(times: Sequence[GeodesicTime]) -> float:
    tail = last_half(list(times))
    if not tail:
        raise InsufficientDepthError("no usable geodesic times")
    return max(g.ratio for g in tail)
