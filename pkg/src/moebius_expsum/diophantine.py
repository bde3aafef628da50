"""Continued fractions over exact big integers.

Irrational numbers are described by an :class:`IrrationalSpec` (a quadratic
surd, an explicit finite expansion, or a constructed number with a prescribed
irrationality exponent).  Everything here is exact integer arithmetic; the
only floating point is in :func:`estimate_eta`, which is an estimator anyway.
"""
from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import gmpy2
from gmpy2 import mpz

from .errors import InsufficientTermsError, PrecisionError, SelectionError

DEFAULT_FRAC_BITS = 256


@dataclass(frozen=True)
class QuadraticSurd:
    """(P + sqrt(D)) / Q."""
    P: int
    D: int
    Q: int = 1

    def __post_init__(self):
        if self.D <= 0:
            raise ValueError(f"D must be positive, got {self.D}")
        if math.isqrt(self.D) ** 2 == self.D:
            raise ValueError(f"D={self.D} is a perfect square; (P+sqrt(D))/Q would be rational")
        if self.Q == 0:
            raise ValueError("Q must be nonzero")


@dataclass(frozen=True)
class ExplicitCF:
    a0: int
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(int(t) for t in self.terms))
        if any(t < 1 for t in self.terms):
            raise ValueError("partial quotients after a0 must be positive")


@dataclass(frozen=True)
class PrescribedExponent:
    """Number whose partial quotients follow a_{i+1} = max(1, ceil(q_i^(eta-2)))."""
    eta: Fraction
    seed: tuple = (0,)

    def __post_init__(self):
        object.__setattr__(self, "eta", Fraction(self.eta))
        object.__setattr__(self, "seed", tuple(int(t) for t in self.seed))
        if self.eta <= 2:
            raise ValueError(f"prescribed exponent must exceed 2, got {self.eta}")
        if not self.seed:
            raise ValueError("seed needs at least a0")
        if any(t < 1 for t in self.seed[1:]):
            raise ValueError("seed partial quotients after a0 must be positive")


IrrationalSpec = Union[QuadraticSurd, ExplicitCF, PrescribedExponent]

GOLDEN = QuadraticSurd(1, 5, 2)


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int


@dataclass(frozen=True)
class FixedPointAlpha:
    """floor-ish({alpha} * 2^frac_bits) with |{alpha} - value/2^frac_bits| < 2^-frac_bits."""
    frac_bits: int
    value: int

    def __post_init__(self):
        if not 0 <= self.value < (1 << self.frac_bits):
            raise ValueError("value must lie in [0, 2^frac_bits)")

    @property
    def words(self):
        """Top 128 bits of the fraction as (hi, lo) 64-bit words."""
        shift = self.frac_bits - 128
        top = self.value >> shift if shift >= 0 else self.value << -shift
        return int(top >> 64), int(top & (2**64 - 1))

    @property
    def kernel_bits(self):
        return min(self.frac_bits, 128)

    def negated(self):
        """Fixed point of 1 - alpha (mod 1)."""
        return FixedPointAlpha(self.frac_bits, (-self.value) % (1 << self.frac_bits))

    def as_float(self):
        return self.value / 2.0**self.frac_bits


@dataclass(frozen=True)
class QSelection:
    tau: Fraction
    i: int
    q: int
    xrange_ok: bool
    approx_ok: bool
    q_prev: int = 0
    p_prev: int = 0
    p: int = 0


# ---------------------------------------------------------------- parsing

_INT = r"-?\d+"
_RAT = r"\d+(?:/\d+)?"


def parse_rational(text: str) -> Fraction:
    if not re.fullmatch(_RAT, text):
        raise ValueError(f"not a rational n or n/d: {text!r}")
    num, _, den = text.partition("/")
    den = int(den) if den else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(num), den)


def parse_alpha(text: str) -> IrrationalSpec:
    """Parse ``quad:D``, ``quad:P,D,Q``, ``cf:a0,a1,...``, ``liouville:ETA`` or ``golden``."""
    if text == "golden":
        return GOLDEN
    kind, sep, body = text.partition(":")
    if not sep:
        raise ValueError(f"alpha spec needs a 'kind:' prefix: {text!r}")
    if kind == "quad":
        if not re.fullmatch(rf"{_INT}(?:,{_INT},{_INT})?", body):
            raise ValueError(f"quad expects D or P,D,Q: {text!r}")
        parts = [int(t) for t in body.split(",")]
        return QuadraticSurd(0, parts[0], 1) if len(parts) == 1 else QuadraticSurd(*parts)
    if kind == "cf":
        if not re.fullmatch(rf"{_INT}(?:,\d+)*", body):
            raise ValueError(f"cf expects a0,a1,...: {text!r}")
        parts = [int(t) for t in body.split(",")]
        return ExplicitCF(parts[0], tuple(parts[1:]))
    if kind == "liouville":
        return PrescribedExponent(parse_rational(body))
    raise ValueError(f"unknown alpha kind {kind!r}")


def format_alpha(spec: IrrationalSpec) -> str:
    """Canonical text form; ``parse_alpha(format_alpha(s)) == s``."""
    if isinstance(spec, QuadraticSurd):
        if spec.P == 0 and spec.Q == 1:
            return f"quad:{spec.D}"
        return f"quad:{spec.P},{spec.D},{spec.Q}"
    if isinstance(spec, ExplicitCF):
        return "cf:" + ",".join(str(t) for t in (spec.a0, *spec.terms))
    if isinstance(spec, PrescribedExponent):
        if spec.seed != (0,):
            raise ValueError("only the default seed has a text form")
        return f"liouville:{spec.eta}"
    raise TypeError(spec)


# ---------------------------------------------------------------- expansion

def _ceil_power(q, eta_minus_2: Fraction):
    """ceil(q^(r/s)) exactly: the least a with a^s >= q^r."""
    r, s = eta_minus_2.numerator, eta_minus_2.denominator
    target = mpz(q) ** r
    if s == 1:
        return target
    if s == 2:
        root, rem = gmpy2.isqrt_rem(target)
        return root if rem == 0 else root + 1
    root, exact = gmpy2.iroot(target, s)
    return root if exact else root + 1


def _surd_terms(spec: QuadraticSurd) -> Iterator[int]:
    P, D, Q = spec.P, spec.D, spec.Q
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    r = math.isqrt(D)
    while True:
        a = (P + r) // Q if Q > 0 else (P + r + 1) // Q
        yield a
        P = a * Q - P
        Q = (D - P * P) // Q


def _iter_convergents(spec: IrrationalSpec) -> Iterator[tuple[int, int, int]]:
    """Yield (a_i, p_i, q_i) for i = 0, 1, ..."""
    p0, p1 = mpz(0), mpz(1)   # p_{-2}, p_{-1}
    q0, q1 = mpz(1), mpz(0)
    if isinstance(spec, QuadraticSurd):
        source = _surd_terms(spec)
    elif isinstance(spec, ExplicitCF):
        source = iter((spec.a0, *spec.terms))
    else:
        source = None
    i = 0
    while True:
        if source is not None:
            try:
                a = mpz(next(source))
            except StopIteration:
                return
        elif i < len(spec.seed):
            a = mpz(spec.seed[i])
        else:
            a = max(mpz(1), _ceil_power(q1, spec.eta - 2))
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        yield a, p1, q1
        i += 1


def cf_terms(spec: IrrationalSpec, count: int) -> list[int]:
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for a, _, _ in _iter_convergents(spec):
        out.append(a)
        if len(out) == count:
            return out
    raise InsufficientTermsError(
        f"continued fraction has only {len(out)} terms, {count} requested")


def convergents(spec: IrrationalSpec, count: int) -> list[Convergent]:
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for i, (_, p, q) in enumerate(_iter_convergents(spec)):
        out.append(Convergent(i, p, q))
        if len(out) == count:
            return out
    raise InsufficientTermsError(
        f"continued fraction has only {len(out)} terms, {count} requested")


def _fixed_point_from(p, q, frac_bits):
    frac = mpz(p) - (mpz(p) // q) * q
    value, rem = gmpy2.f_divmod(frac << frac_bits, q)
    if 2 * rem >= q:
        value += 1
    value = int(value)
    if value == 1 << frac_bits:
        value -= 1
    return FixedPointAlpha(frac_bits, value)


def alpha_fixed_point(spec: IrrationalSpec, frac_bits: int = DEFAULT_FRAC_BITS) -> FixedPointAlpha:
    """{alpha} to frac_bits fractional bits, from the first convergent with
    q^2 > 2^(frac_bits+2)."""
    if frac_bits < 64:
        raise ValueError("frac_bits must be >= 64")
    need = mpz(1) << (frac_bits + 2)
    for _, p, q in _iter_convergents(spec):
        if q * q > need:
            return _fixed_point_from(p, q, frac_bits)
    raise PrecisionError(
        f"{spec} is rational (finite expansion) or too short for {frac_bits} bits")


def integer_part(spec: IrrationalSpec) -> int:
    return int(cf_terms(spec, 1)[0])


# ---------------------------------------------------------------- exponents

def _ln(n) -> float:
    n = mpz(n)
    b = n.bit_length()
    if b <= 1000:
        return math.log(int(n))
    shift = b - 60
    return math.log(int(n >> shift)) + shift * math.log(2)


def estimate_eta(convs: list[Convergent]) -> float:
    """Desk-scale irrationality exponent: 1 + log q_n / log q_{n-1} at the
    last pair of convergents with q_{n-1} > 1."""
    if len(convs) < 4:
        raise ValueError("need at least 4 convergents")
    qs = [c.q for c in convs]
    for j in range(len(qs) - 1, 0, -1):
        if qs[j - 1] > 1:
            return 1.0 + _ln(qs[j]) / _ln(qs[j - 1])
    raise ValueError("denominators never exceed 1")


def _pow_less(a, n, b, m) -> bool:
    """a^n < b^m for nonnegative integers, exactly."""
    a, b = mpz(a), mpz(b)
    if a <= 1 or b <= 1:
        return (a ** n if a > 1 else a) < (b ** m if b > 1 else b)
    # cheap size screen before forming the powers
    la, lb = n * _ln(a), m * _ln(b)
    if la < lb - 1e-6 * max(la, lb) - 1:
        return True
    if la > lb + 1e-6 * max(la, lb) + 1:
        return False
    return a ** n < b ** m


def check_qgrowth(convs: list[Convergent], tau) -> list[bool]:
    """Entry j reports q_{j+1} < q_j^(tau-1), decided exactly."""
    tau = Fraction(tau)
    if len(convs) < 3:
        raise ValueError("need at least 3 convergents")
    n, d = tau.numerator, tau.denominator
    # q_i < q_{i-1}^{(n-d)/d}  <=>  q_i^d < q_{i-1}^{n-d}
    return [_pow_less(convs[i].q, d, convs[i - 1].q, n - d) for i in range(1, len(convs))]


def convergent_error_check(alpha: FixedPointAlpha, a0: int, c: Convergent, q_next: int,
                           radius_ulps: int = 1):
    """Decide |alpha - p/q| < 1/(q q_next) knowing only that alpha lies within
    radius_ulps * 2^-frac_bits of a0 + value/2^frac_bits.

    Returns True, False, or None when the interval cannot decide.
    """
    B = alpha.frac_bits
    V = (mpz(a0) << B) + alpha.value
    dist = abs(V * c.q - (mpz(c.p) << B))   # |alpha~ - p/q| q 2^B
    slack = radius_ulps * mpz(c.q)
    bound = mpz(1) << B
    if (dist + slack) * q_next < bound:
        return True
    if dist > slack and (dist - slack) * q_next >= bound:
        return False
    return None


def extend_convergents(spec: IrrationalSpec, convs: list[Convergent], extra: int) -> list[Convergent]:
    """``convs`` plus ``extra`` further convergents, continuing the recurrence
    from the last two entries when the partial quotients allow it."""
    if extra <= 0:
        return list(convs)
    if isinstance(spec, PrescribedExponent) and len(convs) >= max(2, len(spec.seed)):
        out = list(convs)
        for _ in range(extra):
            c1, c0 = out[-1], out[-2]
            a = max(mpz(1), _ceil_power(c1.q, spec.eta - 2))
            out.append(Convergent(c1.index + 1, a * c1.p + c0.p, a * c1.q + c0.q))
        return out
    return convergents(spec, len(convs) + extra)


def verify_convergent_errors(spec: IrrationalSpec, convs: list[Convergent],
                             frac_bits: int = DEFAULT_FRAC_BITS):
    """Check |alpha - p_i/q_i| < 1/(q_i q_{i+1}) for every consecutive pair.

    Each index is first tried with alpha at ``frac_bits``.  Indices the
    interval cannot settle there are retried at bits(q_{i+1}) + bits(q_{i+2})
    + 64 bits, about what separating the two sides takes; the extra
    precision comes from one convergent past the end of ``convs``.
    Returns a list of (result, bits_used) with result True/False/None.
    """
    a0 = integer_part(spec)
    base = alpha_fixed_point(spec, frac_bits)
    out = []
    pending = []
    for i in range(len(convs) - 1):
        r = convergent_error_check(base, a0, convs[i], convs[i + 1].q)
        out.append((r, frac_bits))
        if r is None:
            pending.append(i)
    if not pending:
        return out
    ext = extend_convergents(spec, convs, 1)
    need = {i: int(ext[i + 1].q.bit_length() + ext[i + 2].q.bit_length()) + 64 for i in pending}
    top_bits = max(need.values())
    last = ext[-1]
    if 2 * (last.q.bit_length() - 1) <= top_bits + 2:
        raise PrecisionError("not enough convergents to escalate precision")
    fine = _fixed_point_from(last.p, last.q, top_bits)
    del ext
    for i in pending:
        shift = top_bits - need[i]
        coarse = FixedPointAlpha(need[i], fine.value >> shift)
        out[i] = (convergent_error_check(coarse, a0, convs[i], convs[i + 1].q, 2), need[i])
    return out


def _approx_exceeds(alpha: FixedPointAlpha, a0: int, p, q, tau: Fraction):
    """Decide |alpha - p/q| > q^-tau; None if the interval straddles it."""
    B = alpha.frac_bits
    V = Fraction((mpz(a0) << B) + alpha.value, 1 << B)
    rad = Fraction(1, 1 << B)
    delta = abs(V - Fraction(int(p), int(q)))
    lo, hi = delta - rad, delta + rad
    n, d = tau.numerator, tau.denominator
    # delta > q^{-n/d}  <=>  delta^d * q^n > 1
    qn = Fraction(int(q)) ** n
    if lo > 0 and lo ** d * qn > 1:
        return True
    if hi ** d * qn <= 1:
        return False
    return None


def select_q(spec: IrrationalSpec, x: int, tau, frac_bits: int = DEFAULT_FRAC_BITS,
             alpha: FixedPointAlpha | None = None) -> QSelection:
    """Pick q = q_i with q_{i-1} <= x^(1/tau) < q_i and check q^(tau/(tau-1)) < x < q^tau."""
    tau = Fraction(tau)
    if tau <= 2:
        raise ValueError(f"tau must exceed 2, got {tau}")
    if x < 2:
        raise ValueError("x must be >= 2")
    n, d = tau.numerator, tau.denominator
    xd = mpz(x) ** d
    prev = None
    for i, (_, p, q) in enumerate(_iter_convergents(spec)):
        if prev is not None and prev[1] ** n <= xd < q ** n:
            break
        prev = (p, q)
    else:
        raise SelectionError(f"no convergent pair straddles x={x} for tau={tau}")
    p_prev, q_prev = prev
    xrange_ok = bool(q ** n < mpz(x) ** (n - d) and xd < q ** n)
    if alpha is None:
        try:
            alpha = alpha_fixed_point(spec, frac_bits)
        except PrecisionError:
            alpha = None
    approx = None
    if alpha is not None:
        approx = _approx_exceeds(alpha, integer_part(spec), p_prev, q_prev, tau)
    if approx is None:
        warnings.warn(f"|alpha - p/q| > q^-tau undecided at q={q_prev}", RuntimeWarning)
    return QSelection(tau, i, int(q), xrange_ok, bool(approx), int(q_prev), int(p_prev), int(p))


def q_range_holds(x: int, q: int, tau) -> tuple[bool, bool]:
    """(q < x^(1-1/tau), x/q < x^(1-1/tau)) by exact power comparison."""
    tau = Fraction(tau)
    n, d = tau.numerator, tau.denominator
    x, q = mpz(x), mpz(q)
    return bool(q ** n < x ** (n - d)), bool(x ** d < q ** n)


def default_eta(spec: IrrationalSpec) -> Fraction | None:
    """Known irrationality exponent, or None when it has to be estimated."""
    if isinstance(spec, QuadraticSurd):
        return Fraction(2)
    if isinstance(spec, PrescribedExponent):
        return spec.eta
    return None


def default_tau(eta) -> Fraction:
    """tau = max(eta + 1/10, 5/2) as an exact rational."""
    eta = Fraction(eta).limit_denominator(1000)
    return max(eta + Fraction(1, 10), Fraction(5, 2))
