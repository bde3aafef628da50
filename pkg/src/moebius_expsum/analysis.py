"""Empirical harnesses: lemma ratio checks, the combined Type I / Type II
bound, and the exponent sweep against max(4/5, (2 eta - 1)/(2 eta)) + eps.

Implied constants are taken as 1 throughout; the lhs/rhs ratios are the
measured quantity.  Logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np

from .arith import Tables
from .diophantine import (FixedPointAlpha, IrrationalSpec, QSelection, alpha_fixed_point,
                          convergents, default_eta, default_tau, estimate_eta, select_q)
from .errors import ExpsumError
from .expsum import bilinear_sum, error_rate, linear_sums, mobius_sum

DEFAULT_EPSILON = Fraction(1, 20)
SEQ_CHOICES = ("mobius", "ones", "random")


@dataclass(frozen=True)
class LemmaRatio:
    x: int
    M: int
    N: int | None
    q: int
    lhs: float
    rhs: float
    ratio: float
    lhs_err: float = 0.0
    seq: str | None = None


@dataclass(frozen=True)
class SweepRecord:
    x: int
    M: int
    abs_sum: float
    emp_exponent: float
    pred_exponent: float
    eta: float
    tau: Fraction
    q: int | None
    xrange_ok: bool | None
    approx_ok: bool | None
    t1_bound: float | None
    t2_bound: float | None
    lemma1_ratio: float | None = None
    lemma2_ratio: float | None = None
    error: str | None = None


def ceil_two_fifths(x: int) -> int:
    """ceil(x^(2/5)) exactly: the least m with m^5 >= x^2."""
    root, exact = gmpy2.iroot(gmpy2.mpz(x) ** 2, 5)
    return int(root) if exact else int(root) + 1


def small_eta_exponent() -> Fraction:
    return Fraction(4, 5)


def large_eta_exponent(eta):
    return (2 * eta - 1) / (2 * eta)


def predicted_exponent(eta, epsilon=DEFAULT_EPSILON):
    """max(4/5, (2 eta - 1)/(2 eta)) + epsilon; exact when the inputs are Fractions."""
    return max(small_eta_exponent(), large_eta_exponent(eta)) + epsilon


def _q_of(qsel):
    return qsel.q if isinstance(qsel, QSelection) else int(qsel)


def proposition_bounds(x: int, M: int, N: int, qsel, epsilon=DEFAULT_EPSILON):
    """(T_I bound, T_II bound) with unit constants:
    (MN + x/q + q) x^eps log(2qx) and (x/M + x/N + x/q + q)^(1/2) x^(1/2 + eps) (log x)^2.
    """
    q = _q_of(qsel)
    eps = float(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    t1 = (M * N + x / q + q) * x**eps * math.log(2 * q * x)
    t2 = math.sqrt(x / M + x / N + x / q + q) * x ** (0.5 + eps) * math.log(x) ** 2
    return t1, t2


def theorem_bounds(x: int, tau, epsilon=DEFAULT_EPSILON):
    """Right-hand sides once M = N = x^(2/5) and q sits in its tau-range:
    (x^(4/5) + x^(1 - 1/tau)) x^eps and (x^(8/5) + x^(2 - 1/tau))^(1/2) x^eps."""
    t = float(tau)
    eps = float(epsilon)
    t1 = (x**0.8 + x ** (1 - 1 / t)) * x**eps
    t2 = math.sqrt(x**1.6 + x ** (2 - 1 / t)) * x**eps
    return t1, t2


def lemma1_check(x: int, M: int, alpha: FixedPointAlpha, qsel,
                 tables: Tables | None = None) -> LemmaRatio:
    """lhs = sum_{m <= M} |sum_{n <= x/m} e(alpha m n)| against (M + x/q + q) log(2qx)."""
    q = _q_of(qsel)
    ms = np.arange(1, M + 1, dtype=np.uint64)
    Ls = x // np.arange(1, M + 1, dtype=np.int64)
    re, im, bound, _ = linear_sums(alpha, ms, Ls)
    lhs = math.fsum(np.hypot(re, im))
    lhs_err = error_rate(alpha, x) * math.fsum(bound)
    rhs = (M + x / q + q) * math.log(2 * q * x)
    return LemmaRatio(x, M, None, q, lhs, rhs, lhs / rhs, lhs_err)


def lemma2_sequences(choice: str, size: int, tables: Tables | None = None, seed: int = 0):
    """(a, b) complex sequences of modulus <= 1, indexed 0..size-1."""
    if choice == "mobius":
        if tables is None:
            raise ValueError("mobius sequences need sieve tables")
        if size - 1 > tables.limit:
            raise IndexError(f"sequence length {size} exceeds sieve limit {tables.limit}")
        mu = tables.mu[:size].astype(np.complex128)
        return mu, mu
    if choice == "ones":
        ones = np.ones(size, dtype=np.complex128)
        return ones, ones
    if choice == "random":
        rng = np.random.default_rng(seed)
        u = rng.random((2, size))
        seqs = np.exp(2j * np.pi * u)
        return seqs[0], seqs[1]
    raise ValueError(f"seq_choice must be one of {SEQ_CHOICES}, got {choice!r}")


def lemma2_check(x: int, M: int, N: int, alpha: FixedPointAlpha, qsel, seq_choice: str = "mobius",
                 tables: Tables | None = None, seed: int = 0,
                 n_workers: int | None = None) -> LemmaRatio:
    """lhs = |sum_{mn <= x, m > M, n > N} a_m b_n e(alpha m n)| against
    (x/M + x/N + x/q + q)^(1/2) x^(1/2) (log x)^2."""
    q = _q_of(qsel)
    size = x // (min(M, N) + 1) + 1
    a, b = lemma2_sequences(seq_choice, size, tables, seed)
    s = bilinear_sum(x, M, N, alpha, a, b, n_workers=n_workers)
    rhs = math.sqrt(x / M + x / N + x / q + q) * math.sqrt(x) * math.log(x) ** 2
    return LemmaRatio(x, M, N, q, s.abs, rhs, s.abs / rhs, s.err_bound, seq_choice)


def resolve_eta(spec: IrrationalSpec, eta=None, count: int = 30):
    if eta is not None:
        return Fraction(eta)
    known = default_eta(spec)
    if known is not None:
        return known
    return estimate_eta(convergents(spec, count))


def theorem_sweep(spec: IrrationalSpec, xs, tables: Tables, tau=None,
                  epsilon=DEFAULT_EPSILON, eta=None, frac_bits: int = 256,
                  lemmas: bool = False, seed: int = 0,
                  n_workers: int | None = None) -> list[SweepRecord]:
    """One record per x, in input order.  Selection failures are recorded on
    the row rather than raised."""
    eta = resolve_eta(spec, eta)
    tau = default_tau(eta) if tau is None else Fraction(tau)
    pred = predicted_exponent(eta, Fraction(epsilon))
    alpha = alpha_fixed_point(spec, frac_bits)
    if max(xs) > tables.limit:
        raise IndexError(f"max x={max(xs)} exceeds sieve limit {tables.limit}")
    rows = []
    for x in xs:
        M = ceil_two_fifths(x)
        s = mobius_sum(x, alpha, tables, n_workers=n_workers)
        emp = math.log(s.abs) / math.log(x) if s.abs > 0 else -math.inf
        common = dict(x=x, M=M, abs_sum=s.abs, emp_exponent=emp, pred_exponent=float(pred),
                      eta=float(eta), tau=tau)
        try:
            sel = select_q(spec, x, tau, alpha=alpha)
        except ExpsumError as exc:
            rows.append(SweepRecord(**common, q=None, xrange_ok=None, approx_ok=None,
                                    t1_bound=None, t2_bound=None, error=str(exc)))
            continue
        t1, t2 = theorem_bounds(x, tau, epsilon)
        l1 = l2 = None
        if lemmas:
            l1 = lemma1_check(x, M, alpha, sel).ratio
            l2 = lemma2_check(x, M, M, alpha, sel, "mobius", tables, seed, n_workers).ratio
        rows.append(SweepRecord(**common, q=sel.q, xrange_ok=sel.xrange_ok,
                                approx_ok=sel.approx_ok, t1_bound=t1, t2_bound=t2,
                                lemma1_ratio=l1, lemma2_ratio=l2))
    return rows
