"""Error-controlled evaluation of S(x) = sum_{n<=x} mu(n) e(alpha n), the
inner geometric sums, the Type I / Type II sums of Vaughan's identity, and the
identity's residual.

Error model: every summand z_i carries a magnitude bound w_i.  Rounding in
the phase-to-angle conversion, cos/sin and the compensated accumulation
together stay below ``UNIT_ERR`` * w_i per term (about 8 eps for the
worst path, see ``_kernels``); fixed-point truncation of alpha adds
2 pi n 2^-bits per unit of weight.  ``err_bound`` is that per-weight rate
times the total weight.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass

import numba
import numpy as np

from . import _kernels as K
from .arith import Tables, gamma_array, tau_block
from .diophantine import FixedPointAlpha
from .errors import InvariantError, PrecisionError

EPS = 2.0**-52
UNIT_ERR = 16 * EPS
LINEAR_THRESHOLD = 2.0**-20
DEFAULT_CHUNK = 2**16
DEFAULT_TAU_BLOCK = 2**16


@dataclass(frozen=True)
class ComplexSum:
    re: float
    im: float
    terms: int
    err_bound: float
    weight: float = 0.0

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def abs(self) -> float:
        return math.hypot(self.re, self.im)

    def scaled(self, c):
        return ComplexSum(c * self.re, c * self.im, self.terms, abs(c) * self.err_bound,
                          abs(c) * self.weight)


ZERO = ComplexSum(0.0, 0.0, 0, 0.0, 0.0)


@dataclass(frozen=True)
class VaughanDecomposition:
    x: int
    M: int
    N: int
    t1: ComplexSum
    t2: ComplexSum
    s_M: ComplexSum
    s_N: ComplexSum
    s_total: ComplexSum
    residual: float
    variant: str = "exact"

    @property
    def err_budget(self) -> float:
        return (self.t1.err_bound + self.t2.err_bound + self.s_M.err_bound
                + self.s_N.err_bound + self.s_total.err_bound)

    @property
    def within_budget(self) -> bool:
        return self.residual <= self.err_budget


@contextlib.contextmanager
def workers(n: int | None):
    """Run the enclosed numba kernels on ``n`` threads (None: leave as is)."""
    if n is None:
        yield
        return
    limit = numba.config.NUMBA_NUM_THREADS
    if not 1 <= n <= limit:
        raise ValueError(f"workers must be in 1..{limit} (set NUMBA_NUM_THREADS to raise it)")
    old = numba.get_num_threads()
    numba.set_num_threads(n)
    try:
        yield
    finally:
        numba.set_num_threads(old)


def _guard(alpha: FixedPointAlpha, nmax: int):
    # phase error nmax * 2^-bits must stay below 2^-64; kernels also need nmax < 2^64
    bits = alpha.kernel_bits
    if nmax >= 2 ** (bits - 64) or nmax >= 2**64:
        raise PrecisionError(
            f"index {nmax} exceeds the phase precision guard for {alpha.frac_bits}"
            f" fractional bits; use more frac_bits")


def error_rate(alpha, nmax):
    return UNIT_ERR + 2 * math.pi * nmax * 2.0 ** -alpha.kernel_bits


def _words(alpha):
    hi, lo = alpha.words
    return np.uint64(hi), np.uint64(lo)


def _finish(rows: np.ndarray, terms: int, rate: float) -> ComplexSum:
    re_s, re_c = K.tree_reduce(rows[:, 0], rows[:, 1])
    im_s, im_c = K.tree_reduce(rows[:, 2], rows[:, 3])
    weight = math.fsum(rows[:, 4])
    return ComplexSum(re_s + re_c, im_s + im_c, terms, rate * weight, weight)


def phase(alpha: FixedPointAlpha, n: int) -> float:
    """{alpha n} in [0, 1), exact to the fixed-point precision."""
    if n < 1:
        raise ValueError("n must be positive")
    if n >= 2 ** (alpha.frac_bits - 64):
        raise PrecisionError(
            f"n={n} needs more than {alpha.frac_bits} fractional bits")
    B = alpha.frac_bits
    r = (alpha.value * n) & ((1 << B) - 1)
    return math.ldexp(r >> max(B - 64, 0), -min(B, 64))


def _check_tables(tables, n, what):
    if n > tables.limit:
        raise IndexError(f"{what}={n} exceeds sieve limit {tables.limit}")


def mobius_sum(x: int, alpha: FixedPointAlpha, tables: Tables, chunk: int = DEFAULT_CHUNK,
               n_workers: int | None = None) -> ComplexSum:
    """S(x) with per-chunk compensated sums and a fixed reduction tree.

    The result depends on ``chunk`` but never on ``n_workers``.
    """
    x = int(x)
    if x < 1:
        return ZERO
    _check_tables(tables, x, "x")
    _guard(alpha, x)
    a_hi, a_lo = _words(alpha)
    nchunks = -(-x // chunk)
    rows = np.empty((nchunks, 5))
    with workers(n_workers):
        K.mobius_chunks(tables.mu, x, a_hi, a_lo, chunk, rows)
    return _finish(rows, x, error_rate(alpha, x))


def linear_sums(alpha: FixedPointAlpha, ms, Ls, threshold: float = LINEAR_THRESHOLD):
    """Vectorised sum_{l<=L} e(alpha m l): arrays (re, im, magnitude bound, closed_form)."""
    ms = np.ascontiguousarray(ms, dtype=np.uint64)
    Ls = np.ascontiguousarray(Ls, dtype=np.int64)
    if ms.shape != Ls.shape:
        raise ValueError("ms and Ls must have the same shape")
    if len(ms):
        if Ls.min() < 0:
            raise ValueError("L must be nonnegative")
        top = float(np.max(ms.astype(np.float64) * Ls))
        if top > 2.0**60:
            top = max(int(m) * int(L) for m, L in zip(ms, Ls))
        _guard(alpha, int(top))
    a_hi, a_lo = _words(alpha)
    n = len(ms)
    re, im, bound = np.empty(n), np.empty(n), np.empty(n)
    closed = np.empty(n, dtype=np.bool_)
    K.linear_many(ms, Ls, a_hi, a_lo, threshold, re, im, bound, closed)
    return re, im, bound, closed


def linear_sum(alpha: FixedPointAlpha, m: int, L: int,
               threshold: float = LINEAR_THRESHOLD) -> ComplexSum:
    if m < 1:
        raise ValueError("m must be positive")
    re, im, bound, _ = linear_sums(alpha, [m], [L], threshold)
    return ComplexSum(float(re[0]), float(im[0]), int(L),
                      error_rate(alpha, m * L) * float(bound[0]), float(bound[0]))


def distance_to_integer(alpha: FixedPointAlpha, m: int) -> float:
    """||alpha m|| from the fixed-point phase."""
    f = phase(alpha, m)
    return min(f, 1.0 - f)


@numba.njit(cache=True)
def _divisor_counts(n):
    d = np.zeros(n + 1, dtype=np.int64)
    for a in range(1, n + 1):
        for b in range(a, n + 1, a):
            d[b] += 1
    return d


def type1_sum(x: int, M: int, N: int, alpha: FixedPointAlpha, tables: Tables,
              variant: str = "exact", check: bool = True,
              threshold: float = LINEAR_THRESHOLD) -> ComplexSum:
    """T_I = sum_{k <= MN} gamma(k) sum_{l <= x/k} e(alpha l k)."""
    kmax = min(M * N, x)
    if kmax < 1:
        return ZERO
    _check_tables(tables, kmax, "min(MN, x)")
    gam = gamma_array(kmax, M, N, tables, variant)
    if check:
        bad = np.nonzero(np.abs(gam[1:]) > _divisor_counts(kmax)[1:])[0]
        if len(bad):
            raise InvariantError(f"|gamma(k)| > d(k) at k={bad[0] + 1}")
    ks = np.nonzero(gam)[0]
    Ls = x // ks
    re, im, bound, _ = linear_sums(alpha, ks, Ls, threshold)
    g = gam[ks].astype(np.float64)
    rows = np.zeros((len(ks), 5))
    rows[:, 0] = g * re
    rows[:, 2] = g * im
    rows[:, 4] = np.abs(g) * bound
    return _finish(rows, int(Ls.sum()), error_rate(alpha, x))


def _bilinear(x, kmin, kmax, nmin, a_block, b_re, b_im, alpha, block):
    """Rows of sum_{k in [kmin, kmax]} a_k sum_{nmin <= n <= x/k} b_n e(alpha k n)."""
    a_hi, a_lo = _words(alpha)
    parts = []
    for k0 in range(kmin, kmax + 1, block):
        width = min(block, kmax + 1 - k0)
        a_re, a_im = a_block(k0, width)
        rows = np.empty((width, 5))
        K.bilinear_rows(a_re, a_im, k0, b_re, b_im, nmin, x, a_hi, a_lo, rows)
        parts.append(rows)
    return np.concatenate(parts) if parts else np.zeros((0, 5))


def _pair_count(x, kmin, kmax, nmin):
    return sum(max(0, x // k - nmin + 1) for k in range(kmin, kmax + 1))


def type2_sum(x: int, M: int, N: int, alpha: FixedPointAlpha, tables: Tables,
              block: int = DEFAULT_TAU_BLOCK, check: bool = True,
              n_workers: int | None = None) -> ComplexSum:
    """T_II = sum_{kn <= x, k > M, n > N} mu(n) tau(k, M) e(alpha k n).

    tau(k, M) is built block by block (``block`` values of k at a time).
    """
    kmin, kmax = M + 1, x // (N + 1)
    if kmax < kmin or x // kmin <= N:
        return ZERO
    _check_tables(tables, x, "x")
    _guard(alpha, x)
    nmax = x // kmin
    b_re = tables.mu[: nmax + 1].astype(np.float64)
    b_im = np.zeros_like(b_re)
    dcount = _divisor_counts(kmax) if check else None

    def a_block(k0, width):
        t = tau_block(k0, width, M, tables)
        if check and np.any(np.abs(t) > dcount[k0:k0 + width]):
            raise InvariantError(f"|tau(k, M)| > d(k) in block starting at {k0}")
        return t.astype(np.float64), np.zeros(width)

    with workers(n_workers):
        rows = _bilinear(x, kmin, kmax, N + 1, a_block, b_re, b_im, alpha, block)
    return _finish(rows, _pair_count(x, kmin, kmax, N + 1), error_rate(alpha, x))


def bilinear_sum(x: int, M: int, N: int, alpha: FixedPointAlpha, a_seq, b_seq,
                 block: int = DEFAULT_TAU_BLOCK, n_workers: int | None = None) -> ComplexSum:
    """sum_{mn <= x, m > M, n > N} a_m b_n e(alpha m n) for complex sequences
    indexed directly by m and n (index 0 unused)."""
    kmin, kmax = M + 1, x // (N + 1)
    if kmax < kmin or x // kmin <= N:
        return ZERO
    _guard(alpha, x)
    a_seq = np.asarray(a_seq, dtype=np.complex128)
    b_seq = np.asarray(b_seq, dtype=np.complex128)
    nmax = x // kmin
    if len(a_seq) <= kmax or len(b_seq) <= nmax:
        raise IndexError("sequences too short for the summation range")
    b_re = np.ascontiguousarray(b_seq[: nmax + 1].real)
    b_im = np.ascontiguousarray(b_seq[: nmax + 1].imag)

    def a_block(k0, width):
        seg = a_seq[k0:k0 + width]
        return np.ascontiguousarray(seg.real), np.ascontiguousarray(seg.imag)

    with workers(n_workers):
        rows = _bilinear(x, kmin, kmax, N + 1, a_block, b_re, b_im, alpha, block)
    return _finish(rows, _pair_count(x, kmin, kmax, N + 1), error_rate(alpha, x))


def vaughan_decompose(x: int, M: int, N: int, alpha: FixedPointAlpha, tables: Tables,
                      variant: str = "exact", n_workers: int | None = None) -> VaughanDecomposition:
    """All five sums of the identity S(x) = -T_I + T_II + S(M) + S(N).

    With the exact gamma the identity holds term by term, so ``residual``
    measures floating-point error only.  Boundary sums run to min(M, x),
    min(N, x).
    """
    if x < 1 or M < 1 or N < 1:
        raise ValueError("x, M, N must be positive")
    s_total = mobius_sum(x, alpha, tables, n_workers=n_workers)
    s_M = mobius_sum(min(M, x), alpha, tables, n_workers=n_workers)
    s_N = mobius_sum(min(N, x), alpha, tables, n_workers=n_workers)
    with workers(n_workers):
        t1 = type1_sum(x, M, N, alpha, tables, variant)
    t2 = type2_sum(x, M, N, alpha, tables, n_workers=n_workers)
    re = math.fsum([s_total.re, t1.re, -t2.re, -s_M.re, -s_N.re])
    im = math.fsum([s_total.im, t1.im, -t2.im, -s_M.im, -s_N.im])
    return VaughanDecomposition(x, M, N, t1, t2, s_M, s_N, s_total, math.hypot(re, im), variant)
