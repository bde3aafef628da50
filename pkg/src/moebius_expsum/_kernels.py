"""numba kernels: 128-bit fixed-point phases, Neumaier accumulation and a
fixed-shape pairwise reduction.

Phases are kept as (hi, lo) uint64 pairs holding {alpha n} * 2^128 mod 2^128,
so stepping n -> n + 1 is an exact integer addition.  Parallel loops write one
partial sum per fixed chunk; chunk boundaries never depend on thread count,
and the chunk partials are combined by ``tree_reduce`` in a fixed order.
"""
import math

import numpy as np
from numba import njit, prange

M32 = np.uint64(0xFFFFFFFF)
S32 = np.uint64(32)
ONE = np.uint64(1)
TWO_PI = 2.0 * math.pi
INV_2_64 = 2.0**-64


@njit(inline="always")
def mulhi64(a, b):
    a0 = a & M32
    a1 = a >> S32
    b0 = b & M32
    b1 = b >> S32
    ll = a0 * b0
    lh = a0 * b1
    hl = a1 * b0
    mid = (ll >> S32) + (lh & M32) + (hl & M32)
    return a1 * b1 + (lh >> S32) + (hl >> S32) + (mid >> S32)


@njit(inline="always")
def phase_mul(n, a_hi, a_lo):
    """n * A mod 2^128 for a uint64 n."""
    return n * a_hi + mulhi64(n, a_lo), n * a_lo


@njit(inline="always")
def phase_add(hi, lo, s_hi, s_lo):
    lo2 = lo + s_lo
    carry = ONE if lo2 < lo else np.uint64(0)
    return hi + s_hi + carry, lo2


@njit(inline="always")
def centered(hi):
    """Phase in [-1/2, 1/2) as a float."""
    return np.float64(np.int64(hi)) * INV_2_64


@njit(inline="always")
def two_sum(a, b):
    s = a + b
    bp = s - a
    e = (a - (s - bp)) + (b - bp)
    return s, e


@njit(inline="always")
def neumaier(s, c, v):
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


@njit(cache=True)
def tree_reduce(s, c):
    """Pairwise sum of (s[i] + c[i]) with a shape fixed by len(s) alone."""
    n = s.shape[0]
    if n == 0:
        return 0.0, 0.0
    s = s.copy()
    c = c.copy()
    while n > 1:
        half = n // 2
        for i in range(half):
            t, e = two_sum(s[2 * i], s[2 * i + 1])
            s[i] = t
            c[i] = c[2 * i] + c[2 * i + 1] + e
        if n % 2:
            s[half] = s[n - 1]
            c[half] = c[n - 1]
            half += 1
        n = half
    return s[0], c[0]


@njit(parallel=True, cache=True)
def mobius_chunks(mu, x, a_hi, a_lo, chunk, out):
    """out[j] = (re_s, re_c, im_s, im_c, weight) for n in chunk j of 1..x."""
    nchunks = out.shape[0]
    for j in prange(nchunks):
        n0 = j * chunk + 1
        n1 = min(x, n0 + chunk - 1)
        hi, lo = phase_mul(np.uint64(n0), a_hi, a_lo)
        rs = 0.0
        rc = 0.0
        is_ = 0.0
        ic = 0.0
        w = 0.0
        for n in range(n0, n1 + 1):
            m = mu[n]
            if m != 0:
                ang = TWO_PI * centered(hi)
                if m > 0:
                    rs, rc = neumaier(rs, rc, math.cos(ang))
                    is_, ic = neumaier(is_, ic, math.sin(ang))
                else:
                    rs, rc = neumaier(rs, rc, -math.cos(ang))
                    is_, ic = neumaier(is_, ic, -math.sin(ang))
                w += 1.0
            hi, lo = phase_add(hi, lo, a_hi, a_lo)
        out[j, 0] = rs
        out[j, 1] = rc
        out[j, 2] = is_
        out[j, 3] = ic
        out[j, 4] = w


@njit(cache=True)
def _linear_one(m, L, a_hi, a_lo, threshold):
    """sum_{l=1}^{L} e(alpha m l) -> (re, im, magnitude bound, used_closed_form)."""
    if L == 0:
        return 0.0, 0.0, 0.0, False
    s_hi, s_lo = phase_mul(np.uint64(m), a_hi, a_lo)
    th = centered(s_hi)
    dist = abs(th)
    bound = float(L)
    if dist > 0.0:
        bound = min(bound, 0.5 / dist)
    if dist >= threshold:
        # e((th + thL)/2) sin(pi thL) / sin(pi th); invariant under either
        # phase moving by an integer, so centred representatives suffice
        l_hi, l_lo = phase_mul(np.uint64(m) * np.uint64(L), a_hi, a_lo)
        thl = centered(l_hi)
        mag = math.sin(math.pi * thl) / math.sin(math.pi * th)
        ang = math.pi * (th + thl)
        return mag * math.cos(ang), mag * math.sin(ang), bound, True
    hi, lo = s_hi, s_lo
    rs = 0.0
    rc = 0.0
    is_ = 0.0
    ic = 0.0
    for _ in range(L):
        ang = TWO_PI * centered(hi)
        rs, rc = neumaier(rs, rc, math.cos(ang))
        is_, ic = neumaier(is_, ic, math.sin(ang))
        hi, lo = phase_add(hi, lo, s_hi, s_lo)
    return rs + rc, is_ + ic, bound, False


@njit(parallel=True, cache=True)
def linear_many(ms, Ls, a_hi, a_lo, threshold, out_re, out_im, out_bound, out_closed):
    for j in prange(ms.shape[0]):
        re, im, b, cl = _linear_one(ms[j], Ls[j], a_hi, a_lo, threshold)
        out_re[j] = re
        out_im[j] = im
        out_bound[j] = b
        out_closed[j] = cl


@njit(parallel=True, cache=True)
def bilinear_rows(a_re, a_im, k0, b_re, b_im, n0, x, a_hi, a_lo, out):
    """Row j handles k = k0 + j: a_k * sum_{n0 <= n <= x/k} b_n e(alpha k n).

    out[j] = (re, 0, im, 0, weight) with weight = |a_k| * sum |b_n|.
    """
    for j in prange(a_re.shape[0]):
        ar = a_re[j]
        ai = a_im[j]
        k = k0 + j
        nmax = x // k
        if (ar == 0.0 and ai == 0.0) or nmax < n0:
            for t in range(5):
                out[j, t] = 0.0
            continue
        s_hi, s_lo = phase_mul(np.uint64(k), a_hi, a_lo)
        hi, lo = phase_mul(np.uint64(k) * np.uint64(n0), a_hi, a_lo)
        rs = 0.0
        rc = 0.0
        is_ = 0.0
        ic = 0.0
        w = 0.0
        for n in range(n0, nmax + 1):
            br = b_re[n]
            bi = b_im[n]
            if br != 0.0 or bi != 0.0:
                ang = TWO_PI * centered(hi)
                co = math.cos(ang)
                si = math.sin(ang)
                rs, rc = neumaier(rs, rc, br * co - bi * si)
                is_, ic = neumaier(is_, ic, br * si + bi * co)
                w += math.sqrt(br * br + bi * bi)
            hi, lo = phase_add(hi, lo, s_hi, s_lo)
        re = rs + rc
        im = is_ + ic
        out[j, 0] = ar * re - ai * im
        out[j, 1] = 0.0
        out[j, 2] = ar * im + ai * re
        out[j, 3] = 0.0
        out[j, 4] = w * math.sqrt(ar * ar + ai * ai)
