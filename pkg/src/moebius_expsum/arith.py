"""Sieve-backed arithmetic: Moebius values, smallest prime factors, divisor
counts and the two divisor-restricted Moebius sums used by Vaughan's identity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import CapacityError

# bytes per sieve index: int8 mu + int32 spf + amortised prime list
BYTES_PER_ENTRY = 6
DEFAULT_MEMORY_BUDGET = 2 * 1024**3


@dataclass(frozen=True, eq=False)
class MobiusTable:
    limit: int
    values: np.ndarray  # int8, index 0 unused

    def __getitem__(self, n):
        return int(self.values[n])


@dataclass(frozen=True, eq=False)
class SpfTable:
    limit: int
    spf: np.ndarray  # int32, spf[0] = spf[1] = 0

    def __getitem__(self, n):
        return int(self.spf[n])


@dataclass(frozen=True, eq=False)
class Tables:
    mobius: MobiusTable
    spf: SpfTable

    @property
    def limit(self):
        return self.mobius.limit

    @property
    def mu(self):
        return self.mobius.values


@dataclass(frozen=True)
class CoeffQuery:
    k: int
    M: int
    N: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.M < 0 or self.N < 0:
            raise ValueError("thresholds M, N must be nonnegative")


@njit(cache=True)
def _linear_sieve(limit, mu, spf, primes):
    mu[1] = 1
    count = 0
    for i in range(2, limit + 1):
        if spf[i] == 0:
            spf[i] = i
            mu[i] = -1
            primes[count] = i
            count += 1
        si = spf[i]
        for j in range(count):
            p = primes[j]
            ip = i * p
            if p > si or ip > limit:
                break
            spf[ip] = p
            if p == si:
                mu[ip] = 0
            else:
                mu[ip] = -mu[i]
    return count


def _prime_count_bound(limit):
    # Rosser-Schoenfeld: pi(n) < 1.25506 n / ln n for n > 1
    if limit < 17:
        return 7
    return int(1.25506 * limit / np.log(limit)) + 1


def build_tables(limit: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> Tables:
    """Linear sieve for mu(n) and spf(n), 1 <= n <= limit, in O(limit) time."""
    limit = int(limit)
    if limit < 1:
        raise ValueError(f"sieve limit must be >= 1, got {limit}")
    if limit >= 2**31 - 1:
        raise CapacityError(f"sieve limit {limit} exceeds int32 spf storage")
    need = BYTES_PER_ENTRY * (limit + 1)
    if need > memory_budget:
        raise CapacityError(
            f"sieve limit {limit} needs ~{need} bytes, budget is {memory_budget}")
    mu = np.zeros(limit + 1, dtype=np.int8)
    spf = np.zeros(limit + 1, dtype=np.int32)
    primes = np.empty(_prime_count_bound(limit), dtype=np.int32)
    _linear_sieve(limit, mu, spf, primes)
    mu.flags.writeable = False
    spf.flags.writeable = False
    return Tables(MobiusTable(limit, mu), SpfTable(limit, spf))


def _check_range(k, limit):
    if not 1 <= k <= limit:
        raise IndexError(f"k={k} outside sieve range 1..{limit}")


def factorize(k: int, spf) -> list[tuple[int, int]]:
    """Prime factorisation of k as [(p, e), ...] by repeated spf lookups."""
    if isinstance(spf, Tables):
        spf = spf.spf
    table = spf.spf if isinstance(spf, SpfTable) else spf
    out = []
    while k > 1:
        p = int(table[k])
        e = 0
        while k % p == 0:
            k //= p
            e += 1
        out.append((p, e))
    return out


def divisors(k: int, spf) -> list[int]:
    divs = [1]
    for p, e in factorize(k, spf):
        divs = [d * p**j for d in divs for j in range(e + 1)]
    return divs


def _spf_of(tables):
    return tables.spf if isinstance(tables, Tables) else tables


def divisor_count(k: int, spf) -> int:
    spf = _spf_of(spf)
    _check_range(k, spf.limit)
    d = 1
    for _, e in factorize(k, spf):
        d *= e + 1
    return d


def gamma_coeff(query: CoeffQuery, tables: Tables, variant: str = "exact") -> int:
    """Region-(i) coefficient: sum of mu(n) mu(k/n) over n | k with n <= N.

    The exact variant additionally requires k/n <= M, which is what the
    four-region split actually produces; ``variant="literal"`` drops it.
    """
    if variant not in ("exact", "literal"):
        raise ValueError(f"unknown gamma variant {variant!r}")
    k, M, N = query.k, query.M, query.N
    _check_range(k, tables.limit)
    mu = tables.mu
    total = 0
    for n in divisors(k, tables.spf):
        if n > N:
            continue
        if variant == "exact" and k // n > M:
            continue
        total += int(mu[n]) * int(mu[k // n])
    return total


def tau_coeff(query: CoeffQuery, tables: Tables) -> int:
    """Sum of mu(m) over divisors m of k with m > M."""
    k, M = query.k, query.M
    _check_range(k, tables.limit)
    mu = tables.mu
    return sum(int(mu[m]) for m in divisors(k, tables.spf) if m > M)


@njit(cache=True)
def _gamma_fill(out, mu, M, N, kmax, exact):
    for c in range(1, min(N, kmax) + 1):
        if mu[c] == 0:
            continue
        bmax = kmax // c
        if exact and M < bmax:
            bmax = M
        for b in range(1, bmax + 1):
            if mu[b] != 0:
                out[b * c] += mu[b] * mu[c]


def gamma_array(kmax: int, M: int, N: int, tables: Tables, variant: str = "exact") -> np.ndarray:
    """gamma(k) for every 1 <= k <= kmax, built by a Dirichlet-style sweep."""
    if variant not in ("exact", "literal"):
        raise ValueError(f"unknown gamma variant {variant!r}")
    if kmax > tables.limit:
        raise IndexError(f"kmax={kmax} outside sieve range 1..{tables.limit}")
    out = np.zeros(kmax + 1, dtype=np.int64)
    if kmax >= 1:
        _gamma_fill(out, tables.mu, M, N, kmax, variant == "exact")
    return out


@njit(cache=True)
def _tau_block(out, mu, k0, M):
    # out[j] = sum_{m | k0 + j, m > M} mu(m) = [k = 1] - sum_{m | k, m <= M} mu(m)
    width = out.shape[0]
    k1 = k0 + width
    for j in range(width):
        out[j] = 1 if k0 + j == 1 else 0
    for m in range(1, M + 1):
        if mu[m] == 0:
            continue
        start = ((k0 + m - 1) // m) * m
        for k in range(start, k1, m):
            out[k - k0] -= mu[m]


def tau_block(k0: int, width: int, M: int, tables: Tables) -> np.ndarray:
    """tau(k, M) for k0 <= k < k0 + width."""
    if M > tables.limit:
        raise IndexError(f"M={M} outside sieve range 1..{tables.limit}")
    out = np.empty(width, dtype=np.int64)
    if width:
        _tau_block(out, tables.mu, k0, M)
    return out
