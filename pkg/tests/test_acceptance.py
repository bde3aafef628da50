"""Acceptance checks, one test group per criterion.

Each test carries ``@pytest.mark.criterion(n)``; conftest prints one
PASS/FAIL line per criterion at the end of the run.
"""
import json
import math
import os
import subprocess
import sys
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from moebius_expsum import linear_sum, type1_sum, type2_sum, vaughan_decompose
from moebius_expsum.analysis import (ceil_two_fifths, large_eta_exponent, lemma1_check,
                                     lemma2_check, predicted_exponent, small_eta_exponent,
                                     theorem_sweep)
from moebius_expsum.diophantine import (GOLDEN, alpha_fixed_point, convergents, q_range_holds,
                                        estimate_eta, parse_alpha, select_q,
                                        verify_convergent_errors)
from moebius_expsum.expsum import distance_to_integer

import oracles
from conftest import REPORT

crit = pytest.mark.criterion

SWEEP_ALPHAS = ["quad:2", "liouville:3", "liouville:4"]
SWEEP_XS = [10**4, 10**5, 10**6, 10**7]
EPSILON = Fraction(1, 20)


# ---------------------------------------------------------------- 1

@crit(1)
def test_vaughan_identity_grid(small_tables):
    start = time.perf_counter()
    worst = 0.0
    for text in ["quad:2", "golden", "liouville:3"]:
        alpha = alpha_fixed_point(parse_alpha(text))
        for x in [10**3, 10**4, 10**5]:
            M = ceil_two_fifths(x)
            d = vaughan_decompose(x, M, M, alpha, small_tables)
            assert d.residual <= 1e-8, (text, x, d.residual)
            worst = max(worst, d.residual)
    elapsed = time.perf_counter() - start
    REPORT["criterion 1 max residual"] = f"{worst:.3e} ({elapsed:.1f} s)"
    assert elapsed <= 60


# ---------------------------------------------------------------- 2

@crit(2)
def test_region_oracle_equivalence(small_tables, sqrt2):
    start = time.perf_counter()
    X = 2000
    mu = [0] + [oracles.mu_trial(n) for n in range(1, X + 1)]
    ph = oracles.phases_mp(oracles.mp_alpha("quad:2"), X)
    worst = 0.0
    for M in (1, 3, 10, 20):
        for N in (1, 3, 10, 20):
            c1, c4 = oracles.region_coefficients(X, M, N, mu)
            r1, r4 = oracles.prefix_sums(c1, ph), oracles.prefix_sums(c4, ph)
            for x in range(1, X + 1):
                t1 = type1_sum(x, M, N, sqrt2, small_tables, check=False).value
                t2 = type2_sum(x, M, N, sqrt2, small_tables, check=False, n_workers=1).value
                worst = max(worst, abs(t1 - r1[x]), abs(t2 - r4[x]))
    elapsed = time.perf_counter() - start
    REPORT["criterion 2 max deviation"] = f"{worst:.3e} ({elapsed:.1f} s)"
    assert worst <= 1e-10
    assert elapsed <= 30


# ---------------------------------------------------------------- 3

@crit(3)
def test_sieve_matches_trial_division(small_tables):
    mu = small_tables.mu
    bad = [n for n in range(1, 100_001) if mu[n] != oracles.mu_trial(n)]
    assert bad == []


# ---------------------------------------------------------------- 4

@crit(4)
@pytest.mark.parametrize("text", ["quad:2", "golden", "liouville:5/2"])
def test_convergent_exactness(text):
    spec = parse_alpha(text)
    cs = convergents(spec, 50)
    for i in range(1, 50):
        assert cs[i].p * cs[i - 1].q - cs[i - 1].p * cs[i].q == (-1) ** (i - 1)
    results = verify_convergent_errors(spec, cs, frac_bits=256)
    assert len(results) == 49
    assert all(r is True for r, _ in results), [i for i, (r, _) in enumerate(results) if r is not True]
    REPORT[f"criterion 4 {text} max bits"] = max(b for _, b in results)


# ---------------------------------------------------------------- 5

@crit(5)
def test_select_q_golden():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sel = select_q(GOLDEN, 10**6, Fraction(21, 10))
    assert sel.q == 987
    assert sel.xrange_ok
    # q^(tau/(tau-1)) < x  and  x < q^tau, as integer powers
    assert 987**21 < (10**6) ** 11 and (10**6) ** 10 < 987**21


@crit(5)
def test_q_range_on_sweep_grid(grid):
    for text, rows in grid.items():
        for r in rows:
            assert r.error is None, (text, r.x, r.error)
            assert r.xrange_ok, (text, r.x)
            assert q_range_holds(r.x, r.q, r.tau)[0], (text, r.x, r.q)


# ---------------------------------------------------------------- 6

@crit(6)
@pytest.mark.parametrize("text,eta", [("liouville:5/2", 2.5), ("liouville:3", 3.0),
                                      ("liouville:4", 4.0)])
def test_estimate_eta_prescribed(text, eta):
    est = estimate_eta(convergents(parse_alpha(text), 12))
    REPORT[f"criterion 6 eta {text}"] = f"{est:.4f}"
    assert abs(est - eta) <= 0.15


@crit(6)
@pytest.mark.parametrize("text", ["quad:2", "golden"])
def test_estimate_eta_quadratic(text):
    est = estimate_eta(convergents(parse_alpha(text), 30))
    REPORT[f"criterion 6 eta {text}"] = f"{est:.4f}"
    assert abs(est - 2.0) <= 0.05


# ---------------------------------------------------------------- 7

@crit(7)
def test_geometric_sum_bound(sqrt2):
    rng = np.random.default_rng(20240607)
    ms = rng.integers(1, 10**4 + 1, size=1000)
    Ls = rng.integers(1, 10**5 + 1, size=1000)
    for m, L in zip(ms.tolist(), Ls.tolist()):
        s = linear_sum(sqrt2, m, L)
        bound = min(L, 1 / (2 * distance_to_integer(sqrt2, m)))
        assert s.abs <= bound + s.err_bound, (m, L, s.abs, bound)


# ---------------------------------------------------------------- 8, 9

@pytest.fixture(scope="module")
def sweep(mid_tables):
    start = time.perf_counter()
    grid = {text: theorem_sweep(parse_alpha(text), SWEEP_XS, mid_tables, epsilon=EPSILON,
                                lemmas=True)
            for text in SWEEP_ALPHAS}
    elapsed = time.perf_counter() - start
    REPORT["sweep runtime"] = f"{elapsed:.1f} s"
    return grid, elapsed


@pytest.fixture(scope="module")
def grid(sweep):
    return sweep[0]


@crit(8)
def test_sweep_exponent_consistency(sweep, grid):
    assert sweep[1] <= 600
    for text, rows in grid.items():
        assert [r.x for r in rows] == SWEEP_XS
        for r in rows:
            bound = float(predicted_exponent(Fraction(r.eta).limit_denominator(100), EPSILON))
            assert r.emp_exponent <= bound, (text, r.x, r.emp_exponent, bound)
        REPORT[f"criterion 8 {text} emp exponents"] = \
            " ".join(f"{r.emp_exponent:.3f}" for r in rows) + f" <= {rows[0].pred_exponent:.4f}"


@crit(8)
def test_branch_crossover():
    assert large_eta_exponent(Fraction(5, 2)) == small_eta_exponent() == Fraction(4, 5)


@crit(9)
def test_lemma_ratios_finite_positive(grid):
    l1 = [r.lemma1_ratio for rows in grid.values() for r in rows]
    l2 = [r.lemma2_ratio for rows in grid.values() for r in rows]
    for v in l1 + l2:
        assert v is not None and math.isfinite(v) and v > 0
    REPORT["criterion 9 max lemma 1 ratio"] = f"{max(l1):.6g}"
    REPORT["criterion 9 max lemma 2 ratio"] = f"{max(l2):.6g}"


def grid_tau(text):
    return {"quad:2": Fraction(5, 2), "liouville:3": Fraction(31, 10),
            "liouville:4": Fraction(41, 10)}[text]


@crit(9)
@pytest.mark.parametrize("text", SWEEP_ALPHAS)
def test_lemma_lhs_cross_validation(mid_tables, text):
    spec = parse_alpha(text)
    alpha = alpha_fixed_point(spec)
    mpa = oracles.mp_alpha(text)
    x = 10**4
    M = ceil_two_fifths(x)
    sel = select_q(spec, x, grid_tau(text))
    ph = oracles.phases_mp(mpa, x)
    mu = [int(v) for v in mid_tables.mu[: x + 1]]
    r1 = lemma1_check(x, M, alpha, sel)
    r2 = lemma2_check(x, M, M, alpha, sel, "mobius", mid_tables)
    assert abs(r1.lhs - oracles.lemma1_lhs_direct(x, M, ph)) <= 1e-8
    assert abs(r2.lhs - oracles.lemma2_lhs_direct(x, M, M, mu, ph)) <= 1e-8


# ---------------------------------------------------------------- 10

PERF_SCRIPT = r"""
import json, time
from moebius_expsum import build_tables, mobius_sum
from moebius_expsum.diophantine import alpha_fixed_point, parse_alpha
t0 = time.perf_counter()
tables = build_tables(10**8)
alpha = alpha_fixed_point(parse_alpha("quad:2"), 256)
out = {"sieve_s": time.perf_counter() - t0, "runs": {}}
for w in (1, 4, 8):
    t = time.perf_counter()
    s = mobius_sum(10**8, alpha, tables, n_workers=w)
    out["runs"][w] = {"re": s.re.hex(), "im": s.im.hex(), "s": time.perf_counter() - t}
out["total_s"] = time.perf_counter() - t0
# VmHWM belongs to this address space; ru_maxrss would include the parent's peak
with open("/proc/self/status") as fh:
    hwm = next(line for line in fh if line.startswith("VmHWM:"))
out["maxrss_mb"] = int(hwm.split()[1]) / 1024
print(json.dumps(out))
"""


@crit(10)
def test_performance_1e8():
    env = dict(os.environ, NUMBA_NUM_THREADS="8")
    res = subprocess.run([sys.executable, "-c", PERF_SCRIPT], capture_output=True, text=True,
                         env=env, timeout=900)
    assert res.returncode == 0, res.stderr
    info = json.loads(res.stdout.strip().splitlines()[-1])
    runs = list(info["runs"].values())
    REPORT["criterion 10"] = (f"sieve {info['sieve_s']:.1f} s, sums "
                              + ", ".join(f"{w}w {r['s']:.1f} s" for w, r in info["runs"].items())
                              + f", peak RSS {info['maxrss_mb']:.0f} MB")
    assert all((r["re"], r["im"]) == (runs[0]["re"], runs[0]["im"]) for r in runs)
    assert max(r["s"] for r in runs) + info["sieve_s"] <= 300
    assert info["maxrss_mb"] <= 2048
