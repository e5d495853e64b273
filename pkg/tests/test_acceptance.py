"""Acceptance suite: one test per criterion, tolerances pinned.

Each test registers a PASS/FAIL line that conftest prints in the terminal
summary, so a plain pytest run shows the per-criterion outcome.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from betagrowth import bconv, expansions, lyapunov, netautomaton
from betagrowth.cli import main as cli_main
from betagrowth.numberfield import parse_beta

from conftest import ACCEPTANCE_LOG, brute_value_count

PAPER_GAMMA = {
    3: 0.102500, 4: 0.041560, 5: 0.018426, 6: 0.008590, 7: 0.004123,
    8: 0.002014, 9: 0.000993, 10: 0.000493,
}
PAPER_D = {
    4: 1.012318, 5: 1.006510, 6: 1.003341, 7: 1.001695,
    8: 1.000854, 9: 1.000429, 10: 1.000215,
}


def record(criterion: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_LOG.append((criterion, ok, detail))
    assert ok, f"{criterion}: {detail}"


# -- criterion 1 -------------------------------------------------------------

def test_criterion_1_table1_gamma():
    t0 = time.time()
    worst = 0.0
    for n in range(3, 11):
        est = lyapunov.gamma_multinacci_series(n, k_exact=20)
        worst = max(worst, abs(est.over_log2 - PAPER_GAMMA[n]))
    hybrid = lyapunov.gamma_multinacci_series(2, k_exact=20, mc_budget=20_000, seed=0)
    elapsed = time.time() - t0
    ok = worst < 2e-5 and abs(hybrid.over_log2 - 0.302) < 2e-3 and elapsed < 120
    record(
        "1 Table-1 gamma reproduction",
        ok,
        f"max|diff|={worst:.2e} (tol 2e-5), n=2 hybrid={hybrid.over_log2:.6f} "
        f"(0.302 +- 2e-3), {elapsed:.1f}s < 120s",
    )


# -- criterion 2 -------------------------------------------------------------

def test_criterion_2_dimension_column():
    worst = 0.0
    for n, printed in PAPER_D.items():
        sys_n = parse_beta(f"multinacci:{n}", 2)
        d = lyapunov.dimension(lyapunov.gamma_multinacci_series(n), sys_n)
        worst = max(worst, abs(d.value - printed))
    golden = parse_beta("golden", 2)
    d2 = lyapunov.dimension(lyapunov.gamma_multinacci_series(2, seed=0), golden)
    # n = 3: the computed dimension contradicts the printed 1.028876
    tri = parse_beta("multinacci:3", 2)
    est3 = lyapunov.gamma_multinacci_series(3)
    d3 = lyapunov.dimension(est3, tri)
    internal = (math.log(2) - est3.value) / math.log(float(tri.beta))
    ok = (
        worst < 5e-5
        and abs(d2.value - 1.0054) < 1.5e-3  # n=2 printed with +-0.0015
        and abs(d3.value - internal) < 1e-6
        and abs(d3.value - 1.020876) < 5e-5
        and abs(d3.value - 1.028876) > 5e-3  # printed value flagged as misprint
    )
    record(
        "2 Dimension column consistency",
        ok,
        f"max|D-printed|={worst:.2e} (n>=4, tol 5e-5), D2={d2.value:.6f}, "
        f"D3={d3.value:.6f} (flags printed 1.028876 as misprint)",
    )


# -- criterion 3 -------------------------------------------------------------

def test_criterion_3_cross_method_tribonacci(tribonacci):
    t0 = time.time()
    auto = netautomaton.build_automaton(tribonacci)
    chain = lyapunov.parry_chain(auto)
    mc = lyapunov.estimate_gamma_mc(chain, auto, path_len=100_000, n_chains=32, seed=0)
    series = lyapunov.gamma_multinacci_series(3)
    elapsed = time.time() - t0
    diff = abs(mc.value - series.value)
    ok = diff <= 3 * mc.stderr and elapsed < 60
    record(
        "3 Cross-method gamma (tribonacci)",
        ok,
        f"|mc-series|={diff:.2e} <= 3*stderr={3 * mc.stderr:.2e}, {elapsed:.1f}s < 60s",
    )


# -- criterion 4 -------------------------------------------------------------

def test_criterion_4_integer_case(base2m4, binary):
    closed = lyapunov.gamma_integer_case(base2m4)
    auto = netautomaton.build_automaton(base2m4)
    chain = lyapunov.parry_chain(auto)
    mc = lyapunov.estimate_gamma_mc(chain, auto, path_len=50_000, n_chains=16, seed=0)
    auto2 = netautomaton.build_automaton(binary)
    chain2 = lyapunov.parry_chain(auto2)
    mc2 = lyapunov.estimate_gamma_mc(chain2, auto2, path_len=20_000, n_chains=8, seed=0)
    ok = (
        closed.value == math.log(2)
        and abs(mc.value - math.log(2)) <= 3 * mc.stderr
        and lyapunov.gamma_integer_case(binary).value == 0.0
        and mc2.value == 0.0
    )
    record(
        "4 Theorem integer case",
        ok,
        f"closed=log2 exact, |mc-log2|={abs(mc.value - math.log(2)):.1e} "
        f"<= {3 * mc.stderr:.1e}, beta=2 m=2 gives 0 exactly",
    )


# -- criterion 5 -------------------------------------------------------------

def test_criterion_5_oracle_equivalence(golden, tribonacci):
    rng = np.random.default_rng(55)
    checked = 0
    for sys_ in (golden, tribonacci):
        auto = netautomaton.build_automaton(sys_)
        for _ in range(50):
            z = Fraction(int(rng.integers(1, 10 ** 6)), 10 ** 6)
            x = sys_.right_end * z
            series = expansions.prefix_count_series(x, 10, sys_)
            word = netautomaton.coding_of_point(z, 10, auto)
            for n in range(1, 11):
                got = netautomaton.count_via_matrices(auto, word[: n + 1])
                assert got == series[n], (sys_.spec, str(z), n)
                checked += 1
    record(
        "5 Oracle equivalence matrices == DP",
        checked == 1000,
        f"{checked} exact comparisons over 2x50 random points, n <= 10",
    )


# -- criterion 6 -------------------------------------------------------------

def test_criterion_6_automaton_identities(golden, tribonacci):
    details = []
    ok = True
    for sys_ in (golden, tribonacci):
        auto = netautomaton.build_automaton(sys_)
        # (2.7) over all states and (2.8) over the essential class
        for restrict in (None, auto.essential):
            idx = range(auto.size) if restrict is None else sorted(restrict)
            for i in idx:
                total = sys_.field.zero
                for j, _lo, _hi, _T in auto.children[i]:
                    if restrict is not None and j not in restrict:
                        ok = False
                    total = total + auto.ell(j)
                if not (auto.ell(i) - sys_.rho * total).is_zero():
                    ok = False
        ok = ok and auto.v(0) == 1
        ok = ok and netautomaton.products_positive(auto, 12)
        omega = netautomaton.essential_class(auto)  # re-verifies (C5)(i)-(iii)
        ok = ok and omega == auto.essential
        details.append(f"{sys_.spec}: {auto.size} states, |essential|={len(omega)}")
    record("6 Automaton exact identities", ok, "; ".join(details))


# -- criterion 7 -------------------------------------------------------------

def test_criterion_7_growth_bound():
    """100 points per base, sampled inside the switch region where the
    pointwise bound is stated; near the interval endpoints the count stays 1
    for ~log_beta(1/x) levels, so the bare bound provably fails there."""
    t0 = time.time()
    rng = np.random.default_rng(7)
    expected_kappa = {"1.3": Fraction(1, 10), "1.4": Fraction(1, 6), "1.5": Fraction(1, 8)}
    all_ok = True
    for spec, kap_expected in expected_kappa.items():
        sys_ = parse_beta(spec, 2)
        kap = expansions.kappa(sys_)
        all_ok = all_ok and kap == kap_expected
        lo = 1 / float(sys_.beta)
        hi = 1 / (float(sys_.beta) * (float(sys_.beta) - 1))
        for _ in range(100):
            xf = rng.uniform(lo, hi)
            x = Fraction(int(xf * 10 ** 6), 10 ** 6)
            report = expansions.verify_growth_bound(sys_, x, 24)
            if not report.passed:
                all_ok = False
    elapsed = time.time() - t0
    ok = all_ok and elapsed < 120
    record(
        "7 Growth bound 2^(kappa n - 1)",
        ok,
        f"kappa=(1/10,1/6,1/8) by the exact floor procedure, 300 points, "
        f"n <= 24, {elapsed:.1f}s < 120s",
    )


# -- criterion 8 -------------------------------------------------------------

def test_criterion_8_block_counts_and_checkpoints(golden):
    by_enum = [expansions.count_X_m(mm, golden) for mm in range(1, 7)]
    by_brute = [brute_value_count(golden.rho, 2 * mm, golden) for mm in range(1, 7)]
    rows = expansions.sparse_profile((1, 2, 3), golden)
    products = [r.block_product for r in rows]
    ok = by_enum == list(range(1, 7)) and by_enum == by_brute and products == [1, 2, 6]
    record(
        "8a Block counts m and checkpoints (1,2,6)",
        ok,
        f"count_X_m(1..6)={by_enum} (brute force agrees), checkpoints {products}",
    )


@pytest.mark.xfail(
    strict=True,
    reason="log(prod m_j)/n_k over (1,2,6) at n=(3,8,15) is (0, 0.0866, 0.1195), "
    "strictly increasing; with m_1=1 the first ratio is 0, so no count "
    "convention can make the sequence strictly decreasing. See the decisions "
    "ledger for the full analysis.",
)
def test_criterion_8_decay_clause(golden):
    rows = expansions.sparse_profile((1, 2, 3), golden)
    ratios = [r.log_product_over_n for r in rows]
    ok = all(a > b for a, b in zip(ratios, ratios[1:]))
    record("8b Sparse profile strictly decreasing log N/n", ok, f"ratios={ratios}")


def test_criterion_8_summary_line(golden):
    # the decay clause is internally contradictory; record the honest outcome
    rows = expansions.sparse_profile((1, 2, 3), golden)
    ratios = [round(r.log_product_over_n, 4) for r in rows]
    ACCEPTANCE_LOG.append(
        (
            "8b Sparse decay clause",
            False,
            f"UNATTAINABLE AS SPECIFIED: log(prod)/n={ratios} increases from 0; "
            "recorded in the decisions ledger (expected failure, not gamed green)",
        )
    )


# -- criterion 9 -------------------------------------------------------------

def test_criterion_9_garsia(golden):
    rows = expansions.garsia_report(golden, 25)
    ratios = [r.count_over_beta_n for r in rows]
    gaps = [r.min_gap_scaled for r in rows]
    ok = all(1.0 <= c <= 2.0 for c in ratios) and min(gaps) > 0.5
    record(
        "9 Garsia diagnostics",
        ok,
        f"count/beta^n in [{min(ratios):.4f}, {max(ratios):.4f}] subset [1,2]; "
        f"empirical C = min normalized gap = {min(gaps):.6f} > 0.5",
    )


# -- criterion 10 ------------------------------------------------------------

def test_criterion_10_measure_calibration(golden, binary):
    taus = bconv.lq_spectrum_table([0.0, 1.0], golden, levels=range(12, 19), margin=8)
    by_q = {r.q: r.tau for r in taus}
    leb = bconv.local_dim_estimate(Fraction(1, 3), binary, levels=range(6, 19), margin=10)
    rng = np.random.default_rng(20260810)
    slopes = []
    for _ in range(128):
        x = Fraction(int(rng.integers(1, 10 ** 6)), 10 ** 6) * Fraction(161803, 100000)
        est = bconv.local_dim_estimate(x, golden, levels=range(1, 31), margin=10)
        slopes.append(est.slope)
    mean_slope = float(np.mean(slopes))
    slope_se = float(np.std(slopes) / math.sqrt(len(slopes)))
    ok = (
        -0.02 <= by_q[1.0] <= 0.02
        and -1.05 <= by_q[0.0] <= -0.95
        and abs(leb.slope - 1.0) <= 0.01
        and abs(mean_slope - 1.0054) <= 0.01
    )
    record(
        "10 Measure calibration",
        ok,
        f"tau(1)={by_q[1.0]:+.4f}, tau(0)={by_q[0.0]:+.4f}, lebesgue slope="
        f"{leb.slope:.4f}, golden random-slope mean={mean_slope:.4f}+-{slope_se:.4f} "
        f"(128 Lebesgue-random points, levels to 30)",
    )


# -- criterion 11 ------------------------------------------------------------

def test_criterion_11_determinism(tmp_path):
    pairs = []
    for tag, argv in {
        "table1": ["table1", "--n-range", "2..6", "--k-exact", "16", "--seed", "3"],
        "gamma-mc": [
            "gamma", "--beta", "multinacci:3", "--m", "2", "--method", "mc",
            "--paths", "5000", "--chains", "4", "--seed", "3",
        ],
    }.items():
        outs = []
        for run in (1, 2):
            path = tmp_path / f"{tag}-{run}.csv"
            code = cli_main(argv + ["--out", str(path)])
            assert code == 0
            outs.append(path.read_bytes())
        pairs.append(outs[0] == outs[1])
    record(
        "11 Byte-identical determinism",
        all(pairs),
        "table1 and gamma --method mc reproduce byte-for-byte under a fixed seed",
    )
