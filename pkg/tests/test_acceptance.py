"""End-to-end acceptance checks.

Each test prints one line ``[PASS]`` or ``[FAIL]`` with the measured numbers
and then asserts.  Run ``pytest tests/test_acceptance.py -v -rA`` to see
the lines.
"""

import math
import time

import numpy as np
import pytest

from covert_mimo import allocation, capacity, covert_code, covertness, detector
from covert_mimo.channel_model import (
    ChannelPair,
    GsvdDecomposition,
    classify_subspaces,
    decompose_gsvd,
)
from covert_mimo.cli import run
from covert_mimo.compound import (
    UncertaintySet,
    compound_capacity,
    covertness_monotonicity_check,
    sampled_feasibility,
    worst_case_design,
)
from covert_mimo.montecarlo import chunk_rngs

from conftest import REF_LAMBDA_0, REF_LAMBDA_B, REF_SIGMA_B2, REF_SIGMA_W2

pytestmark = pytest.mark.slow


def verdict(number, title, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}")
    assert ok, detail


def test_criterion_01_metric_ratio_limit():
    t0 = time.perf_counter()
    r = capacity.metric_ratio(1e-8)
    elapsed = time.perf_counter() - t0
    err = abs(r - math.sqrt(math.pi / 2))
    verdict(1, "metric ratio limit", err <= 1e-3 and elapsed < 1.0,
            f"ratio(1e-8)={r:.10f} |err|={err:.2e} time={elapsed:.3f}s")


def test_criterion_02_reference_ratio_column(tmp_path, capsys):
    cfg = tmp_path / "ref.json"
    cfg.write_text(
        '{"lambda_b": [0.385, 0.214, 0.172, 0.028], "lambda_w": [0.05, 0.05, 0.05, 0.05],'
        ' "lambda_0": 0.05, "sigma_b2": 0.0005, "sigma_w2": 0.001}'
    )
    t0 = time.perf_counter()
    code = run(["compare-metrics", str(cfg), "--delta-min", "0.01", "--delta-max", "0.9", "--points", "90"])
    elapsed = time.perf_counter() - t0
    lines = capsys.readouterr().out.strip().split("\n")
    ratios = [float(line.split(",")[3]) for line in lines[1:]]
    ok = code == 0 and len(ratios) == 90 and min(ratios) >= 1.25 and elapsed < 1.0
    verdict(2, "reference scenario ratio column", ok,
            f"points={len(ratios)} min ratio={min(ratios):.6f} time={elapsed:.3f}s")


def test_criterion_03_closed_form_vs_oracle():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        pair = ChannelPair(rng.standard_normal((4, 4)), rng.standard_normal((4, 4)),
                           *rng.uniform(0.1, 2.0, size=2))
        g = decompose_gsvd(pair)
        for solve, bound in ((allocation.solve_allocation_v, allocation.V_BOUND),
                             (allocation.solve_allocation_d, allocation.D_BOUND)):
            closed = solve(g, pair.sigma_b2, pair.sigma_w2).objective
            oracle = allocation.numeric_oracle_allocation(g, pair.sigma_b2, pair.sigma_w2, bound).objective
            worst = max(worst, abs(closed - oracle) / closed)
    elapsed = time.perf_counter() - t0
    verdict(3, "closed form vs oracle allocation", worst <= 1e-6 and elapsed < 10.0,
            f"worst relative gap={worst:.2e} over 200 programs time={elapsed:.2f}s")


def test_criterion_04_capacity_identities():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        pair = ChannelPair(rng.standard_normal((3, 3)), rng.standard_normal((3, 3)),
                           *rng.uniform(0.1, 5.0, size=2))
        g = decompose_gsvd(pair)
        v = capacity.covert_capacity_v(g, pair.sigma_b2, pair.sigma_w2)
        d = capacity.covert_capacity_d(g, pair.sigma_b2, pair.sigma_w2)
        worst = max(worst, abs(v - math.sqrt(2) * d) / v)
    siso = GsvdDecomposition.from_gains([1.0], [1.0])
    siso_err = abs(capacity.covert_capacity_v(siso, 1.0, 1.0) - math.sqrt(2)) / math.sqrt(2)
    keys = []
    for _ in range(50):
        lam = rng.uniform(0.05, 3.0, size=rng.integers(1, 6))
        s2 = rng.uniform(0.1, 5.0)
        keys.append(capacity.key_throughput_v(GsvdDecomposition.from_gains(lam, lam), s2, s2))
    ok = worst <= 1e-12 and siso_err <= 1e-12 and max(keys) == 0.0
    verdict(4, "capacity identities", ok,
            f"V/D worst={worst:.1e} SISO err={siso_err:.1e} max key rate={max(keys)}")


def test_criterion_05_covertness_consistency():
    g = GsvdDecomposition.from_gains(REF_LAMBDA_B, [REF_LAMBDA_0] * 4)
    alloc = allocation.solve_allocation_v(g, REF_SIGMA_B2, REF_SIGMA_W2)
    t0 = time.perf_counter()
    parts, ok = [], True
    for n in (100, 400, 1600):
        c = allocation.build_constellation(alloc, g, n, 0.2)
        closed = covertness.product_form_v(g, c, REF_SIGMA_W2)
        v, hw = covertness.v_product_mc(c, g, REF_SIGMA_W2, n, 100_000, seed=n)
        ok &= abs(closed - 0.2) <= 1e-12 and abs(v - 0.2) <= max(0.02, 3 * hw)
        parts.append(f"n={n}: closed={closed:.15f} mc={v:.4f}+-{hw:.4f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60.0
    verdict(5, "covertness consistency", ok, "; ".join(parts) + f"; time={elapsed:.1f}s")


def test_criterion_06_detector_validation():
    rng = np.random.default_rng(6)
    pair = ChannelPair(rng.standard_normal((4, 4)), rng.standard_normal((4, 4)), 1.0, 1.0)
    g = decompose_gsvd(pair)
    n, trials = 400, 10_000
    t0 = time.perf_counter()
    alloc = allocation.solve_allocation_v(g, 1.0, 1.0)
    const = allocation.build_constellation(alloc, g, n, 0.2)
    log_m, log_mk = covert_code.size_code(g, alloc, n, 0.2, 0.5, 1.0, 1.0, keyless_ok=True)
    M, K = covert_code.desk_sizes(log_m, log_mk, max_M=256, max_K=4)
    code = covert_code.generate(const, M, K, seed=61)
    p_star = detector.min_received_power(code, g)
    conf = detector.make_config(g, detector.threshold_for(p_star, n, g, 1.0), n)
    rep = detector.run_detector_mc(code, conf, g, 1.0, trials, seed=62)
    v, v_hw = covertness.v_codebook_mc(code, g, 1.0, trials, seed=63)
    elapsed = time.perf_counter() - t0
    combined = math.sqrt(rep.alpha_half_width**2 + rep.beta_half_width**2 + v_hw**2)
    ok = (rep.alpha_mc <= rep.alpha_bound + 3 * rep.alpha_half_width
          and rep.beta_mc <= rep.beta_bound + 3 * rep.beta_half_width
          and 1 - rep.alpha_mc - rep.beta_mc <= v + 3 * combined
          and elapsed < 120.0)
    verdict(6, "detector validation", ok,
            f"M={M} K={K} alpha={rep.alpha_mc:.4f} (bound {rep.alpha_bound:.4f}) "
            f"beta={rep.beta_mc:.4f} (bound {rep.beta_bound:.4f}) "
            f"1-a-b={1 - rep.alpha_mc - rep.beta_mc:.4f} <= V={v:.4f}+3*{combined:.4f} time={elapsed:.1f}s")


def _three_digits(estimate, exact):
    """Agreement to three significant digits of ``exact``."""
    return abs(estimate - exact) <= 0.5 * 10.0 ** (math.floor(math.log10(abs(exact))) - 2)


def test_criterion_07_codeword_statistics_oracle():
    rng = np.random.default_rng(7)
    pair = ChannelPair(rng.standard_normal((3, 3)), rng.standard_normal((3, 3)), 1.0, 1.0)
    g = decompose_gsvd(pair)
    n, sw, draws = 100, 1.0, 100_000
    const = allocation.build_constellation(allocation.solve_allocation_v(g, 1.0, sw), g, n, 0.2)
    code = covert_code.generate(const, 10, 1, seed=71)
    ratio2 = g.ratio**2
    mean_ok = var_ok = 0
    worst_mean = worst_var = 0.0
    for k in range(10):
        x = code.word(k, 0)
        sums = []
        for r, count in chunk_rngs(72, draws, stream=k, chunk=5000):
            z = g.lambda_w[None, :, None] * x + math.sqrt(sw) * r.standard_normal((count, g.m, n))
            sums.append(np.sum(ratio2 * np.sum(z * z, axis=2), axis=1))
        s = np.concatenate(sums)
        mu1, var1 = detector.codeword_statistics(x, g, sw)
        mean_ok += _three_digits(s.mean(), mu1)
        var_ok += _three_digits(s.var(ddof=1), var1)
        worst_mean = max(worst_mean, abs(s.mean() - mu1) / mu1)
        worst_var = max(worst_var, abs(s.var(ddof=1) - var1) / var1)
    verdict(7, "codeword statistics oracle", mean_ok == 10 and var_ok == 10,
            f"means agreeing={mean_ok}/10 (worst rel {worst_mean:.1e}) "
            f"variances agreeing={var_ok}/10 (worst rel {worst_var:.1e}; "
            f"MC std error of a variance ~ sqrt(2/{draws})={math.sqrt(2 / draws):.1e})")


def test_criterion_08_reliability_trend():
    g = GsvdDecomposition.from_gains([1.0], [1.0])
    sigma_b2, sigma_w2, delta, xi = 0.5, 1.0, 0.2, 0.5
    alloc = allocation.solve_allocation_v(g, sigma_b2, sigma_w2)
    t0 = time.perf_counter()
    rates, parts = [], []
    for n in (64, 256, 1024):
        const = allocation.build_constellation(alloc, g, n, delta)
        log_m, log_mk = covert_code.size_code(g, alloc, n, delta, xi, sigma_b2, sigma_w2)
        M, K = covert_code.desk_sizes(log_m, log_mk, max_M=2**10, max_K=4)
        code = covert_code.generate(const, M, K, seed=n)
        rate, hw = covert_code.simulate_reliability(code, g, sigma_b2, 10_000, seed=80 + n)
        rates.append(rate)
        parts.append(f"n={n} M={M} K={K} err={rate:.4f}+-{hw:.4f}")
    elapsed = time.perf_counter() - t0
    ok = rates[0] > rates[1] > rates[2] and rates[2] < 0.05 and elapsed < 120.0
    verdict(8, "reliability trend", ok, "; ".join(parts) + f"; time={elapsed:.1f}s")


def test_criterion_09_compound_suite():
    uset = UncertaintySet(REF_LAMBDA_0, REF_LAMBDA_B)
    alloc = worst_case_design(uset, REF_SIGMA_B2, REF_SIGMA_W2)
    const = allocation.build_constellation(alloc, uset.worst_case(), 400, 0.2)
    ok_mono, worst = covertness_monotonicity_check(uset, const, REF_SIGMA_W2, 1000, seed=91)
    feas = sampled_feasibility(uset, alloc, REF_SIGMA_W2, 1000, seed=92)
    c, _ = compound_capacity(uset, REF_SIGMA_B2, REF_SIGMA_W2)
    direct = capacity.covert_capacity_v(uset.worst_case(), REF_SIGMA_B2, REF_SIGMA_W2)
    rel = abs(c - direct) / direct
    ok = ok_mono and feas <= 2 + 1e-9 and rel <= 1e-12
    verdict(9, "compound suite", ok,
            f"worst monotonicity violation={worst:.2e} max sampled constraint={feas:.6f} "
            f"capacity gap={rel:.1e}")


def test_criterion_10_gsvd_property_suite():
    rng = np.random.default_rng(10)
    worst_rec = worst_inv = 0.0
    for _ in range(100):
        n_a = int(rng.integers(1, 9))
        pair = ChannelPair(rng.standard_normal((int(rng.integers(n_a, 9)), n_a)),
                           rng.standard_normal((int(rng.integers(n_a, 9)), n_a)), 1.0, 1.0)
        g = decompose_gsvd(pair)
        H_b, H_w = g.reconstruct()
        worst_rec = max(worst_rec,
                        np.linalg.norm(H_b - pair.H_b) / np.linalg.norm(pair.H_b),
                        np.linalg.norm(H_w - pair.H_w) / np.linalg.norm(pair.H_w))
        scale = rng.uniform(0.1, 10.0, size=g.m)
        alt = GsvdDecomposition(lambda_b=g.lambda_b / scale, lambda_w=g.lambda_w / scale,
                                U_b=g.U_b, U_w=g.U_w, V=g.V * scale)
        for fn in (capacity.covert_capacity_v, capacity.covert_capacity_d):
            worst_inv = max(worst_inv, abs(fn(alt, 1.0, 2.0) - fn(g, 1.0, 2.0)) / fn(g, 1.0, 2.0))
    cases = {
        "p>0": (np.diag([1.0, 1.0]), np.diag([1.0, 0.0])),
        "S_w nonempty": (np.diag([1.0, 0.0]), np.diag([1.0, 1.0])),
        "S_n nonempty": (np.diag([1.0, 0.0]), np.diag([1.0, 0.0])),
    }
    flagged = {k: not classify_subspaces(ChannelPair(b, w, 1.0, 1.0)).square_root_law_holds
               for k, (b, w) in cases.items()}
    reports = [classify_subspaces(ChannelPair(b, w, 1.0, 1.0)) for b, w in cases.values()]
    shapes_ok = (reports[0].p == 1 and reports[1].dim_S_w == 1 and reports[2].dim_S_n == 1)
    clean = classify_subspaces(ChannelPair(np.eye(2), np.eye(2), 1.0, 1.0)).square_root_law_holds
    ok = worst_rec <= 1e-10 and worst_inv <= 1e-9 and all(flagged.values()) and shapes_ok and clean
    verdict(10, "GSVD property suite", ok,
            f"worst reconstruction={worst_rec:.1e} worst rescaling drift={worst_inv:.1e} "
            f"exclusion cases flagged={sum(flagged.values())}/3")
