"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete (or `-rA` to see them in the summary).
"""

import time

import numpy as np
import pytest

from gmoments import (
    check_perturbation_bound,
    check_relative_bound,
    cross_covariance,
    effective_rank,
    fit_slopes,
    gaussian_moment_norm,
    isserlis_estimator_asymmetric,
    isserlis_estimator_symmetric,
    isserlis_tensor,
    make_covariance,
    max_norm_effective_dim,
    mc_moment_estimate,
    operator_norm_hopm,
    pairing_count,
    sample,
    sample_covariance,
    sample_moment_asymmetric,
    sample_moment_symmetric,
)
from gmoments.cli import main as cli_main
from gmoments.pairings import enumerate_pairings
from tests.conftest import config_path, seeded_psd, seeded_ints


def report(criterion: str, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def block_pair_campaign(n_cases: int, master_seed: int):
    """Seeded random block-covariance pairs: block dims <= 4, p in {2,4,6}."""
    for i in range(n_cases):
        p = (2, 4, 6)[i % 3]
        dims = seeded_ints(master_seed + i, p, 1, 4)
        d = sum(dims)
        cov_y = seeded_psd(7_000_000 + i, d)
        if i % 2 == 0:
            cov_x = cov_y + 0.5 * seeded_psd(8_000_000 + i, d)
        else:
            cov_x = seeded_psd(9_000_000 + i, d)
        yield i, p, dims, cov_x, cov_y


def test_criterion_1_isserlis_vs_mc_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for case in range(5):
        sigma = seeded_psd(100 + case, 3)
        model = make_covariance("explicit", 3, matrix=sigma)
        batch = sample(model, 10**6, seed=500 + case)
        for p in (4, 6):
            mean, stderr = mc_moment_estimate(batch, p=p)
            z = np.abs(mean - isserlis_tensor(sigma, p=p)) / stderr
            worst = max(worst, float(z.max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 5.0 and elapsed < 120.0
    assert report("1 (Isserlis exact vs 1e6-sample MC, 5 sigma, p in {4,6})", ok,
                  f"max |z| = {worst:.2f} <= 5, {elapsed:.0f}s < 120s"), worst


def test_criterion_2_closed_form_operator_norm():
    t0 = time.perf_counter()
    worst = 0.0
    for case in range(10):
        p = 4 if case < 5 else 6
        d = 2 + case % 4  # d in 2..5
        sigma = seeded_psd(200 + case, d)
        got = operator_norm_hopm(isserlis_tensor(sigma, p=p), restarts=20,
                                 seed=case).value
        want = gaussian_moment_norm(sigma, p)
        worst = max(worst, abs(got - want) / want)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 60.0
    assert report("2 (HOPM = (p-1)!! ||Sigma||^(p/2), 10 sigma)", ok,
                  f"max rel err = {worst:.2e} <= 1e-6, {elapsed:.0f}s < 60s"), worst


def test_criterion_3_max_norm_bounds_campaign():
    t0 = time.perf_counter()
    prop_ok = 0
    for i, p, dims, cov_x, cov_y in block_pair_campaign(1000, 30_000):
        rep = check_perturbation_bound(cov_x, cov_y, dims, p, "max")
        prop_ok += bool(rep.satisfied)
    rel_ok = 0
    for i in range(1000):
        p = (2, 4, 6)[i % 3]
        d = 1 + i % 4
        sigma_y = seeded_psd(40_000 + i, d)
        sigma_x = (sigma_y + 0.6 * seeded_psd(41_000 + i, d)) if i % 2 == 0 \
            else seeded_psd(42_000 + i, d)
        rep = check_relative_bound(sigma_x, sigma_y, p, "max")
        rel_ok += bool(rep.satisfied)
    elapsed = time.perf_counter() - t0
    ok = prop_ok == 1000 and rel_ok == 1000 and elapsed < 120.0
    assert report("3 (max-norm perturbation bounds, 1000 + 1000 pairs)", ok,
                  f"block {prop_ok}/1000, relative {rel_ok}/1000, "
                  f"{elapsed:.0f}s < 120s"), (prop_ok, rel_ok)


def test_criterion_4_operator_norm_bounds_campaign():
    t0 = time.perf_counter()
    n_ok = 0
    for i, p, dims, cov_x, cov_y in block_pair_campaign(1000, 30_000):
        rep = check_perturbation_bound(cov_x, cov_y, dims, p, "operator",
                                       hopm_restarts=20, seed=i)
        n_ok += bool(rep.satisfied)
    elapsed = time.perf_counter() - t0
    ok = n_ok == 1000
    assert report("4 (operator-norm necessary condition, HOPM lhs)", ok,
                  f"{n_ok}/1000 satisfied, {elapsed:.0f}s"), n_ok


@pytest.fixture(scope="module")
def i16_curves(i16_experiment):
    cfg, ctx, records = i16_experiment
    samp = {r.n: r.mean_error for r in records if r.estimator == "sample"}
    iss = {r.n: r.mean_error for r in records if r.estimator == "isserlis"}
    return cfg, ctx, records, samp, iss


def test_criterion_5a_isserlis_below_sample(i16_curves):
    _, _, _, samp, iss = i16_curves
    bad = [n for n in sorted(samp) if not iss[n] < samp[n]]
    detail = ", ".join(f"N={n}: iss {iss[n]:.3f} vs samp {samp[n]:.3f}"
                       for n in (bad or sorted(samp)[:1]))
    assert report("5a (I16 p4 max norm: Isserlis < sample at every N)",
                  not bad, detail or "all N"), bad


def test_criterion_5b_isserlis_slope(i16_curves):
    _, _, records, _, _ = i16_curves
    fit = fit_slopes([r for r in records if r.estimator == "isserlis"], n_min=256)[0]
    ok = -0.6 <= fit.slope <= -0.4
    assert report("5b (Isserlis slope on N >= 256 in [-0.6, -0.4])", ok,
                  f"slope = {fit.slope:.3f}"), fit.slope


def test_criterion_5c_sample_small_n_slope(i16_curves):
    _, _, records, _, _ = i16_curves
    fit = fit_slopes([r for r in records if r.estimator == "sample"], n_max=64)[0]
    ok = fit.slope <= -0.7
    assert report("5c (sample slope on N in {16,32,64} <= -0.7)", ok,
                  f"slope = {fit.slope:.3f}"), fit.slope


def test_criterion_5d_sample_ratio_band(i16_curves):
    _, _, records, _, _ = i16_curves
    ratios = [r.ratio for r in records if r.estimator == "sample"]
    factor = max(ratios) / min(ratios)
    ok = factor < 3.0
    assert report("5d (sample error/theory_rate band < 3x across grid)", ok,
                  f"band factor = {factor:.2f}"), factor


def test_criterion_5_runtime(i16_experiment):
    cfg, _, _ = i16_experiment
    from tests.conftest import I16_ELAPSED
    ok = I16_ELAPSED[0] < 600.0 and cfg.trials == 200 and cfg.threads == 1
    assert report("5 runtime (200 trials, single-threaded)", ok,
                  f"{I16_ELAPSED[0]:.0f}s < 600s"), I16_ELAPSED[0]


def test_criterion_6_asymmetric_reproduction(blocks4_experiment):
    cfg, ctx, records = blocks4_experiment
    samp = {r.n: r.mean_error for r in records if r.estimator == "sample"}
    iss = {r.n: r.mean_error for r in records if r.estimator == "isserlis"}
    bad = [n for n in sorted(samp) if not iss[n] < samp[n]]
    ordering_ok = not bad
    r_star = max(e.r_max for e in ctx.rmax_blocks)
    fit = fit_slopes([r for r in records if r.estimator == "isserlis"],
                     n_min=int(np.ceil(r_star)))[0]
    slope_ok = -0.6 <= fit.slope <= -0.4
    ok = ordering_ok and slope_ok
    assert report("6 (asymmetric blocks (4,4,4,4), independent)", ok,
                  f"ordering {'ok' if ordering_ok else f'violated at {bad}'}, "
                  f"Isserlis slope {fit.slope:.3f} for N >= {r_star:.2f}"), \
        (bad, fit.slope)


def test_criterion_7_degeneracies():
    # p = 2 collapse of all four estimators onto the (cross-)covariance
    batch = sample(make_covariance("toeplitz", 4, rho=0.45), 300, seed=77)
    cov = sample_covariance(batch)
    collapse = max(
        np.max(np.abs(sample_moment_symmetric(batch, 2).tensor - cov)),
        np.max(np.abs(isserlis_estimator_symmetric(batch, 2).tensor - cov)),
    )
    from gmoments.gaussian import SampleBatch
    split = SampleBatch(data=batch.data, blocks=(2, 2), seed=batch.seed, n=batch.n)
    cross = cross_covariance(split, 0, 1)
    collapse = max(
        collapse,
        np.max(np.abs(sample_moment_asymmetric(split).tensor - cross)),
        np.max(np.abs(isserlis_estimator_asymmetric(split).tensor - cross)),
    )
    counts_ok = all(len(enumerate_pairings(p)) == pairing_count(p)
                    for p in (2, 4, 6, 8, 10, 12))
    r2_ok = all(effective_rank(np.eye(d)) == float(d) for d in (1, 2, 4, 16, 64))
    dims = max_norm_effective_dim(make_covariance("identity", 1),
                                  mc_samples=10**6, seed=123)
    rmax_rel = abs(dims.r_max - 2 / np.pi) / (2 / np.pi)
    ok = collapse <= 1e-12 and counts_ok and r2_ok and rmax_rel < 0.01
    assert report("7 (degeneracies)", ok,
                  f"p=2 collapse {collapse:.1e} <= 1e-12, counts ok={counts_ok}, "
                  f"r2(I_d)=d ok={r2_ok}, r_max(d=1) rel err {rmax_rel:.4f} < 1%"), \
        (collapse, counts_ok, r2_ok, rmax_rel)


def test_criterion_8_cli_determinism(tmp_path, capsys):
    runs = {}
    for name, threads in (("t1", "1"), ("t1b", "1"), ("t4", "4")):
        out_dir = tmp_path / name
        code = cli_main(["experiment", "--config", config_path("quick_smoke.json"),
                         "--out", str(out_dir), "--threads", threads])
        assert code == 0
        runs[name] = ((out_dir / "results.csv").read_bytes(),
                      (out_dir / "results.json").read_bytes())
    capsys.readouterr()
    csv_same = runs["t1"][0] == runs["t1b"][0] == runs["t4"][0]
    json_same = runs["t1"][1] == runs["t1b"][1] == runs["t4"][1]

    outs = []
    for _ in range(2):
        code = cli_main(["effective-dim", "--family", "toeplitz", "--dim", "3",
                         "--param", "rho=0.5", "--mc-samples", "20000",
                         "--seed", "6"])
        assert code == 0
        outs.append(capsys.readouterr().out)
    stdout_same = outs[0] == outs[1]

    ok = csv_same and json_same and stdout_same
    assert report("8 (CLI byte determinism across reruns and --threads {1,4})", ok,
                  f"csv {csv_same}, json {json_same}, stdout {stdout_same}"), \
        (csv_same, json_same, stdout_same)
