"""Acceptance criteria, each run at its stated tolerance and budget.

Every test records one PASS/FAIL line; the lines are repeated in the terminal
summary (see ``conftest.py``).
"""

import json
import time

import numpy as np
import pytest

from tveff.cli import main
from tveff.errors import Unstable
from tveff.events import EventSpec, abnormal_returns, event_study
from tveff.series import ReturnPanel, align_panel, impute_gaps
from tveff.stability import hansen_lc
from tveff.synth import ScenarioSpec, generate, mask_gaps, truncated_vma_zeta
from tveff.tvvar import efficiency_path, fit_tvvar, null_bands, select_weight
from tveff.unitroot import adf_gls
from tveff.var import efficiency_degree, fit_var, longrun_sum, select_lag_bic, spectral_radius

from . import acceptance_log


def record(name, passed, detail, elapsed, budget):
    in_time = elapsed < budget
    ok = bool(passed and in_time)
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}; {elapsed:.1f}s of {budget:.0f}s"
    acceptance_log.append(line)
    print(line)
    assert passed, line
    assert in_time, line


def test_closed_form_zeta():
    start = time.perf_counter()
    A = np.array([[[0.2, 0.0], [0.0, 0.2]]])
    zeta = efficiency_degree(longrun_sum(A))
    zero = efficiency_degree(longrun_sum(np.zeros((1, 2, 2))))
    elapsed = time.perf_counter() - start
    ok = abs(zeta - 0.25) <= 1e-10 and zero == 0.0
    record("closed-form zeta", ok, f"zeta={zeta!r}, zero case={zero!r}", elapsed, 1)


def test_oracle_cross_validation():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst, draws = 0.0, 0
    while draws < 200:
        k, p = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        A = rng.normal(scale=0.35, size=(p, k, k))
        if spectral_radius(A) > 0.9:
            continue
        worst = max(worst, abs(truncated_vma_zeta(A, 1000) - efficiency_degree(longrun_sum(A))))
        draws += 1
    elapsed = time.perf_counter() - start
    record("oracle cross-validation", worst <= 1e-6, f"max |diff| {worst:.2e} over {draws} draws", elapsed, 30)


def test_tvvar_limit():
    start = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        y = np.random.default_rng(200 + seed).normal(size=(600, 2))
        tv = fit_tvvar(y, 4, 1e6)
        ols = fit_var(y, 4)
        worst = max(worst, np.max(np.abs(tv.coef - ols.coef[None])))
    elapsed = time.perf_counter() - start
    record("TV-VAR limit", worst < 1e-3, f"max-norm gap {worst:.2e} on 20 panels", elapsed, 120)


BREAK_T = 600
BREAK_NOISE = 0.06
BREAK_WEIGHTS = (1.0, 2.0, 3.5, 5.0, 7.0, 10.0, 20.0, 30.0, 100.0)


def break_scenario(seed):
    spec = ScenarioSpec(
        k=2,
        T=BREAK_T,
        coefficient_path=[
            (1, BREAK_T // 2, [[0.0, 0.1], [0.0, 0.0]]),
            (BREAK_T // 2 + 1, BREAK_T, [[0.0, 0.6], [0.0, 0.0]]),
        ],
        noise_sd=BREAK_NOISE,
        seed=seed,
    )
    series, zeta = generate(spec)
    return align_panel(series), zeta


def recovery_share(panel, true_zeta, weight, p=1):
    est = efficiency_path(fit_tvvar(panel, p, weight), strict=False)
    truth = true_zeta[p:]
    rows = np.arange(p, BREAK_T) + 1  # return period of each fitted row
    keep = np.abs(rows - (BREAK_T // 2 + 0.5)) > 30
    return float(np.mean(np.abs(est[keep] - truth[keep]) <= 0.15))


def test_tvvar_recovery():
    start = time.perf_counter()
    # pilot seeds pick the smoothness weight; evaluation seeds are disjoint
    pilots = [break_scenario(10_000 + s) for s in range(10)]
    pilot_scores = [np.mean([recovery_share(pn, z, w) for pn, z in pilots]) for w in BREAK_WEIGHTS]
    weight = BREAK_WEIGHTS[int(np.argmax(pilot_scores))]
    shares = [recovery_share(*break_scenario(seed), weight) for seed in range(100)]
    mean_share = float(np.mean(shares))
    elapsed = time.perf_counter() - start
    detail = (
        f"mean share within 0.15 = {mean_share:.3f} (need 0.80) at pilot-chosen weight {weight}; "
        f"pilot grid {', '.join(f'{w}: {v:.3f}' for w, v in zip(BREAK_WEIGHTS, pilot_scores))}"
    )
    record("TV-VAR recovery", mean_share >= 0.8, detail, elapsed, 900)


def test_band_calibration():
    start = time.perf_counter()
    rates = []
    for rep in range(50):
        y = np.random.default_rng(300 + rep).normal(size=(622, 2))
        panel = ReturnPanel.from_array(y, ["a", "b"])
        p = select_lag_bic(panel, 8)
        weight = select_weight(panel, p).weight
        path = null_bands(panel, p, weight, replications=500, level=0.95, seed=10_000 * rep)
        rates.append(path.exceedance_rate())
    rate = float(np.mean(rates))
    elapsed = time.perf_counter() - start
    record("band calibration", rate <= 0.07, f"mean exceedance {rate:.4f} over 50 panels", elapsed, 1800)


def test_adf_gls_behavior():
    start = time.perf_counter()
    rng = np.random.default_rng(400)
    reps = 2000
    iid = np.mean([adf_gls(rng.normal(size=622)).statistic < -3.42 for _ in range(reps)])
    walk = np.mean([adf_gls(np.cumsum(rng.normal(size=622))).statistic >= -3.42 for _ in range(reps)])
    elapsed = time.perf_counter() - start
    detail = f"iid rejection {iid:.4f} (need 0.99), random-walk retention {walk:.4f} (need 0.97)"
    record("ADF-GLS behavior", iid >= 0.99 and walk >= 0.97, detail, elapsed, 300)


HANSEN_A = np.array([[0.2, 0.3], [0.0, 0.2]])


def coefficient_paths(rng, reps, T, drift_sd):
    """Per-period [nu; A'] blocks of shape (reps, T, 3, 2) starting at (0, HANSEN_A).

    Every intercept and lag coefficient follows its own Gaussian random walk.
    Paths that leave the stable region in any period are redrawn.
    """
    start = np.vstack([np.zeros((1, 2)), HANSEN_A.T])
    kept = []
    while sum(len(k) for k in kept) < reps:
        steps = rng.normal(scale=drift_sd, size=(reps, T, 3, 2))
        steps[:, 0] = 0.0
        beta = start + np.cumsum(steps, axis=1)
        radius = np.max(np.abs(np.linalg.eigvals(beta[:, :, 1:, :].transpose(0, 1, 3, 2))), axis=(-1, -2))
        kept.append(beta[radius < 0.99])
    return np.concatenate(kept)[:reps]


def simulate_paths(rng, beta):
    reps, T = beta.shape[:2]
    y = np.zeros((reps, T + 101, 2))
    e = rng.normal(size=(reps, T + 101, 2))
    for t in range(1, T + 101):
        b = beta[:, max(t - 101, 0)]
        y[:, t] = b[:, 0] + np.einsum("ri,rij->rj", y[:, t - 1], b[:, 1:]) + e[:, t]
    return y[:, 101:]


def test_hansen_size_and_power():
    start = time.perf_counter()
    rng = np.random.default_rng(500)
    reps, T = 2000, 622
    fixed = simulate_paths(rng, coefficient_paths(rng, reps, T, 0.0))
    size = np.mean([hansen_lc(fit_var(y, 1)).decision_at_1pct for y in fixed])
    moving = simulate_paths(rng, coefficient_paths(rng, reps, T, 0.02))
    power = np.mean([hansen_lc(fit_var(y, 1)).decision_at_1pct for y in moving])
    elapsed = time.perf_counter() - start
    ok = 0.002 <= size <= 0.025 and power >= 0.8
    record("Hansen L_C size/power", ok, f"size {size:.4f} (need 0.002-0.025), power {power:.4f} (need 0.80)", elapsed, 600)


def spreadsheet_car(ar):
    out, running = [], 0.0
    for value in ar:
        running = running + value
        out.append(running)
    return out


def test_event_study_planted_jump():
    start = time.perf_counter()
    hits, exact = 0, True
    spec = EventSpec(60)
    for seed in range(200):
        scenario = ScenarioSpec(
            k=2,
            T=100,
            coefficient_path=[(1, 100, np.zeros((2, 2)))],
            noise_sd=0.01,
            planted_events=[(61, 0.1)],
            seed=seed,
        )
        panel = align_panel(generate(scenario)[0])
        res = event_study(panel, spec, replications=1000, seed=seed)
        hits += res.significant_at_event
        for j in range(panel.k):
            oracle = spreadsheet_car(abnormal_returns(panel.matrix[:, j], spec).tolist())
            exact &= res.per_event_car[j].tolist() == oracle
    rate = hits / 200
    elapsed = time.perf_counter() - start
    detail = f"significant in {rate:.3f} of seeds (need 0.99), CAR equals prefix-sum oracle: {exact}"
    record("event study", rate >= 0.99 and exact, detail, elapsed, 120)


def test_imputation_recovery():
    start = time.perf_counter()
    sd = 0.06
    errors = []
    for rep in range(50):
        scenario = ScenarioSpec(
            k=1,
            T=240,
            coefficient_path=[(1, 240, 0.0)],
            noise_sd=sd,
            seasonal_amplitude=0.1,
            seed=600 + rep,
        )
        series = generate(scenario)[0][0]
        masked = mask_gaps(series, [(None, 3)], seed=rep)
        filled = impute_gaps(masked.series).values[masked.mask]
        errors.extend(np.log(filled) - np.log(masked.truth))
    ratio = float(np.sqrt(np.mean(np.square(errors))) / sd)
    # conditional SD of a random walk three steps inside a gap, pooled
    bridge = float(np.sqrt(np.mean([j * (4 - j) / 4 for j in (1, 2, 3)])))
    elapsed = time.perf_counter() - start
    detail = f"RMSE / innovation SD = {ratio:.3f} (need < 0.5; random-walk bridge floor {bridge:.3f})"
    record("imputation", ratio < 0.5, detail, elapsed, 120)


def test_end_to_end_determinism(tmp_path):
    start = time.perf_counter()
    scenario = {
        "k": 2,
        "T": 240,
        "coefficient_path": [
            {"first": 1, "last": 120, "coefs": [[0.0, 0.1], [0.0, 0.0]]},
            {"first": 121, "last": 240, "coefs": [[0.0, 0.4], [0.0, 0.0]]},
        ],
        "noise_sd": 0.06,
        "seasonal_amplitude": 0.05,
        "planted_events": [{"period": 90, "jump": 0.3}, {"period": 200, "jump": 0.3}],
        "markets": ["tokyo", "osaka"],
    }
    (tmp_path / "scenario.json").write_text(json.dumps(scenario))
    assert main(["simulate", "--input", str(tmp_path / "scenario.json"), "--out", str(tmp_path / "sim")]) == 0
    prices = (tmp_path / "sim" / "prices.csv").read_text().splitlines()
    for row in (30, 31, 32, 150):
        period, a, b = prices[row].split(",")
        prices[row] = f"{period},,{b}"
    (tmp_path / "gappy.csv").write_text("\n".join(prices) + "\n")

    def run(out):
        args = ["run", "--input", str(tmp_path / "gappy.csv"), "--events", str(tmp_path / "sim" / "events.csv")]
        return main([*args, "--out", str(tmp_path / out), "--seed", "2024"])

    codes = (run("first"), run("second"))
    names = sorted(p.name for p in (tmp_path / "first").iterdir())
    same = sorted(p.name for p in (tmp_path / "second").iterdir()) == names and all(
        (tmp_path / "first" / n).read_bytes() == (tmp_path / "second" / n).read_bytes() for n in names
    )
    elapsed = time.perf_counter() - start
    ok = codes == (0, 0) and same and "efficiency.csv" in names
    record("end-to-end determinism", ok, f"exit codes {codes}, {len(names)} files byte-identical: {same}", elapsed, 300)
