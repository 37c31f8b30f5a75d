"""One-dimensional persistent walk: tails, drifts, classifier, trajectories."""

import math

import numpy as np
import pytest

from vlmc_walks.errors import Assumption1Violated, RunCapExceeded
from vlmc_walks.prw1d import (
    Verdict1D,
    classify,
    double_comb_model,
    drift_estimate,
    erickson_series,
    final_position,
    persistence_tail,
    simulate_prw1,
    theta,
)
from vlmc_walks.tails import geometric, polynomial, table

from conftest import dc_geometric, dc_polynomial


def dc_mixed(up_rule, down_rule):
    return double_comb_model(up_rule, down_rule)


def test_persistence_tail_examples():
    model = dc_geometric(0.5, 0.5)
    assert persistence_tail(model, "u", 1) == 1.0
    # constant-product oracle
    for n in range(1, 12):
        brute = 1.0
        for k in range(1, n):
            brute *= 0.5
        assert persistence_tail(model, "u", n) == pytest.approx(brute, rel=1e-14)
    poly = dc_polynomial(1.7, 1.7)
    for n in range(1, 12):
        brute = 1.0
        for k in range(1, n):
            brute *= (k / (k + 1)) ** 1.7
        assert persistence_tail(poly, "d", n) == pytest.approx(brute, rel=1e-12)
        assert persistence_tail(poly, "d", n) == pytest.approx(n ** -1.7, rel=1e-12)


def test_theta_values():
    assert theta(dc_geometric(0.5, 0.5), "u") == 2.0
    assert theta(dc_polynomial(2.0, 2.0), "u") == pytest.approx(math.pi**2 / 6, abs=1e-12)
    assert math.isinf(theta(dc_polynomial(0.5, 0.5), "u"))


def test_theta_requires_finite_runs():
    frozen = table([0.5], geometric(1.0, {"d": 1.0}, nullable=True), {"d": 1.0}, nullable=True)
    model = dc_mixed(frozen, geometric(0.5, {"u": 1.0}))
    with pytest.raises(Assumption1Violated):
        theta(model, "u")


def test_erickson_series_cases():
    both_half = dc_polynomial(0.5, 0.5)
    assert erickson_series(both_half, "u", "d").diverges
    assert erickson_series(both_half, "d", "u").diverges
    mixed = dc_polynomial(0.5, 0.8)
    assert erickson_series(mixed, "u", "d").diverges
    assert erickson_series(mixed, "d", "u").converged
    geo = dc_geometric(0.5, 0.5)
    assert erickson_series(geo, "u", "d").converged
    assert erickson_series(geo, "d", "u").converged
    # numerically: the divergent series' partial sums keep growing
    model = both_half
    partial = 0.0
    denom = 0.0
    tail_n = 1.0
    checkpoints = []
    for n in range(1, 200_001):
        denom += n ** -0.5
        nxt = (n + 1) ** -0.5
        partial += n * (tail_n - nxt) / denom
        tail_n = nxt
        if n in (2_000, 20_000, 200_000):
            checkpoints.append(partial)
    assert checkpoints[2] > checkpoints[1] + 0.5 > checkpoints[0] + 1.0


def test_classifier_four_cells():
    r = classify(dc_geometric(0.5, 0.5))
    assert r.verdict is Verdict1D.RECURRENT and r.rule_fired == "both_theta_finite.ds_zero"
    assert r.report.d_s == 0.0 and r.report.d_m == 0.0

    r = classify(dc_geometric(0.9, 0.5))
    assert r.verdict is Verdict1D.DRIFTING_PLUS
    assert r.report.d_s == pytest.approx(2 / 3, abs=1e-12)

    r = classify(dc_geometric(0.5, 0.9))
    assert r.verdict is Verdict1D.DRIFTING_MINUS

    r = classify(dc_polynomial(0.5, 0.5))
    assert r.verdict is Verdict1D.RECURRENT
    assert r.rule_fired == "both_theta_infinite.both_j_infinite"
    assert r.report.d_s is None and r.report.d_m is None

    r = classify(dc_polynomial(0.5, 0.8))
    assert r.verdict is Verdict1D.DRIFTING_PLUS
    assert r.rule_fired == "both_theta_infinite.j_ud_infinite_only"

    r = classify(dc_polynomial(0.8, 0.5))
    assert r.verdict is Verdict1D.DRIFTING_MINUS


def test_classifier_one_sided_cells():
    r = classify(dc_mixed(polynomial(0.5, {"d": 1.0}), geometric(0.5, {"u": 1.0})))
    assert r.verdict is Verdict1D.DRIFTING_PLUS and r.rule_fired == "theta_u_infinite_only"
    assert r.report.d_s == 1.0 and r.report.d_m == math.inf
    r = classify(dc_mixed(geometric(0.5, {"d": 1.0}), polynomial(0.5, {"u": 1.0})))
    assert r.verdict is Verdict1D.DRIFTING_MINUS and r.rule_fired == "theta_d_infinite_only"
    assert r.report.d_s == -1.0 and r.report.d_m == -math.inf


def test_classifier_float_zero_warns():
    r = classify(dc_polynomial(2.0, 2.0))
    assert r.verdict is Verdict1D.RECURRENT
    assert any("floating point" in w for w in r.report.warnings)


def test_classifier_requires_assumption():
    frozen = table([0.5], geometric(1.0, {"d": 1.0}, nullable=True), {"d": 1.0}, nullable=True)
    with pytest.raises(Assumption1Violated):
        classify(dc_mixed(frozen, geometric(0.5, {"u": 1.0})))


def test_single_step_walk():
    walk = simulate_prw1(dc_geometric(0.5, 0.5), 1, seed=0)
    assert walk.positions[1] in (-1, 1)
    assert walk.positions[0] == 0


def test_trace_anatomy():
    walk = simulate_prw1(dc_geometric(0.6, 0.4), 50_000, seed=5)
    assert np.all(np.isin(np.diff(walk.positions), (-1, 1)))
    # breaking times: the letter changes exactly there
    full = np.concatenate([[0], walk.letters_trace.letters])  # X_0 = d = index 0
    for m in walk.breaks[1:]:
        assert full[m] != full[m - 1]
    # sojourns partition the time axis and alternate d, u, d, ...
    assert walk.breaks[-1] == walk.sojourns.sum()
    assert len(walk.tau_d) + len(walk.tau_u) == len(walk.breaks) - 1
    # skeleton identity M_m = S at every second breaking time
    assert np.array_equal(walk.skeleton, walk.positions[walk.breaks[0::2][: len(walk.skeleton)]])
    # skeleton increments are the run-length differences tau_u - tau_d
    n_cycles = len(walk.skeleton) - 1
    assert np.array_equal(
        np.diff(walk.skeleton), walk.tau_u[:n_cycles] - walk.tau_d[:n_cycles]
    )
    # bends alternate between du and ud, starting from the initial ud
    assert walk.bends[0] == "ud"
    assert all(b in ("du", "ud") for b in walk.bends)
    assert all(a != b for a, b in zip(walk.bends, walk.bends[1:]))


def test_run_cap():
    with pytest.raises(RunCapExceeded):
        simulate_prw1(dc_geometric(0.99, 0.99), 10_000, seed=1, run_cap=3)


def test_empirical_run_laws():
    walk = simulate_prw1(dc_geometric(0.5, 0.5), 500_000, seed=21)
    model = dc_geometric(0.5, 0.5)
    taus = walk.tau_u
    assert len(taus) > 100_000
    assert abs(taus.mean() - 2.0) <= 0.02 * 2.0
    for n in range(1, 21):
        t = persistence_tail(model, "u", n)
        emp = float(np.mean(taus >= n))
        se = math.sqrt(t * (1 - t) / len(taus)) + 1e-12
        assert abs(emp - t) <= 4 * se, n


def test_run_sequences_uncorrelated():
    walk = simulate_prw1(dc_geometric(0.5, 0.5), 200_000, seed=33)
    for taus in (walk.tau_d, walk.tau_u):
        x = taus - taus.mean()
        rho = float(np.dot(x[:-1], x[1:]) / np.dot(x, x))
        assert abs(rho) < 4 / math.sqrt(len(taus))


def test_drift_of_transient_walk():
    model = dc_geometric(0.9, 0.5)
    walk = simulate_prw1(model, 200_000, seed=55)
    assert abs(walk.positions[-1] / walk.n_steps - 2 / 3) <= 0.02


def test_final_position_engines_agree_statistically():
    model = dc_geometric(0.9, 0.5)
    n = 20_000
    fast = np.array([final_position(model, n, 71, stream_index=i) for i in range(50)])
    slow = np.array([
        int(simulate_prw1(model, n, 72, stream_index=i).positions[-1]) for i in range(25)
    ])
    assert abs(fast.mean() / n - 2 / 3) < 0.02
    assert abs(slow.mean() / n - 2 / 3) < 0.02
    assert final_position(model, 0, 5) == 0
    assert final_position(model, 1, 5) in (-1, 1)


def test_drift_estimate_helper():
    model = dc_geometric(0.9, 0.5)
    d = drift_estimate(model, 100_000, 20, master_seed=9)
    assert abs(d - 2 / 3) < 0.02


def test_classifier_measure_link():
    # classify demands exactly the finite-run assumption; unique stationarity
    # demands integrable runs on top of it
    from vlmc_walks.stationary import stationarity_verdict

    cases = [dc_geometric(0.5, 0.5), dc_polynomial(0.5, 0.5), dc_polynomial(2.0, 0.5)]
    for model in cases:
        result = classify(model)  # must not raise: runs are a.s. finite
        both_finite = math.isfinite(theta(model, "u")) and math.isfinite(theta(model, "d"))
        assert stationarity_verdict(model).unique == both_finite
