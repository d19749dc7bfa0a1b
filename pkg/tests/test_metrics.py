"""Scoring metrics against definition-level brute-force oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from karmats.graph import DscpGraph, VariableSpec
from karmats.metrics import (
    SID_NOTE,
    correlation_matrix,
    evaluate,
    fidelity,
    match_f1,
    sid,
    sid_report,
    summary_f1,
)
from karmats.simulation import SeriesFrame


def graph_from(n: int, triples) -> DscpGraph:
    g = DscpGraph.empty()
    for i in range(n):
        g = g.add_variable(VariableSpec.continuous(f"v{i}", min=-5, max=5))
    for s, t, lag in triples:
        g = g.add_edge(s, t, lag)
    return g


def sample_triples(rng, n: int, max_lag: int = 3):
    """Random unique (source, target, lag >= 1) triples."""
    count = int(rng.integers(0, 2 * n + 1))
    seen = set()
    while len(seen) < count:
        s = int(rng.integers(0, n))
        t = int(rng.integers(0, n))
        lag = int(rng.integers(1, max_lag + 1))
        seen.add((s, t, lag))
    return sorted(seen)


# -- oracles: independent restatements of the definitions ---------------------


def oracle_match_counts(truth_triples, est_triples, window):
    """Nearest-first greedy matching by repeated full scan, one class at a time."""
    classes: dict[tuple[int, int], tuple[list, list]] = {}
    for s, t, lag in truth_triples:
        classes.setdefault((s, t), ([], []))[0].append(lag)
    for s, t, lag in est_triples:
        classes.setdefault((s, t), ([], []))[1].append(lag)
    tp = 0
    for t_lags, e_lags in classes.values():
        t_left, e_left = list(t_lags), list(e_lags)
        while True:
            best = None
            for e in e_left:
                for t in t_left:
                    if abs(e - t) <= window:
                        key = (abs(e - t), min(e, t), max(e, t))
                        if best is None or key < best[0]:
                            best = (key, e, t)
            if best is None:
                break
            tp += 1
            e_left.remove(best[1])
            t_left.remove(best[2])
    return tp, len(est_triples) - tp, len(truth_triples) - tp


def oracle_sid(n, truth_triples, est_triples, level):
    """The mutilation count, spelled out: drop edges into i, compare each j."""
    total = 0
    for i in range(n):
        t_cut = [(s, t, lag) for s, t, lag in truth_triples if t != i]
        e_cut = [(s, t, lag) for s, t, lag in est_triples if t != i]
        for j in range(n):
            if i == j:
                continue
            if level == "lagged":
                pa_t = {(s, lag) for s, t, lag in t_cut if t == j}
                pa_e = {(s, lag) for s, t, lag in e_cut if t == j}
            else:
                pa_t = {s for s, t, lag in t_cut if t == j}
                pa_e = {s for s, t, lag in e_cut if t == j}
            if pa_t != pa_e:
                total += 1
    return total


def pearson_two_pass(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


# -- windowed F1 ----------------------------------------------------------------


def test_match_f1_hand_case():
    truth = graph_from(2, [(0, 1, 1), (0, 1, 4), (1, 1, 2)])
    est = graph_from(2, [(0, 1, 3), (0, 1, 5)])
    report = match_f1(truth, est, lag_window=2)
    # nearest pair is (est 3, truth 4); 5 loses truth 4, 3 is spent for truth 1
    assert (report.tp, report.fp, report.fn) == (1, 1, 2)
    assert report.precision == 0.5
    assert report.recall == pytest.approx(1 / 3)
    assert report.f1 == pytest.approx(0.4)
    assert report.matched == ((("v0", "v1", 3), ("v0", "v1", 4)),)
    assert ("v0", "v1", 5) in report.false_positives
    assert ("v1", "v1", 2) in report.false_negatives


def test_match_f1_exact_window_zero():
    truth = graph_from(2, [(0, 1, 1), (0, 1, 2)])
    est = graph_from(2, [(0, 1, 2), (0, 1, 3)])
    report = match_f1(truth, est, lag_window=0)
    assert (report.tp, report.fp, report.fn) == (1, 1, 1)


def test_match_f1_agrees_with_scan_oracle_randomized():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        n = int(rng.integers(2, 5))
        truth_triples = sample_triples(rng, n)
        est_triples = sample_triples(rng, n)
        truth, est = graph_from(n, truth_triples), graph_from(n, est_triples)
        for window in range(4):
            report = match_f1(truth, est, lag_window=window)
            expected = oracle_match_counts(truth_triples, est_triples, window)
            assert (report.tp, report.fp, report.fn) == expected


def test_f1_symmetry_swaps_precision_and_recall():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(2, 5))
        a = graph_from(n, sample_triples(rng, n))
        b = graph_from(n, sample_triples(rng, n))
        for window in range(4):
            fwd = match_f1(a, b, lag_window=window)
            rev = match_f1(b, a, lag_window=window)
            assert fwd.precision == rev.recall
            assert fwd.recall == rev.precision
            assert fwd.f1 == rev.f1


def test_f1_monotone_in_window():
    rng = np.random.default_rng(8)
    for _ in range(200):
        n = int(rng.integers(2, 5))
        truth = graph_from(n, sample_triples(rng, n))
        est = graph_from(n, sample_triples(rng, n))
        scores = [match_f1(truth, est, lag_window=w).f1 for w in range(6)]
        assert all(a <= b + 1e-15 for a, b in zip(scores, scores[1:]))


def test_f1_identity_is_perfect():
    rng = np.random.default_rng(9)
    for _ in range(50):
        n = int(rng.integers(2, 5))
        g = graph_from(n, sample_triples(rng, n))
        report = match_f1(g, g, lag_window=0)
        assert report.f1 == 1.0
        assert report.precision == 1.0 and report.recall == 1.0
        assert report.tp == len(g.edges)


def test_f1_zero_iff_no_hits_when_edges_exist():
    truth = graph_from(2, [(0, 1, 1)])
    est = graph_from(2, [(1, 0, 1)])
    report = match_f1(truth, est)
    assert report.tp == 0 and report.f1 == 0.0
    some = match_f1(truth, graph_from(2, [(0, 1, 1), (1, 0, 1)]))
    assert some.tp > 0 and some.f1 > 0.0


def test_f1_bounds_hold():
    rng = np.random.default_rng(10)
    for _ in range(100):
        n = int(rng.integers(2, 5))
        r = match_f1(graph_from(n, sample_triples(rng, n)), graph_from(n, sample_triples(rng, n)), lag_window=1)
        for value in (r.precision, r.recall, r.f1):
            assert 0.0 <= value <= 1.0


def test_match_f1_rejects_mismatched_universes_and_bad_window():
    a = graph_from(2, [])
    b = graph_from(3, [])
    with pytest.raises(ValueError, match="universes"):
        match_f1(a, b)
    with pytest.raises(ValueError, match="lag_window"):
        match_f1(a, a, lag_window=-1)


def test_summary_f1_collapses_lags():
    truth = graph_from(3, [(0, 1, 1), (0, 1, 4), (1, 2, 2)])
    est = graph_from(3, [(0, 1, 9), (2, 0, 1)])
    report = summary_f1(truth, est)
    assert (report.tp, report.fp, report.fn) == (1, 1, 1)
    assert report.level == "summary"
    assert report.matched == ((("v0", "v1", 0), ("v0", "v1", 0)),)


# -- SID ---------------------------------------------------------------------------


def test_sid_hand_case():
    truth = graph_from(3, [(0, 1, 1)])
    est = graph_from(3, [])
    # only v1's parents differ; both other variables can intervene on it
    assert sid(truth, est) == 2


def test_sid_counts_each_intervener():
    n = 4
    truth = graph_from(n, [(0, 3, 1), (1, 3, 2)])
    est = graph_from(n, [(0, 3, 1)])  # differs only in edges into v3
    assert sid(truth, est) == n - 1


def test_sid_identity_and_bound():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 5))
        g = graph_from(n, sample_triples(rng, n))
        h = graph_from(n, sample_triples(rng, n))
        assert sid(g, g) == 0
        assert 0 <= sid(g, h) <= n * (n - 1)


def test_sid_agrees_with_mutilation_oracle_randomized():
    rng = np.random.default_rng(12)
    for _ in range(500):
        n = int(rng.integers(2, 5))
        t_triples = sample_triples(rng, n)
        e_triples = sample_triples(rng, n)
        truth, est = graph_from(n, t_triples), graph_from(n, e_triples)
        for level in ("lagged", "summary"):
            assert sid(truth, est, level=level) == oracle_sid(n, t_triples, e_triples, level)


def test_sid_lagged_sees_lag_differences_summary_does_not():
    truth = graph_from(2, [(0, 1, 1)])
    est = graph_from(2, [(0, 1, 2)])
    assert sid(truth, est, level="lagged") == 1
    assert sid(truth, est, level="summary") == 0


def test_sid_report_carries_note_and_falls_back_on_cyclic_summary():
    acyclic_t = graph_from(3, [(0, 1, 1)])
    acyclic_e = graph_from(3, [(0, 1, 2)])
    report = sid_report(acyclic_t, acyclic_e)
    assert report.summary_effective_level == "summary"
    assert report.lagged == 2 and report.summary == 0
    assert report.note == SID_NOTE

    cyclic = graph_from(2, [(0, 1, 1), (1, 0, 1)])
    fallback = sid_report(cyclic, graph_from(2, [(0, 1, 1)]))
    assert fallback.summary_effective_level == "lagged"
    assert fallback.summary == fallback.lagged


def test_sid_rejects_unknown_level():
    g = graph_from(2, [])
    with pytest.raises(ValueError, match="level"):
        sid(g, g, level="super")


# -- fidelity ---------------------------------------------------------------------


def make_frame(columns: dict) -> SeriesFrame:
    variables = tuple(VariableSpec(name=n, kind="continuous", id=i) for i, n in enumerate(columns))
    return SeriesFrame(variables=variables, columns={n: np.asarray(c, dtype=float) for n, c in columns.items()})


def random_frame(rng, names, length=200) -> SeriesFrame:
    return make_frame({n: rng.normal(size=length) for n in names})


def test_correlation_matrix_matches_two_pass_oracle():
    rng = np.random.default_rng(13)
    frame = random_frame(rng, ["a", "b", "c", "d"], length=500)
    got = correlation_matrix(frame)
    cols = [list(frame.columns[n]) for n in frame.names]
    for i in range(4):
        for j in range(4):
            assert got[i, j] == pytest.approx(pearson_two_pass(cols[i], cols[j]), abs=1e-12)


def test_fidelity_identity_is_perfect():
    rng = np.random.default_rng(14)
    frame = random_frame(rng, ["a", "b", "c"])
    report = fidelity(frame, frame)
    assert report.matrix_corr == pytest.approx(1.0, abs=1e-12)
    assert report.cosine == pytest.approx(1.0, abs=1e-12)
    assert report.mae == pytest.approx(0.0, abs=1e-12)
    assert report.rmse == pytest.approx(0.0, abs=1e-12)
    assert report.frobenius == pytest.approx(0.0, abs=1e-12)
    assert report.spectral_l2 == pytest.approx(0.0, abs=1e-12)
    assert report.lag1_real == report.lag1_synth
    assert report.excluded == ()


def test_fidelity_lag1_hand_value():
    frame = make_frame({"a": [1.0, 2.0, 3.0], "b": [1.0, 2.0, 3.0]})
    wiggly = make_frame({"a": [1.0, 2.0, 1.5], "b": [0.0, 1.0, 2.0]})
    report = fidelity(frame, wiggly)
    assert report.lag1_real == pytest.approx((1 * 2 + 2 * 3) / 2)


def test_fidelity_excludes_zero_variance_columns_pairwise():
    rng = np.random.default_rng(15)
    real = make_frame({"a": rng.normal(size=50), "b": rng.normal(size=50), "c": np.zeros(50)})
    synth = make_frame({"a": rng.normal(size=50), "b": rng.normal(size=50), "c": rng.normal(size=50)})
    report = fidelity(real, synth)
    assert report.excluded == ("c",)
    assert report.variables == ("a", "b")


def test_fidelity_needs_two_live_columns_and_three_steps():
    rng = np.random.default_rng(16)
    flat = make_frame({"a": np.ones(50), "b": np.zeros(50), "c": rng.normal(size=50)})
    live = make_frame({"a": rng.normal(size=50), "b": rng.normal(size=50), "c": rng.normal(size=50)})
    with pytest.raises(ValueError, match="non-constant"):
        fidelity(flat, live)
    with pytest.raises(ValueError, match="3 steps"):
        fidelity(make_frame({"a": [1.0, 2.0], "b": [0.0, 1.0]}), make_frame({"a": [1.0, 2.0], "b": [0.0, 1.0]}))
    with pytest.raises(ValueError, match="variables"):
        fidelity(live, make_frame({"a": rng.normal(size=50), "z": rng.normal(size=50)}))


def test_fidelity_invariant_under_shared_reordering():
    rng = np.random.default_rng(17)
    real = random_frame(rng, ["a", "b", "c"])
    synth = random_frame(rng, ["a", "b", "c"])
    perm = ["c", "a", "b"]
    real_p = make_frame({n: real.columns[n] for n in perm})
    synth_p = make_frame({n: synth.columns[n] for n in perm})
    before = fidelity(real, synth)
    after = fidelity(real_p, synth_p)
    assert before.matrix_corr == pytest.approx(after.matrix_corr, abs=1e-12)
    assert before.cosine == pytest.approx(after.cosine, abs=1e-12)
    assert before.frobenius == pytest.approx(after.frobenius, abs=1e-12)


# -- bundled evaluation --------------------------------------------------------------


def test_evaluate_bundles_all_levels():
    truth = graph_from(3, [(0, 1, 1), (1, 2, 2)])
    est = graph_from(3, [(0, 1, 2), (1, 2, 2)])
    report = evaluate(truth, est, lag_window=1)
    assert report.windowed.lag_window == 1
    assert report.windowed.f1 == 1.0
    assert report.summary.f1 == 1.0
    assert report.sid.lagged == 2  # v1's parents differ by lag, two interveners
    assert report.sid.note == SID_NOTE


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_perturbing_one_lag_never_beats_identity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    triples = sample_triples(rng, n)
    if not triples:
        return
    g = graph_from(n, triples)
    k = int(rng.integers(0, len(triples)))
    s, t, lag = triples[k]
    bumped = (s, t, lag + 1)
    if bumped in triples:
        return
    perturbed = graph_from(n, triples[:k] + [bumped] + triples[k + 1 :])
    for window in range(4):
        assert match_f1(g, perturbed, lag_window=window).f1 <= match_f1(g, g, lag_window=window).f1
