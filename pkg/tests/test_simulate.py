import numpy as np
import pytest

from sure_omt.simulate import (PLACEMENTS, ProcSpec, ScenarioConfig, dump_stream_csv,
                               generate_trial, place_signal, run_sweep, run_trials)


def test_scenario_counts_default():
    sc = ScenarioConfig()
    assert sc.m3 == 150            # round(0.3 * 500)
    assert sc.m2 == 175
    assert sc.m1 == 175
    assert sc.m1 + sc.m2 + sc.m3 == sc.m


def test_scenario_odd_remainder_goes_to_low_group():
    sc = ScenarioConfig(m=10, pi_a=0.3)
    assert sc.m3 == 3
    assert sc.m2 == 3
    assert sc.m1 == 4


def test_scenario_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(placement="nope")
    with pytest.raises(ValueError):
        ScenarioConfig(pi_a=1.5)


def test_placement_block_conventions():
    # m=10, m3=4: first block ceil(4/2)=2, anchors at start / middle / end
    assert place_signal(10, 4, "B") == (1, 2, 3, 4)
    assert place_signal(10, 4, "E") == (7, 8, 9, 10)
    assert place_signal(10, 4, "BM") == (1, 2, 5, 6)
    assert place_signal(10, 4, "BE") == (1, 2, 9, 10)
    assert place_signal(10, 4, "ME") == (5, 6, 9, 10)
    assert place_signal(10, 0, "B") == ()
    with pytest.raises(ValueError):
        place_signal(10, 11, "B")
    with pytest.raises(ValueError):
        place_signal(10, 4, "Random")  # needs an rng


def test_placement_blocks_shift_to_stay_disjoint():
    # small stream: middle and end blocks would overlap without shifting
    for scheme in PLACEMENTS[:-1]:
        for m, m3 in [(6, 5), (8, 7), (10, 9)]:
            idx = place_signal(m, m3, scheme)
            assert len(idx) == m3
            assert len(set(idx)) == m3
            assert all(1 <= i <= m for i in idx)


def test_random_placement_uses_rng():
    rng = np.random.default_rng(0)
    idx = place_signal(100, 10, "Random", rng)
    assert len(set(idx)) == 10
    assert idx == tuple(sorted(idx))


def test_generate_trial_is_deterministic():
    sc = ScenarioConfig(m=50, n_trials=1)
    a = generate_trial(sc, 3)
    b = generate_trial(sc, 3)
    assert a.tables == b.tables
    assert a.pvals == b.pvals
    c = generate_trial(sc, 4)
    assert a.tables != c.tables


def test_generate_trial_structure():
    sc = ScenarioConfig(m=40, pi_a=0.25, n_subjects=10, placement="B")
    tr = generate_trial(sc, 0)
    assert len(tr.tables) == 40
    assert int(tr.labels.sum()) == sc.m3
    assert all(tr.labels[:sc.m3])  # B places alternatives at the start
    for (a, b, c, d), p in zip(tr.tables, tr.pvals):
        assert a + b == 10 and c + d == 10
        assert 0.0 < p <= 1.0
    for p, bound in zip(tr.pvals, tr.bounds):
        assert p in bound.support  # p-values live on the announced support


def test_dump_stream_csv(tmp_path):
    sc = ScenarioConfig(m=5, n_subjects=4)
    tr = generate_trial(sc, 0)
    path = tmp_path / "s.csv"
    dump_stream_csv(tr, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,a,b,c,d,label"
    assert len(lines) == 6


def test_proc_spec_defaults():
    assert ProcSpec("rho-ob").build().rewarded
    assert ProcSpec("rho-ob").is_fwer
    assert not ProcSpec("rho-lord").is_fwer
    # kernel bandwidth defaults: 100 for the FWER family, 10 for investing
    assert ProcSpec("rho-aob").build().config.gamma_prime.h == 100
    assert ProcSpec("rho-alord").build().config.gamma_prime.h == 10
    assert ProcSpec("lord").build().config.w0 == pytest.approx(0.1)


def test_run_trials_and_containment():
    sc = ScenarioConfig(m=60, n_subjects=15, n_trials=5)
    specs = [ProcSpec("aob"), ProcSpec("rho-aob")]
    res = run_trials(sc, specs, audit=True)
    assert res.audits_ok
    assert len(res.outcomes["aob"]) == 5
    for base, rich in zip(res.outcomes["aob"], res.outcomes["rho-aob"]):
        # domination: every base rejection is also a rewarded rejection
        assert np.all(rich.rejects | ~base.rejects)


def test_run_sweep_reports_each_value():
    sc = ScenarioConfig(m=40, n_subjects=10, n_trials=3)
    specs = [ProcSpec("rho-ob")]
    rep = run_sweep(sc, "pi_a", [0.1, 0.5], specs)
    assert rep.value("rho-ob", "power", value=0.1) >= 0.0
    assert len(rep.rows) == 6  # 2 grid points x 3 metrics
    with pytest.raises(ValueError):
        run_sweep(sc, "bogus", [1], specs)


def test_run_sweep_lambda_axis_changes_results():
    sc = ScenarioConfig(m=60, n_subjects=15, n_trials=4, seed=2)
    specs = [ProcSpec("rho-alord")]
    rep = run_sweep(sc, "lambda", [0.0, 0.8], specs)
    assert len(rep.rows) == 6
