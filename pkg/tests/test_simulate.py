"""Monte Carlo engine: substream independence and determinism, observation
generation, and run-to-alarm behavior.
"""

import math

import numpy as np
import pytest

from sscusum.charts import ChartConfig, NIGParams
from sscusum.simulate import (
    RunOutcome,
    ScenarioSpec,
    gen_observation,
    run_envelope,
    run_once,
    simulate_stop_times,
    substream,
)


def ssc_spec(**kw):
    defaults = dict(
        chart=ChartConfig("ssc", k=0.5, h=3.0),
        reps=10,
        master_seed=11,
        cap=2000,
    )
    defaults.update(kw)
    return ScenarioSpec(**defaults)


def prc_spec(prior=None, **kw):
    defaults = dict(
        chart=ChartConfig("prc", k=0.5, h=3.0, prior=prior or NIGParams.reference()),
        reps=10,
        master_seed=11,
        cap=2000,
    )
    defaults.update(kw)
    return ScenarioSpec(**defaults)


# --- substreams -----------------------------------------------------------


def test_substream_deterministic():
    a = substream(123, 7).random(1000)
    b = substream(123, 7).random(1000)
    assert np.array_equal(a, b)


def test_substream_distinct_indices_differ_and_look_independent():
    a = substream(123, 0).random(10000)
    b = substream(123, 1).random(10000)
    assert not np.array_equal(a, b)
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) < 0.05


def test_substream_seed_sensitivity():
    a = substream(123, 0).random(100)
    b = substream(124, 0).random(100)
    assert not np.array_equal(a, b)


# --- observation generation -----------------------------------------------


def test_gen_observation_in_control_moments():
    spec = ssc_spec(delta=0.0, tau=math.inf)
    stream = substream(5, 0)
    draws = np.array([gen_observation(stream, i, spec) for i in range(1, 100_001)])
    assert abs(draws.mean()) <= 3.0 / math.sqrt(draws.size)
    assert abs(draws.std() - 1.0) <= 0.01


def test_gen_observation_shift_applies_from_tau():
    spec = ssc_spec(delta=2.0, tau=11, cap=100000)
    stream = substream(5, 0)
    draws = np.array([gen_observation(stream, i, spec) for i in range(1, 100_001)])
    post = draws[10:]
    assert abs(post.mean() - 2.0) <= 3.0 / math.sqrt(post.size)


def test_gen_observation_pre_change_draws_equal_in_control_draws():
    # the shift is a deterministic offset on shared uniforms, so indices
    # below tau must match the pure in-control stream exactly
    ooc = ssc_spec(delta=2.0, tau=11, cap=1000)
    ic = ssc_spec(delta=0.0, tau=math.inf, cap=1000)
    s_ooc = substream(9, 3)
    d_ooc = [gen_observation(s_ooc, i, ooc) for i in range(1, 11)]
    s_ic = substream(9, 3)
    d_ic = [gen_observation(s_ic, i, ic) for i in range(1, 11)]
    assert d_ooc == d_ic


def test_gen_observation_matches_engine_blocks():
    # the scalar op and the engine's block generator must consume the
    # stream identically
    from sscusum.simulate import _gen_block

    spec = ssc_spec(delta=1.5, tau=7, cap=64)
    s1 = substream(21, 2)
    scalar = np.array([gen_observation(s1, i, spec) for i in range(1, 65)])
    s2 = substream(21, 2)
    blocks = np.concatenate(
        [_gen_block(s2, 1, 20, spec), _gen_block(s2, 21, 30, spec), _gen_block(s2, 51, 14, spec)]
    )
    assert np.allclose(scalar, blocks, rtol=0, atol=0)


def test_gen_observation_rejects_bad_index():
    with pytest.raises(ValueError):
        gen_observation(substream(1, 0), 0, ssc_spec())


# --- scenario validation ----------------------------------------------------


def test_scenario_validation():
    with pytest.raises(ValueError):
        ssc_spec(reps=0)
    with pytest.raises(ValueError):
        ssc_spec(tau=0)
    with pytest.raises(ValueError):
        ssc_spec(tau=500, cap=100)
    with pytest.raises(ValueError):
        ssc_spec(delta=math.inf)


# --- run_once ----------------------------------------------------------------


def test_run_once_unreachable_limit_censors_at_cap():
    spec = ssc_spec(cap=500)
    out = run_once(spec, 0, h=math.inf)
    assert out == RunOutcome(500, True)


def test_run_once_zero_limit_stops_at_first_scored_step():
    assert run_once(ssc_spec(), 0, h=0.0).stop_time == 3
    assert run_once(prc_spec(), 0, h=0.0).stop_time == 3
    assert run_once(prc_spec(prior=NIGParams(0.0, 4.0, 2.0, 1.5)), 0, h=0.0).stop_time == 2


def test_run_once_deterministic():
    spec = ssc_spec(delta=1.0, tau=21, cap=5000)
    outs = {run_once(spec, 4, h=2.5) for _ in range(3)}
    assert len(outs) == 1


def test_run_once_monotone_in_h():
    spec = ssc_spec(cap=3000)
    for rep in range(25):
        stops = [run_once(spec, rep, h=h).stop_time for h in (0.5, 1.5, 3.0, 5.0)]
        assert stops == sorted(stops)


def test_warmup_guarantee():
    for rep in range(20):
        assert run_once(ssc_spec(), rep, h=0.0).stop_time >= 3
        assert run_once(prc_spec(), rep, h=0.0).stop_time >= 3
        assert (
            run_once(prc_spec(prior=NIGParams(0.0, 4.0, 2.0, 1.5)), rep, h=0.0).stop_time
            >= 2
        )


def test_run_once_requires_some_h():
    with pytest.raises(ValueError):
        run_once(ssc_spec(chart=ChartConfig("ssc", k=0.5)), 0)


def test_stop_times_order_is_replication_order():
    spec = ssc_spec(reps=6, cap=800)
    times, cens = simulate_stop_times(spec, h=2.0)
    singles = [run_once(spec, r, h=2.0) for r in range(6)]
    assert list(times) == [s.stop_time for s in singles]
    assert list(cens) == [s.censored for s in singles]


# --- envelopes ----------------------------------------------------------------


def test_envelope_recovers_run_once_stop_times():
    # the envelope of a replication must reproduce run_once for every h
    for spec in (ssc_spec(cap=1500), prc_spec(cap=1500)):
        for rep in range(8):
            times, values = run_envelope(spec, rep)
            for h in (0.0, 0.7, 1.9, 3.3, 8.0):
                idx = int(np.searchsorted(values, h, side="right"))
                expected = int(times[idx]) if idx < len(times) else spec.cap
                out = run_once(spec, rep, h=h)
                got = out.stop_time if not out.censored else spec.cap
                assert got == expected


def test_envelope_deterministic():
    spec = prc_spec(cap=1000)
    t1, v1 = run_envelope(spec, 3)
    t2, v2 = run_envelope(spec, 3)
    assert np.array_equal(t1, t2)
    assert np.array_equal(v1, v2)
