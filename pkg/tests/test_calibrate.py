"""Decision-limit calibration: the cached ARL curve must agree exactly with
direct simulation, and regula falsi must hit the target deterministically.
"""

import math

import numpy as np
import pytest

from sscusum.calibrate import ArlCurve, CalibrationSpec, calibrate_h
from sscusum.charts import ChartConfig, NIGParams
from sscusum.errors import BracketError
from sscusum.metrics import estimate_arl0
from sscusum.simulate import ScenarioSpec


def cal_spec(**kw):
    defaults = dict(
        chart=ChartConfig("ssc", k=0.5),
        target_arl=50.0,
        reps=400,
        master_seed=77,
        tol_arl=1.0,
        cap=2000,
    )
    defaults.update(kw)
    return CalibrationSpec(**defaults)


def test_curve_matches_direct_simulation_exactly():
    spec = cal_spec(reps=60)
    curve = ArlCurve(spec)
    scenario = ScenarioSpec(
        chart=spec.chart, reps=60, master_seed=77, cap=spec.cap
    )
    for h in (0.3, 1.1, 2.4, 5.0):
        direct = estimate_arl0(scenario, h=h)
        cached = curve.arl(h)
        assert cached.mean == direct.mean
        assert cached.censored == direct.censored
        assert cached.std_error == pytest.approx(direct.std_error, abs=1e-12)


def test_curve_monotone_in_h():
    curve = ArlCurve(cal_spec(reps=100))
    means = [curve.arl(h).mean for h in np.linspace(0.1, 8.0, 40)]
    assert all(b >= a for a, b in zip(means, means[1:]))


def test_calibrate_converges_to_target():
    spec = cal_spec()
    result = calibrate_h(spec)
    assert result.converged
    assert abs(result.achieved_arl.mean - 50.0) <= spec.tol_arl
    assert result.h > 0


def test_calibrate_deterministic():
    a = calibrate_h(cal_spec())
    b = calibrate_h(cal_spec())
    assert a == b


def test_calibrated_h_validates_on_fresh_seed():
    spec = cal_spec(reps=800, tol_arl=1.0)
    result = calibrate_h(spec)
    check = estimate_arl0(
        ScenarioSpec(chart=spec.chart, reps=800, master_seed=4242, cap=2000),
        h=result.h,
    )
    assert abs(check.mean - 50.0) <= 3.0 * math.hypot(
        check.std_error, result.achieved_arl.std_error
    )


def test_calibrate_monotone_in_target():
    h200 = calibrate_h(cal_spec(target_arl=200.0, tol_arl=2.0)).h
    h500 = calibrate_h(cal_spec(target_arl=500.0, tol_arl=2.0)).h
    assert h200 < h500


def test_calibrate_prc_reference_works():
    spec = cal_spec(chart=ChartConfig("prc", k=0.75, prior=NIGParams.reference()))
    result = calibrate_h(spec)
    assert result.converged
    assert abs(result.achieved_arl.mean - 50.0) <= 1.0


def test_calibrate_returns_endpoint_when_target_met_there():
    # find the ARL at some h, then target exactly that value with that
    # endpoint as the lower bracket edge: it must return immediately
    base = cal_spec()
    curve = ArlCurve(base)
    arl_at_1 = curve.arl(1.0).mean
    spec = cal_spec(target_arl=arl_at_1, bracket=(1.0, 20.0), tol_arl=0.5)
    result = calibrate_h(spec, curve=curve)
    assert result.converged
    assert result.h == 1.0
    assert result.iterations == 0


def test_calibrate_brackets_automatically_from_small_interval():
    spec = cal_spec(bracket=(0.05, 0.1))
    result = calibrate_h(spec)
    assert result.converged
    assert abs(result.achieved_arl.mean - 50.0) <= spec.tol_arl


def test_calibrate_target_must_be_below_cap():
    with pytest.raises(ValueError):
        cal_spec(target_arl=3000.0, cap=2000)


def test_calibrate_unreachably_low_target_raises_bracket_error():
    # SSC cannot alarm before index 3, so ARL 2 is unreachable
    with pytest.raises(BracketError):
        calibrate_h(cal_spec(target_arl=2.5, tol_arl=0.1))


def test_calibration_spec_validation():
    with pytest.raises(ValueError):
        cal_spec(target_arl=0.5)
    with pytest.raises(ValueError):
        cal_spec(tol_arl=0.0)
    with pytest.raises(ValueError):
        cal_spec(bracket=(2.0, 1.0))
