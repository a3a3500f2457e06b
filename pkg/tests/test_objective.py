import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from archex.errors import NonPositiveMetric, WeightOutOfRange, WeightsDoNotSumToOne
from archex.objective import (
    NormalizedMetrics,
    NormConstants,
    RawMetrics,
    Weights,
    normalize,
    objective,
    score,
    validate_weights,
)

positive = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)
unit = st.floats(min_value=0.0, max_value=1.0)


def test_self_normalization():
    v = normalize(RawMetrics(1.6, 35), NormConstants(1.6, 35))
    assert (v.v_power, v.v_time) == (1.0, 1.0)


def test_ratio_normalization_may_exceed_one():
    v = normalize(RawMetrics(0.8, 70), NormConstants(1.6, 35))
    assert (v.v_power, v.v_time) == (0.5, 2.0)


def test_objective_examples():
    assert objective(NormalizedMetrics(0.4, 0.6), Weights(0.5, 0.5)) == pytest.approx(0.5, abs=1e-15)
    assert objective(NormalizedMetrics(0.5, 2.0), Weights(0.9, 0.1)) == pytest.approx(0.65, abs=1e-15)


@given(unit)
def test_all_ones_gives_one(w):
    weights = Weights(w, 1.0 - w)
    assert objective(NormalizedMetrics(1.0, 1.0), weights) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("pair", [(0.9, 0.1), (0.1, 0.9), (1.0, 0.0), (0.0, 1.0)])
def test_valid_weights(pair):
    w = validate_weights(*pair)
    assert (w.w_power, w.w_time) == pair


def test_weights_must_sum_to_one():
    with pytest.raises(WeightsDoNotSumToOne):
        validate_weights(0.7, 0.7)
    validate_weights(0.3, 0.7 + 5e-10)
    with pytest.raises(WeightsDoNotSumToOne):
        validate_weights(0.3, 0.7 + 5e-9)


@pytest.mark.parametrize("pair", [(-0.1, 1.1), (1.5, -0.5), (math.nan, 1.0)])
def test_weights_out_of_range(pair):
    with pytest.raises(WeightOutOfRange):
        validate_weights(*pair)


@pytest.mark.parametrize("vals", [(0, 1), (1, 0), (-1, 1), (math.inf, 1), (1, math.nan)])
def test_raw_metrics_must_be_positive(vals):
    with pytest.raises(NonPositiveMetric):
        RawMetrics(*vals)


def test_norms_from_metrics_take_maxima():
    norms = NormConstants.from_metrics([RawMetrics(1, 9), RawMetrics(3, 2), RawMetrics(2, 5)])
    assert norms == NormConstants(3, 9)


@settings(max_examples=200)
@given(positive, positive, positive, positive, st.floats(0, 1), unit)
def test_objective_monotone(vp, vt, dp, dt, w, frac):
    weights = Weights(w, 1.0 - w)
    base = objective(NormalizedMetrics(vp, vt), weights)
    assert objective(NormalizedMetrics(vp + dp * frac, vt), weights) >= base
    assert objective(NormalizedMetrics(vp, vt + dt * frac), weights) >= base


@settings(max_examples=100)
@given(st.lists(st.tuples(positive, positive), min_size=1, max_size=200), positive, positive, unit,
       st.floats(min_value=0.01, max_value=100))
def test_norm_scaling_keeps_argmin(points, mp, mt, w, c):
    weights = Weights(w, 1.0 - w)
    norms = NormConstants(mp, mt)
    raws = [RawMetrics(p, t) for p, t in points]
    base = [score(r, norms, weights) for r in raws]
    scaled = [score(r, norms.scaled(c), weights) for r in raws]
    for b, s in zip(base, scaled):
        assert s == pytest.approx(b / c, rel=1e-9)
    lo_b, lo_s = min(base), min(scaled)
    argmin_b = {i for i, v in enumerate(base) if v <= lo_b * (1 + 1e-12)}
    argmin_s = {i for i, v in enumerate(scaled) if v <= lo_s * (1 + 1e-12)}
    assert argmin_b & argmin_s


@settings(max_examples=100)
@given(st.lists(st.tuples(positive, positive), min_size=1, max_size=100), positive, positive)
def test_extreme_weights_pick_raw_argmin(points, mp, mt):
    norms = NormConstants(mp, mt)
    raws = [RawMetrics(p, t) for p, t in points]
    by_power = min(range(len(raws)), key=lambda i: score(raws[i], norms, Weights(1.0, 0.0)))
    by_time = min(range(len(raws)), key=lambda i: score(raws[i], norms, Weights(0.0, 1.0)))
    assert raws[by_power].total_power == min(r.total_power for r in raws)
    assert raws[by_time].exec_time == min(r.exec_time for r in raws)
