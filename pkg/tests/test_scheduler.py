import math

import pytest
from hypothesis import given, settings, strategies as st

from dlrslab.scheduler import (
    AdacompSchedule,
    AdacompState,
    CASE_CONVERGENT,
    CASE_DIVERGENT,
    CASE_FLAT,
    ConstantSchedule,
    DlrsConfig,
    DlrsSchedule,
    DlrsState,
    EpochLossSummary,
    ExponentialDecaySchedule,
    adacomp_update,
    classify_slope,
    dlrs_update,
    floor_log10,
    make_schedule,
)

# ---------------------------------------------------------------- summaries


def summary_of(losses):
    s = EpochLossSummary()
    for x in losses:
        s.record(x)
    return s


def reference_slope(losses):
    """Array-based definition the streaming summary must match."""
    return (losses[-1] - losses[0]) / (sum(losses) / len(losses))


def test_summary_single_batch_slope_zero():
    assert summary_of([3.5]).normalized_slope() == 0.0


def test_summary_mean_and_slope_hand_values():
    s = summary_of([2.0, 4.0, 6.0])
    assert s.mean == 4.0
    assert s.normalized_slope() == 1.0


def test_summary_rejects_negative_and_nonfinite():
    for bad in (-1.0, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            summary_of([1.0, bad])


def test_summary_requires_at_least_one_batch():
    with pytest.raises(ValueError):
        EpochLossSummary().mean


def test_summary_zero_mean_slope_undefined():
    with pytest.raises(ValueError):
        summary_of([0.0, 0.0]).normalized_slope()


@given(st.lists(st.floats(min_value=1e-9, max_value=1e6), min_size=1, max_size=1000))
def test_summary_matches_array_reference(losses):
    s = summary_of(losses)
    assert math.isclose(s.mean, sum(losses) / len(losses), rel_tol=1e-12)
    assert math.isclose(s.normalized_slope(), reference_slope(losses),
                        rel_tol=1e-9, abs_tol=1e-12)


def test_summary_size_is_constant_in_batch_count():
    sizes = {len(summary_of([1.0] * b).to_bytes()) for b in (1, 10, 10_000)}
    assert sizes == {32}


def test_summary_bytes_round_trip():
    s = summary_of([2.0, 4.0, 6.0])
    assert EpochLossSummary.from_bytes(s.to_bytes()) == s


# ---------------------------------------------------------------- floor_log10


@pytest.mark.parametrize("n", range(-12, 5))
def test_floor_log10_exact_at_powers_of_ten(n):
    assert floor_log10(10.0 ** n) == n


def test_floor_log10_generic_values():
    assert floor_log10(3.05e-3) == -3
    assert floor_log10(9.999e-1) == -1
    assert floor_log10(1.0000001) == 0


def test_floor_log10_rejects_nonpositive():
    with pytest.raises(ValueError):
        floor_log10(0.0)


# ---------------------------------------------------------------- classification


def test_classification_boundaries():
    assert classify_slope(1.0000001) == CASE_DIVERGENT
    assert classify_slope(1.0) == CASE_FLAT      # boundary counts as flat
    assert classify_slope(0.0) == CASE_FLAT
    assert classify_slope(-1e-15) == CASE_CONVERGENT


def test_classification_rejects_nonfinite():
    with pytest.raises(ValueError):
        classify_slope(float("nan"))


# ---------------------------------------------------------------- dlrs updates

CFG = DlrsConfig(alpha0=1e-3)


def test_update_hand_values_convergent():
    # alpha=1e-3, slope=-0.5: alpha - 1e-3 * 0.1 * (-0.5) = 1.05e-3
    out = dlrs_update(DlrsState(1e-3), CFG, -0.5)
    assert out.alpha == pytest.approx(1.05e-3, abs=1e-18)


def test_update_uses_floor_not_round():
    # alpha=3.05e-3 has floor_log10 = -3 even though it rounds up to 1e-2
    out = dlrs_update(DlrsState(3.05e-3), CFG, -0.5)
    assert out.alpha == pytest.approx(3.05e-3 + 1e-3 * 0.1 * 0.5, abs=1e-18)


def test_update_clamps_to_floor():
    # flat slope 1.0 at alpha=1e-3 subtracts exactly 1e-3 -> clamp
    out = dlrs_update(DlrsState(1e-3), CFG, 1.0)
    assert out.alpha == CFG.alpha_min


def test_update_rejects_alpha_outside_bounds():
    with pytest.raises(ValueError):
        dlrs_update(DlrsState(2.0), CFG, 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        DlrsConfig(alpha0=1e-9)  # below alpha_min
    with pytest.raises(ValueError):
        DlrsConfig(delta_i=0.0)


alphas = st.floats(min_value=1e-8, max_value=1.0)
slopes = st.floats(min_value=-100.0, max_value=100.0)
deltas = st.floats(min_value=1e-3, max_value=10.0)


@settings(max_examples=500)
@given(alphas, slopes, deltas, deltas, deltas)
def test_update_never_leaves_bounds(alpha, slope, dd, do, di):
    cfg = DlrsConfig(alpha0=alpha, delta_d=dd, delta_o=do, delta_i=di)
    out = dlrs_update(DlrsState(alpha), cfg, slope)
    assert cfg.alpha_min <= out.alpha <= cfg.alpha_max


@settings(max_examples=500)
@given(alphas)
def test_update_zero_slope_is_exact_fixpoint(alpha):
    cfg = DlrsConfig(alpha0=alpha)
    assert dlrs_update(DlrsState(alpha), cfg, 0.0).alpha == alpha


@settings(max_examples=500)
@given(alphas, slopes)
def test_update_sign_correctness(alpha, slope):
    """Positive slope can only shrink alpha; negative can only grow it."""
    out = dlrs_update(DlrsState(alpha), DlrsConfig(alpha0=alpha), slope)
    if slope > 0:
        assert out.alpha <= alpha
    elif slope < 0:
        assert out.alpha >= alpha


@settings(max_examples=500)
@given(slopes)
def test_update_case_partition_total_and_exclusive(slope):
    case = classify_slope(slope)
    assert case in (CASE_DIVERGENT, CASE_FLAT, CASE_CONVERGENT)
    assert (case == CASE_DIVERGENT) == (slope > 1.0)
    assert (case == CASE_FLAT) == (0.0 <= slope <= 1.0)
    assert (case == CASE_CONVERGENT) == (slope < 0.0)


@settings(max_examples=300)
@given(alphas, slopes)
def test_update_scale_matches_order_of_magnitude(alpha, slope):
    """|change| before clamping is 10^floor(log10(alpha)) * delta * |slope|."""
    cfg = DlrsConfig(alpha0=alpha)
    delta = {CASE_DIVERGENT: cfg.delta_d, CASE_FLAT: cfg.delta_o,
             CASE_CONVERGENT: cfg.delta_i}[classify_slope(slope)]
    expected = alpha - 10.0 ** floor_log10(alpha) * delta * slope
    clamped = min(max(expected, cfg.alpha_min), cfg.alpha_max)
    assert dlrs_update(DlrsState(alpha), cfg, slope).alpha == clamped


# ---------------------------------------------------------------- adacomp


def test_adacomp_first_step_only_records_loss():
    out = adacomp_update(AdacompState(alpha=0.1), 5.0)
    assert out.alpha == 0.1 and out.previous_loss == 5.0


def test_adacomp_multiplicative_rule():
    s = AdacompState(alpha=0.1, previous_loss=5.0)
    assert adacomp_update(s, 4.0).alpha == pytest.approx(0.11)   # improved
    assert adacomp_update(s, 6.0).alpha == pytest.approx(0.09)   # worsened
    assert adacomp_update(s, 5.0).alpha == 0.1                    # tie


def test_adacomp_clamps():
    s = AdacompState(alpha=1.0, previous_loss=5.0)
    assert adacomp_update(s, 4.0).alpha == 1.0


# ---------------------------------------------------------------- schedules


def test_constant_schedule_traces_empty_case():
    sched = ConstantSchedule(0.01)
    sched.step(summary_of([1.0, 2.0]))
    sched.step(summary_of([2.0, 1.0]))
    assert [row.alpha for row in sched.history] == [0.01, 0.01]
    assert all(row.case == "" and row.slope is None for row in sched.history)


def test_decay_schedule_closed_form():
    sched = ExponentialDecaySchedule(1.0, rate=0.5)
    got = [sched.step(summary_of([1.0])) for _ in range(4)]
    assert got == [0.5, 0.25, 0.125, 0.0625]


def test_dlrs_schedule_scripted_trajectory():
    """Hand-derived trajectory for the scripted batch losses."""
    sched = make_schedule("dlrs", 1e-3, {})
    for losses in [(2, 4, 6), (6, 4, 2), (3, 3, 3)]:
        sched.step(summary_of(losses))
    alphas = [row.alpha for row in sched.history]
    assert alphas == pytest.approx([1e-8, 1.1e-8, 1.1e-8], abs=1e-15)
    assert [row.case for row in sched.history] == ["flat", "convergent", "flat"]


def test_make_schedule_rejects_unknown_name():
    with pytest.raises(ValueError):
        make_schedule("cosine", 1e-3, {})


def test_make_schedule_forwards_params():
    sched = make_schedule("adacomp", 0.1, {"gamma": 0.2})
    assert isinstance(sched, AdacompSchedule) and sched.gamma == 0.2
    sched = make_schedule("dlrs", 1e-3, {"delta_i": 0.3})
    assert isinstance(sched, DlrsSchedule) and sched.cfg.delta_i == 0.3
