"""Exhaustive certification, property fuzzers, and error-variance limits."""

import math

import numpy as np
import pytest

import batchsched as bs
from helpers import random_feasible_schedule, scenario_stream


def scalar_model():
    return bs.validate_model(
        bs.SystemModel(
            kind="discrete-invariant",
            state_dim=1,
            dynamics=np.eye(1),
            noise_input=np.eye(1),
            process_noise_cov=np.eye(1),
            initial_state_cov=np.eye(1),
            measurement_times=(1.0,),
            sensors=(bs.Sensor(C=np.eye(1), V=np.eye(1)),),
            budgets=(1,),
        )
    )


def axis_model(budget=1):
    # Orthogonal rank-one sensors on a unit prior: a modular instance, so
    # greedy recovers the exhaustive optimum exactly.
    return bs.validate_model(
        bs.SystemModel(
            kind="discrete-invariant",
            state_dim=2,
            dynamics=np.eye(2),
            noise_input=np.eye(2),
            process_noise_cov=np.eye(2),
            initial_state_cov=np.eye(2),
            measurement_times=(1.0,),
            sensors=(
                bs.Sensor(C=np.array([[1.0, 0.0]]), V=np.eye(1)),
                bs.Sensor(C=np.array([[0.0, 1.0]]), V=np.eye(1)),
            ),
            budgets=(budget,),
        )
    )


def test_feasible_schedule_count():
    model = bs.random_scenario(seed=0, n=2, m=4, K=3, r=2)
    per_time = 1 + 4 + 6
    assert bs.feasible_schedule_count(model) == per_time**3
    assert sum(1 for _ in bs.iter_feasible_schedules(model)) == per_time**3


def test_enumeration_is_lexicographic():
    model = bs.random_scenario(seed=0, n=1, m=2, K=1, r=2)
    listed = [s.selections for s in bs.iter_feasible_schedules(model)]
    assert listed == [((),), ((0,),), ((0, 1),), ((1,),)]


def test_brute_force_zero_budget():
    model = bs.random_scenario(seed=5, n=2, m=3, K=2, r=0)
    ev = bs.build_evaluator(model)
    schedule, value = bs.brute_force_opt(ev, model)
    assert schedule == bs.Schedule.empty(2)
    assert value == bs.objective_logdet(ev, schedule)


def test_brute_force_single_sensor():
    model = scalar_model()
    ev = bs.build_evaluator(model)
    schedule, value = bs.brute_force_opt(ev, model)
    assert schedule.to_lists() == [[0]]
    assert value == pytest.approx(math.log(0.5), abs=1e-12)


def test_brute_force_upper_bounds_greedy():
    for model in scenario_stream(15, seed0=12):
        ev = bs.build_evaluator(model)
        greedy, _ = bs.greedy_schedule(ev, model)
        _, opt_value = bs.brute_force_opt(ev, model)
        assert opt_value <= bs.objective_logdet(ev, greedy) + 1e-12


def test_brute_force_cap():
    model = bs.random_scenario(seed=5, n=1, m=4, K=3, r=2)
    ev = bs.build_evaluator(model)
    with pytest.raises(bs.EnumerationCapExceeded):
        bs.brute_force_opt(ev, model, cap=100)


def test_worst_value_scalar():
    model = scalar_model()
    ev = bs.build_evaluator(model)
    assert bs.worst_value(ev, model) == pytest.approx(0.0, abs=1e-12)


def test_worst_value_matches_exhaustive_maximum():
    for model in scenario_stream(60, seed0=910):
        ev = bs.build_evaluator(model)
        analytic = bs.worst_value(ev, model, verify=True)  # raises on mismatch
        empty_value = bs.objective_logdet(ev, bs.Schedule.empty(model.horizon))
        assert analytic == empty_value


def test_certify_modular_instance_ratio_zero():
    model = axis_model(budget=1)
    ev = bs.build_evaluator(model)
    cert = bs.certify_ratio(ev, model)
    assert cert.ratio == pytest.approx(0.0, abs=1e-12)
    assert cert.opt_value <= cert.greedy_value <= cert.max_value + 1e-9


def test_certify_full_budget_selects_everything():
    model = axis_model(budget=2)
    ev = bs.build_evaluator(model)
    cert = bs.certify_ratio(ev, model)
    greedy, _ = bs.greedy_schedule(ev, model)
    assert greedy.to_lists() == [[0, 1]]
    assert cert.ratio == 0.0
    assert cert.opt_schedule == greedy


def test_certify_degenerate_spread():
    blank = bs.Sensor(C=np.zeros((1, 1)), V=np.eye(1))
    model = bs.validate_model(
        bs.SystemModel(
            kind="discrete-invariant",
            state_dim=1,
            dynamics=np.eye(1),
            noise_input=np.eye(1),
            process_noise_cov=np.eye(1),
            initial_state_cov=np.eye(1),
            measurement_times=(1.0,),
            sensors=(blank,),
            budgets=(1,),
        )
    )
    ev = bs.build_evaluator(model)
    cert = bs.certify_ratio(ev, model)
    assert cert.ratio == 0.0
    assert cert.max_value == pytest.approx(cert.opt_value, abs=1e-12)


def test_certify_random_sample():
    for model in scenario_stream(50, seed0=2711):
        ev = bs.build_evaluator(model)
        cert = bs.certify_ratio(ev, model)
        assert cert.ratio <= 0.5 + 1e-9
        assert cert.opt_value <= cert.greedy_value <= cert.max_value + 1e-9


def test_certificate_serializes():
    model = axis_model()
    ev = bs.build_evaluator(model)
    payload = bs.certify_ratio(ev, model).to_dict()
    assert set(payload) == {
        "greedy_value", "opt_value", "max_value", "ratio", "opt_schedule", "fingerprint",
    }
    assert payload["fingerprint"] == bs.model_fingerprint(model)


def test_fuzz_monotonicity_clean_and_deterministic():
    model = bs.random_scenario(seed=31, n=2, m=3, K=2, r=2)
    first = bs.fuzz_monotonicity(model, trials=300, seed=5)
    second = bs.fuzz_monotonicity(model, trials=300, seed=5)
    assert first.violations == 0
    assert first.max_excess <= 1e-9
    assert first.to_dict() == second.to_dict()


def test_fuzz_supermodularity_clean_and_deterministic():
    model = bs.random_scenario(seed=37, n=2, m=3, K=2, r=2)
    first = bs.fuzz_supermodularity(model, trials=300, seed=6)
    second = bs.fuzz_supermodularity(model, trials=300, seed=6)
    assert first.violations == 0
    assert first.effective_trials > 0
    assert first.max_excess <= 1e-9
    assert first.to_dict() == second.to_dict()


def test_fuzz_supermodularity_skips_when_no_room():
    model = bs.random_scenario(seed=37, n=2, m=3, K=2, r=0)
    report = bs.fuzz_supermodularity(model, trials=50, seed=6)
    assert report.effective_trials == 0
    assert report.max_excess is None


def test_bound_inputs_scalar():
    b = bs.bound_inputs(scalar_model())
    assert b.sigma_w_inv == pytest.approx(1.0, abs=1e-12)
    assert b.sigma_v_inv == pytest.approx(1.0, abs=1e-12)
    assert b.c_norm_sq == pytest.approx(1.0, abs=1e-12)
    assert b.r_max == 1 and b.state_dim == 1 and b.horizon == 1


def test_error_lower_bound_scalar_tight():
    model = scalar_model()
    assert bs.error_lower_bound(model) == pytest.approx(0.5, abs=1e-12)
    ev = bs.build_evaluator(model)
    achieved = bs.batch_error_trace(ev, bs.Schedule.from_sets([[0]]))
    assert achieved == pytest.approx(0.5, abs=1e-12)


def test_error_lower_bound_zero_budget():
    model = bs.random_scenario(seed=3, n=2, m=2, K=3, r=0)
    bound = bs.error_lower_bound(model)
    b = bs.bound_inputs(model)
    assert bound == pytest.approx(b.state_dim / (b.sigma_w_inv / b.horizon), rel=1e-12)
    ev = bs.build_evaluator(model)
    assert bs.batch_error_trace(ev, bs.Schedule.empty(3)) >= bound - 1e-9


def test_error_lower_bound_holds_for_random_schedules():
    rng = np.random.default_rng(11)
    for model in scenario_stream(20, seed0=404):
        bound = bs.error_lower_bound(model)
        ev = bs.build_evaluator(model)
        for _ in range(5):
            schedule = random_feasible_schedule(rng, model)
            assert bs.batch_error_trace(ev, schedule) >= bound - 1e-9


def test_min_sensors_scalar():
    model = scalar_model()
    assert bs.min_sensors_for_error(model, 0.5) == pytest.approx(1.0, abs=1e-12)


def test_min_sensors_vacuous_at_prior_trace():
    model = bs.random_scenario(seed=9, n=2, m=3, K=2, r=1)
    ev = bs.build_evaluator(model)
    prior_trace = bs.batch_error_trace(ev, bs.Schedule.empty(2))
    assert bs.min_sensors_for_error(model, prior_trace) <= 0.0


def test_min_sensors_consistent_with_achieved_error():
    for model in scenario_stream(15, seed0=515):
        ev = bs.build_evaluator(model)
        schedule, _ = bs.greedy_schedule(ev, model)
        achieved = bs.batch_error_trace(ev, schedule)
        needed = bs.min_sensors_for_error(model, achieved)
        assert needed <= max(schedule.sizes()) + 1e-9


def test_min_sensors_rejects_bad_alpha():
    with pytest.raises(bs.InvalidArgument):
        bs.min_sensors_for_error(scalar_model(), 0.0)


def test_ellipsoid_log_volume_values():
    assert bs.ellipsoid_log_volume(0.0, 1.0, 2) == pytest.approx(math.log(math.pi), abs=1e-12)
    assert bs.ellipsoid_log_volume(0.0, 1.0, 1) == pytest.approx(math.log(2.0), abs=1e-12)
    base = bs.ellipsoid_log_volume(1.3, 0.7, 5)
    shifted = bs.ellipsoid_log_volume(1.3 + 0.4, 0.7, 5)
    assert shifted - base == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(bs.InvalidArgument):
        bs.ellipsoid_log_volume(0.0, 0.0, 2)
    with pytest.raises(bs.InvalidArgument):
        bs.ellipsoid_log_volume(0.0, 1.0, 0)
