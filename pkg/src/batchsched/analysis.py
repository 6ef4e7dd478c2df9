"""Certification and bounds.

Exhaustive oracles certify the greedy guarantee on small instances, fuzzers
probe the structural properties the guarantee rests on (monotonicity and
diminishing returns), and closed-form limits bound the achievable total
error variance for any feasible schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import chain, combinations, product
from typing import Iterator

import numpy as np

from ._linalg import spectral_norm
from .caps import enumeration_cap
from .errors import (
    EnumerationCapExceeded,
    GuaranteeViolated,
    InvalidArgument,
    PropertyViolated,
)
from .model import Schedule, SystemModel, model_fingerprint, model_to_dict
from .objective import (
    ObjectiveEvaluator,
    build_evaluator,
    marginal_gain,
    objective_logdet,
)
from .prior import build_prior_information
from .scheduler import GreedyOptions, greedy_schedule

RATIO_TOL = 1e-9
DEGENERATE_SPREAD = 1e-12
PROPERTY_TOL = 1e-9


@dataclass(frozen=True)
class RatioCertificate:
    """Greedy value against the exhaustive optimum and worst value.

    ``ratio`` is (greedy - opt) / (max - opt), defined as 0 when the spread
    is numerically zero (greedy then trivially matches the optimum).
    """

    greedy_value: float
    opt_value: float
    max_value: float
    ratio: float
    opt_schedule: Schedule
    fingerprint: str

    def to_dict(self) -> dict:
        return {
            "greedy_value": self.greedy_value,
            "opt_value": self.opt_value,
            "max_value": self.max_value,
            "ratio": self.ratio,
            "opt_schedule": self.opt_schedule.to_lists(),
            "fingerprint": self.fingerprint,
        }


@dataclass(frozen=True)
class BoundInputs:
    """Scalars feeding the error-variance limits.

    sigma_w_inv: largest diagonal entry of the prior information matrix.
    sigma_v_inv: largest spectral norm among inverse sensor noise covariances.
    c_norm_sq:   squared spectral norm of the vertically stacked measurement
                 matrices (repeating the stack per time preserves the norm).
    """

    sigma_w_inv: float
    sigma_v_inv: float
    c_norm_sq: float
    r_max: int
    state_dim: int
    horizon: int


@dataclass
class FuzzReport:
    """Outcome of a property fuzzing run; deterministic given (seed, trials)."""

    property_name: str
    trials: int
    effective_trials: int
    max_excess: float | None
    tolerance: float
    seed: int
    fingerprint: str
    violations: int = 0
    counterexamples: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "property": self.property_name,
            "trials": self.trials,
            "effective_trials": self.effective_trials,
            "max_excess": self.max_excess,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "fingerprint": self.fingerprint,
            "violations": self.violations,
            "counterexamples": self.counterexamples,
        }


@lru_cache(maxsize=None)
def _slot_subsets(m: int, r: int) -> tuple[tuple[int, ...], ...]:
    """All subsets of [0, m) with size at most r, in lexicographic order."""
    return tuple(sorted(chain.from_iterable(combinations(range(m), size) for size in range(r + 1))))


def feasible_schedule_count(model: SystemModel) -> int:
    m = model.sensor_count
    return math.prod(sum(math.comb(m, size) for size in range(r + 1)) for r in model.budgets)


def iter_feasible_schedules(model: SystemModel) -> Iterator[Schedule]:
    """Every feasible schedule, in lexicographic order of the slot tuples."""
    per_slot = [_slot_subsets(model.sensor_count, r) for r in model.budgets]
    for slots in product(*per_slot):
        yield Schedule(selections=slots)


def _check_enumeration_cap(model: SystemModel, cap: int | None) -> int:
    count = feasible_schedule_count(model)
    limit = enumeration_cap(cap)
    if count > limit:
        raise EnumerationCapExceeded(f"{count} feasible schedules exceed cap {limit}")
    return count


def brute_force_opt(
    ev: ObjectiveEvaluator, model: SystemModel, cap: int | None = None
) -> tuple[Schedule, float]:
    """Exhaustive minimizer over all feasible schedules.

    Ties break toward the lexicographically smallest schedule, which the
    enumeration order provides for free.
    """
    model.require_validated()
    _check_enumeration_cap(model, cap)
    best_schedule = None
    best_value = math.inf
    for schedule in iter_feasible_schedules(model):
        value = objective_logdet(ev, schedule)
        if value < best_value:
            best_value = value
            best_schedule = schedule
    return best_schedule, best_value


def worst_value(
    ev: ObjectiveEvaluator,
    model: SystemModel,
    cap: int | None = None,
    verify: bool = True,
) -> float:
    """Worst feasible objective value.

    Adding sensors never increases the objective, so the maximum sits at the
    empty schedule and costs one evaluation. When ``verify`` is set and the
    instance fits under the enumeration cap, the shortcut is cross-checked
    against the exhaustive maximum.
    """
    model.require_validated()
    analytic = -ev.prior_logdet
    if verify:
        count = feasible_schedule_count(model)
        if count <= enumeration_cap(cap):
            worst = max(objective_logdet(ev, s) for s in iter_feasible_schedules(model))
            if abs(worst - analytic) > RATIO_TOL:
                raise PropertyViolated(
                    "empty-schedule shortcut disagrees with the exhaustive maximum",
                    counterexample={
                        "analytic": analytic,
                        "exhaustive": worst,
                        "model": model_to_dict(model),
                    },
                )
    return analytic


def certify_ratio(
    ev: ObjectiveEvaluator,
    model: SystemModel,
    opts: GreedyOptions | None = None,
    cap: int | None = None,
    verify_worst: bool = False,
) -> RatioCertificate:
    """Certify (greedy - opt) / (max - opt) <= 1/2 by exhaustive search.

    Raises GuaranteeViolated, carrying the full instance, if the bound
    fails; that signals a bug in this library, not a tight instance.
    """
    model.require_validated()
    greedy, _ = greedy_schedule(ev, model, opts if opts is not None else GreedyOptions())
    greedy_value = objective_logdet(ev, greedy)
    opt_schedule, opt_value = brute_force_opt(ev, model, cap)
    max_value = worst_value(ev, model, cap=cap, verify=verify_worst)
    fingerprint = model_fingerprint(model)

    def _details(ratio=None):
        return {
            "model": model_to_dict(model),
            "fingerprint": fingerprint,
            "greedy_schedule": greedy.to_lists(),
            "greedy_value": greedy_value,
            "opt_schedule": opt_schedule.to_lists(),
            "opt_value": opt_value,
            "max_value": max_value,
            "ratio": ratio,
        }

    if not (opt_value <= greedy_value <= max_value + RATIO_TOL):
        raise GuaranteeViolated(
            f"value ordering broken: opt={opt_value}, greedy={greedy_value}, max={max_value}",
            details=_details(),
        )
    spread = max_value - opt_value
    ratio = 0.0 if spread <= DEGENERATE_SPREAD else (greedy_value - opt_value) / spread
    if ratio > 0.5 + RATIO_TOL:
        raise GuaranteeViolated(
            f"approximation ratio {ratio} exceeds 1/2", details=_details(ratio)
        )
    return RatioCertificate(
        greedy_value=greedy_value,
        opt_value=opt_value,
        max_value=max_value,
        ratio=ratio,
        opt_schedule=opt_schedule,
        fingerprint=fingerprint,
    )


def _random_feasible(rng: np.random.Generator, model: SystemModel) -> Schedule:
    slots = []
    for r in model.budgets:
        size = int(rng.integers(0, r + 1))
        if size:
            picked = rng.choice(model.sensor_count, size=size, replace=False)
            slots.append(tuple(sorted(int(i) for i in picked)))
        else:
            slots.append(())
    return Schedule(selections=tuple(slots))


def _random_subschedule(rng: np.random.Generator, schedule: Schedule) -> Schedule:
    slots = []
    for slot in schedule.selections:
        slots.append(tuple(i for i in slot if rng.random() < 0.5))
    return Schedule(selections=tuple(slots))


def fuzz_monotonicity(model: SystemModel, trials: int, seed: int) -> FuzzReport:
    """Sample nested schedule pairs and check the objective never increases.

    Raises PropertyViolated with the counterexample on the first failure;
    otherwise reports the largest observed excess (at most roundoff).
    """
    model.require_validated()
    ev = build_evaluator(model)
    rng = np.random.default_rng(seed)
    fingerprint = model_fingerprint(model)
    max_excess = None
    for _ in range(trials):
        sup = _random_feasible(rng, model)
        sub = _random_subschedule(rng, sup)
        excess = objective_logdet(ev, sup) - objective_logdet(ev, sub)
        if max_excess is None or excess > max_excess:
            max_excess = excess
        if excess > PROPERTY_TOL:
            raise PropertyViolated(
                f"objective increased by {excess} when sensors were added",
                counterexample={
                    "subset": sub.to_lists(),
                    "superset": sup.to_lists(),
                    "excess": excess,
                    "fingerprint": fingerprint,
                    "model": model_to_dict(model),
                },
            )
    return FuzzReport(
        property_name="monotonicity",
        trials=trials,
        effective_trials=trials,
        max_excess=max_excess,
        tolerance=PROPERTY_TOL,
        seed=seed,
        fingerprint=fingerprint,
    )


def fuzz_supermodularity(model: SystemModel, trials: int, seed: int) -> FuzzReport:
    """Sample nested schedules plus an addition and check diminishing returns.

    The gain of one extra sensor on the smaller schedule must be at least its
    gain on the larger one. Trials where no slot has budget room are skipped
    and counted out of ``effective_trials``.
    """
    model.require_validated()
    ev = build_evaluator(model)
    rng = np.random.default_rng(seed)
    fingerprint = model_fingerprint(model)
    max_excess = None
    effective = 0
    for _ in range(trials):
        big = _random_feasible(rng, model)
        room = [
            k
            for k, slot in enumerate(big.selections)
            if len(slot) < model.budgets[k]
        ]
        if not room:
            continue
        k = int(room[int(rng.integers(0, len(room)))])
        free = [i for i in range(model.sensor_count) if i not in big.selections[k]]
        i = int(free[int(rng.integers(0, len(free)))])
        small = _random_subschedule(rng, big)
        gain_small = marginal_gain(ev, small, k, i)
        gain_big = marginal_gain(ev, big, k, i)
        effective += 1
        excess = gain_big - gain_small
        if max_excess is None or excess > max_excess:
            max_excess = excess
        if excess > PROPERTY_TOL:
            raise PropertyViolated(
                f"marginal gain grew by {excess} on the larger schedule",
                counterexample={
                    "small": small.to_lists(),
                    "big": big.to_lists(),
                    "time_index": k,
                    "sensor": i,
                    "gain_small": gain_small,
                    "gain_big": gain_big,
                    "excess": excess,
                    "fingerprint": fingerprint,
                    "model": model_to_dict(model),
                },
            )
    return FuzzReport(
        property_name="supermodularity",
        trials=trials,
        effective_trials=effective,
        max_excess=max_excess,
        tolerance=PROPERTY_TOL,
        seed=seed,
        fingerprint=fingerprint,
    )


def bound_inputs(model: SystemModel) -> BoundInputs:
    """Scalars entering the error-variance limits; schedule-independent."""
    model.require_validated()
    prior = build_prior_information(model)
    sigma_w_inv = float(prior.main_diagonal().max())
    if model.sensor_count:
        sigma_v_inv = max(
            1.0 / float(np.linalg.eigvalsh(sensor.V)[0]) for sensor in model.sensors
        )
        stacked = np.vstack([sensor.C for sensor in model.sensors])
        c_norm_sq = spectral_norm(stacked) ** 2
    else:
        sigma_v_inv = 0.0
        c_norm_sq = 0.0
    return BoundInputs(
        sigma_w_inv=sigma_w_inv,
        sigma_v_inv=sigma_v_inv,
        c_norm_sq=c_norm_sq,
        r_max=max(model.budgets),
        state_dim=model.state_dim,
        horizon=model.horizon,
    )


def error_lower_bound(model: SystemModel) -> float:
    """Lower bound on the total error variance of any feasible schedule."""
    b = bound_inputs(model)
    return b.state_dim / (b.sigma_v_inv * b.r_max * b.c_norm_sq + b.sigma_w_inv / b.horizon)


def min_sensors_for_error(model: SystemModel, alpha: float) -> float:
    """Least per-time sensor count compatible with total error variance alpha.

    May be nonpositive (the constraint is vacuous); returned as-is.
    """
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha!r}")
    b = bound_inputs(model)
    numerator = b.state_dim / alpha - b.sigma_w_inv / b.horizon
    denominator = b.sigma_v_inv * b.c_norm_sq
    if denominator == 0.0:
        return -math.inf if numerator <= 0 else math.inf
    return numerator / denominator


def ellipsoid_log_volume(logdet_sigma: float, epsilon: float, dim: int) -> float:
    """Log volume of the confidence ellipsoid {x : x.T Sigma x <= eps}.

    (dim/2) ln(eps pi) - ln Gamma(dim/2 + 1) + logdet_sigma / 2; the caller
    supplies eps (a chi-squared quantile of the confidence level).
    """
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon!r}")
    if isinstance(dim, bool) or not isinstance(dim, (int, np.integer)) or dim < 1:
        raise InvalidArgument(f"dim must be a positive integer, got {dim!r}")
    return 0.5 * dim * math.log(epsilon * math.pi) - math.lgamma(0.5 * dim + 1.0) + 0.5 * logdet_sigma
