"""Objective evaluation in information form.

The quantity being minimized is the log-determinant of the batch
estimation-error covariance. Its inverse is the prior information matrix
plus, per scheduled sensor, a block-diagonal increment, so every evaluation
runs in one forward pass over the block tri-diagonal structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from ._linalg import chol_pd, chol_solve, sym
from .caps import dense_cap
from .errors import InvalidArgument, OracleCapExceeded, SensorAlreadySelected
from .model import Schedule, SystemModel
from .prior import BlockTridiagonal, build_prior_information


@dataclass(frozen=True, eq=False)
class SensorInfoBlock:
    """Information added by one sensor at one time: C.T V^-1 C (n x n, PSD)."""

    sensor: int
    info: np.ndarray


@dataclass(frozen=True, eq=False)
class ObjectiveEvaluator:
    """Immutable per-model cache: prior information plus per-sensor increments.

    Built once per model and shared by every schedule evaluation; safe to use
    from concurrent workers.
    """

    prior: BlockTridiagonal
    sensor_info: tuple[SensorInfoBlock, ...]
    prior_logdet: float

    @property
    def state_dim(self) -> int:
        return self.prior.block_dim

    @property
    def horizon(self) -> int:
        return self.prior.block_count

    @property
    def sensor_count(self) -> int:
        return len(self.sensor_info)


def build_evaluator(model: SystemModel) -> ObjectiveEvaluator:
    """Compute the prior information once, plus every sensor's increment."""
    model.require_validated()
    prior = build_prior_information(model)
    blocks = []
    for i, sensor in enumerate(model.sensors):
        lower = chol_pd(sensor.V, f"V_{i + 1}")
        white = solve_triangular(lower, sensor.C, lower=True)
        info = sym(white.T @ white)
        info.setflags(write=False)
        blocks.append(SensorInfoBlock(sensor=i, info=info))
    return ObjectiveEvaluator(
        prior=prior,
        sensor_info=tuple(blocks),
        prior_logdet=block_tridiag_logdet(prior),
    )


def assemble_information(ev: ObjectiveEvaluator, schedule: Schedule) -> BlockTridiagonal:
    """Prior information plus the increments of every scheduled sensor."""
    if len(schedule) != ev.horizon:
        raise InvalidArgument(
            f"schedule has {len(schedule)} slots, evaluator expects {ev.horizon}"
        )
    diag = []
    for k, slot in enumerate(schedule.selections):
        block = ev.prior.diag[k]
        if slot:
            total = block.copy()
            for i in slot:
                if not 0 <= i < ev.sensor_count:
                    raise InvalidArgument(f"sensor index {i} out of range at time index {k}")
                total += ev.sensor_info[i].info
            block = sym(total)
            block.setflags(write=False)
        diag.append(block)
    return BlockTridiagonal(diag=tuple(diag), upper=ev.prior.upper)


def block_tridiag_logdet(j: BlockTridiagonal) -> float:
    """Log-determinant of a positive-definite block tri-diagonal matrix.

    Forward block Schur recursion: D_1 = diag_1 and
    D_k = diag_k - upper_{k-1}.T D_{k-1}^-1 upper_{k-1}; the log determinant
    is the sum of the D_k log determinants, each read off a Cholesky factor.
    Single pass, K block operations.
    """
    total = 0.0
    d = j.diag[0]
    for k in range(j.block_count):
        lower = chol_pd(d, f"D_{k + 1}")
        total += 2.0 * float(np.sum(np.log(np.diagonal(lower))))
        if k + 1 < j.block_count:
            u = j.upper[k]
            d = sym(j.diag[k + 1] - u.T @ chol_solve(lower, u))
    return total


def objective_logdet(ev: ObjectiveEvaluator, schedule: Schedule) -> float:
    """Log-determinant of the batch error covariance under ``schedule``."""
    return -block_tridiag_logdet(assemble_information(ev, schedule))


def marginal_gain(ev: ObjectiveEvaluator, schedule: Schedule, k: int, i: int) -> float:
    """Objective decrease from adding sensor i at time index k.

    Nonnegative up to roundoff: activating a sensor never hurts. Computed as
    two full evaluations; at the sizes this library targets that is cheaper
    to trust than a low-rank update.
    """
    if not 0 <= k < ev.horizon:
        raise InvalidArgument(f"time index {k} out of range for horizon {ev.horizon}")
    if not 0 <= i < ev.sensor_count:
        raise InvalidArgument(f"sensor index {i} out of range")
    if schedule.contains(k, i):
        raise SensorAlreadySelected(f"sensor {i} already selected at time index {k}")
    base = objective_logdet(ev, schedule)
    return base - objective_logdet(ev, schedule.with_added(k, i))


def batch_error_trace(ev: ObjectiveEvaluator, schedule: Schedule, cap: int | None = None) -> float:
    """Trace of the batch error covariance, i.e. the total error variance.

    Densifies the information matrix, so it is gated by the dense cap; the
    trace of the inverse comes from triangular solves against the identity.
    """
    size = ev.state_dim * ev.horizon
    limit = dense_cap(cap)
    if size > limit:
        raise OracleCapExceeded(f"n*K = {size} exceeds dense cap {limit}")
    dense = assemble_information(ev, schedule).to_dense()
    lower = chol_pd(dense, "information")
    inv_lower = solve_triangular(lower, np.eye(size), lower=True)
    return float(np.sum(inv_lower * inv_lower))
