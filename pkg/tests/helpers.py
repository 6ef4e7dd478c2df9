"""Shared test utilities: deterministic scenario streams and dense oracles."""

from __future__ import annotations

import numpy as np
from scipy.linalg import block_diag

import batchsched as bs

ALL_KINDS = tuple(bs.ModelKind)


def scenario_stream(count, seed0=0, n_max=3, m_max=4, k_max=3, r_max=2, kinds=ALL_KINDS):
    """Deterministic list of small random models with mixed dimensions."""
    rng = np.random.default_rng(seed0)
    models = []
    for idx in range(count):
        n = int(rng.integers(1, n_max + 1))
        m = int(rng.integers(1, m_max + 1))
        k = int(rng.integers(1, k_max + 1))
        r = int(rng.integers(1, min(r_max, m) + 1))
        kind = kinds[idx % len(kinds)]
        models.append(
            bs.random_scenario(seed=seed0 * 100_003 + idx, n=n, m=m, K=k, r=r, kind=kind)
        )
    return models


def dense_logdet(matrix):
    """Positive-definite log-determinant through numpy's slogdet."""
    sign, value = np.linalg.slogdet(matrix)
    assert sign > 0, "matrix is not positive definite"
    return float(value)


def measurement_form_covariance(model, schedule):
    """Batch error covariance assembled literally from stacked selection matrices.

    Builds O = S_{1:K} C_{1:K} with per-time selection matrices S(t_k), then
    Sigma = Cx - Cx O.T (O Cx O.T + S Cv S.T)^-1 O Cx with Cx the dense prior
    covariance and Cv the stacked sensor noise covariance.
    """
    n = model.state_dim
    horizon = model.horizon
    dims = [s.C.shape[0] for s in model.sensors]
    offsets = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    total = int(offsets[-1])

    stacked_c = (
        np.vstack([s.C for s in model.sensors]) if model.sensors else np.zeros((0, n))
    )
    stacked_v = (
        block_diag(*[s.V for s in model.sensors]) if model.sensors else np.zeros((0, 0))
    )

    selection_blocks = []
    for slot in schedule.selections:
        rows = sum(dims[i] for i in slot)
        sel = np.zeros((rows, total))
        row = 0
        for i in slot:
            sel[row:row + dims[i], offsets[i]:offsets[i] + dims[i]] = np.eye(dims[i])
            row += dims[i]
        selection_blocks.append(sel)
    selection = block_diag(*selection_blocks) if selection_blocks else np.zeros((0, 0))
    if selection.size == 0:
        selection = selection.reshape(0, total * horizon)

    cov_x = bs.dense_prior_covariance(model)
    c_full = np.kron(np.eye(horizon), stacked_c)
    v_full = np.kron(np.eye(horizon), stacked_v)
    observed = selection @ c_full
    mid = observed @ cov_x @ observed.T + selection @ v_full @ selection.T
    if mid.shape[0] == 0:
        return cov_x.copy()
    return cov_x - cov_x @ observed.T @ np.linalg.inv(mid) @ observed @ cov_x


def random_feasible_schedule(rng, model):
    """Uniform slot sizes in [0, r_k], then a uniform subset of that size."""
    slots = []
    for r in model.budgets:
        size = int(rng.integers(0, r + 1))
        if size:
            picked = rng.choice(model.sensor_count, size=size, replace=False)
            slots.append(tuple(sorted(int(i) for i in picked)))
        else:
            slots.append(())
    return bs.Schedule(selections=tuple(slots))


def random_block_tridiagonal_pd(rng, block_dim, block_count):
    """Random symmetric positive-definite matrix with block tri-diagonal sparsity."""
    diag = [rng.standard_normal((block_dim, block_dim)) for _ in range(block_count)]
    diag = [0.5 * (b + b.T) for b in diag]
    upper = [rng.standard_normal((block_dim, block_dim)) for _ in range(block_count - 1)]
    candidate = bs.BlockTridiagonal.from_blocks(diag, upper)
    dense = candidate.to_dense()
    smallest = float(np.linalg.eigvalsh(dense)[0])
    shift = abs(smallest) + 0.5
    shifted = [b + shift * np.eye(block_dim) for b in candidate.diag]
    return bs.BlockTridiagonal.from_blocks(shifted, upper)
