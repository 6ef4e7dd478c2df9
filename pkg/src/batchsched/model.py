"""System, sensor bank, horizon, and schedule definitions.

Single source of truth for every other module: a validated SystemModel is
immutable, serializes to a JSON scenario file, and can be generated
pseudo-randomly for tests and benchmarks.

Indexing conventions: sensor indices and time indices are 0-based
everywhere in code and in JSON. Diagnostics name matrices in the
conventional 1-based mathematical style (the first sensor's noise
covariance is "V_1").
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Sequence

import numpy as np

from ._linalg import chol_pd
from .errors import (
    BudgetOutOfRange,
    DimensionMismatch,
    InvalidArgument,
    NonIncreasingTimes,
    NotPositiveDefinite,
    SensorAlreadySelected,
)

SCENARIO_KEYS = (
    "kind",
    "state_dim",
    "dynamics",
    "noise_input",
    "process_noise_cov",
    "initial_state_cov",
    "measurement_times",
    "sensors",
    "budgets",
)
# Accepted for fidelity to the full system description; never used by any
# covariance computation (known inputs shift the estimate mean only).
OPTIONAL_SCENARIO_KEYS = ("input_matrix", "input_signal")


class ModelKind(str, Enum):
    """Dynamics flavor: continuous vs discrete, time-invariant vs per-interval."""

    CONTINUOUS_INVARIANT = "continuous-invariant"
    CONTINUOUS_VARIANT = "continuous-variant"
    DISCRETE_INVARIANT = "discrete-invariant"
    DISCRETE_VARIANT = "discrete-variant"

    @property
    def continuous(self) -> bool:
        return self in (ModelKind.CONTINUOUS_INVARIANT, ModelKind.CONTINUOUS_VARIANT)

    @property
    def variant(self) -> bool:
        return self in (ModelKind.CONTINUOUS_VARIANT, ModelKind.DISCRETE_VARIANT)


@dataclass(frozen=True, eq=False)
class Sensor:
    """One linear sensor: measurement matrix C (d x n), noise covariance V (d x d)."""

    C: np.ndarray
    V: np.ndarray


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Dynamical system, sensor bank, measurement grid, and per-time budgets.

    ``dynamics``, ``noise_input`` and ``process_noise_cov`` hold one matrix
    for time-invariant kinds and one matrix per inter-measurement interval
    (K-1 of them) for time-variant kinds. Pass them to ``validate_model``
    before using the model anywhere else; validated models are immutable and
    safe to share across workers.
    """

    kind: ModelKind
    state_dim: int
    dynamics: tuple[np.ndarray, ...]
    noise_input: tuple[np.ndarray, ...]
    process_noise_cov: tuple[np.ndarray, ...]
    initial_state_cov: np.ndarray
    measurement_times: tuple[float, ...]
    sensors: tuple[Sensor, ...]
    budgets: tuple[int, ...]
    input_matrix: np.ndarray | None = None
    input_signal: Any = None

    @property
    def horizon(self) -> int:
        return len(self.measurement_times)

    @property
    def sensor_count(self) -> int:
        return len(self.sensors)

    @property
    def is_validated(self) -> bool:
        return bool(getattr(self, "_validated", False))

    def require_validated(self) -> None:
        if not self.is_validated:
            raise InvalidArgument("model must pass validate_model before use")

    def interval_dynamics(self, j: int) -> np.ndarray:
        """Dynamics matrix governing interval j (0-based, j < K-1)."""
        return self.dynamics[j] if self.kind.variant else self.dynamics[0]

    def interval_noise_input(self, j: int) -> np.ndarray:
        return self.noise_input[j] if self.kind.variant else self.noise_input[0]

    def interval_process_noise(self, j: int) -> np.ndarray:
        return self.process_noise_cov[j] if self.kind.variant else self.process_noise_cov[0]

    def interval_length(self, j: int) -> float:
        return self.measurement_times[j + 1] - self.measurement_times[j]


@dataclass(frozen=True)
class Schedule:
    """Selected sensor index sets per measurement time, as sorted tuples."""

    selections: tuple[tuple[int, ...], ...]

    @classmethod
    def empty(cls, horizon: int) -> "Schedule":
        return cls(tuple(() for _ in range(horizon)))

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]]) -> "Schedule":
        return cls(tuple(tuple(sorted({int(i) for i in s})) for s in sets))

    def __len__(self) -> int:
        return len(self.selections)

    def contains(self, k: int, i: int) -> bool:
        return i in self.selections[k]

    def with_added(self, k: int, i: int) -> "Schedule":
        slot = self.selections[k]
        if i in slot:
            raise SensorAlreadySelected(f"sensor {i} already selected at time index {k}")
        new_slot = tuple(sorted(slot + (i,)))
        return Schedule(self.selections[:k] + (new_slot,) + self.selections[k + 1:])

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.selections)

    def total_selected(self) -> int:
        return sum(len(s) for s in self.selections)

    def is_subschedule_of(self, other: "Schedule") -> bool:
        if len(self) != len(other):
            return False
        return all(set(a) <= set(b) for a, b in zip(self.selections, other.selections))

    def to_lists(self) -> list[list[int]]:
        return [list(s) for s in self.selections]

    def validate_for(self, model: SystemModel) -> "Schedule":
        if len(self.selections) != model.horizon:
            raise InvalidArgument(
                f"schedule has {len(self.selections)} slots, model expects {model.horizon}"
            )
        for k, slot in enumerate(self.selections):
            for i in slot:
                if not 0 <= i < model.sensor_count:
                    raise InvalidArgument(f"sensor index {i} out of range at time index {k}")
            if len(slot) > model.budgets[k]:
                raise BudgetOutOfRange(
                    f"time index {k} selects {len(slot)} sensors, budget is {model.budgets[k]}"
                )
        return self


def _is_sequence(value: Any) -> bool:
    return isinstance(value, (list, tuple, np.ndarray))


def _as_matrix(value: Any, name: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise DimensionMismatch(f"{name} is not a numeric matrix") from None
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} must contain only finite entries")
    return arr


def _as_matrix_seq(value: Any, name: str) -> list[np.ndarray]:
    """Accept a single matrix, a 3-D array, or a sequence of matrices."""
    if isinstance(value, np.ndarray):
        if value.ndim == 2:
            return [_as_matrix(value, name)]
        if value.ndim == 3:
            return [_as_matrix(m, f"{name}[{j}]") for j, m in enumerate(value)]
        raise DimensionMismatch(f"{name} must be a matrix or a list of matrices")
    if _is_sequence(value):
        if len(value) == 0:
            return []
        head = value[0]
        if _is_sequence(head) and len(head) > 0 and _is_sequence(head[0]):
            return [_as_matrix(m, f"{name}[{j}]") for j, m in enumerate(value)]
        return [_as_matrix(value, name)]
    raise DimensionMismatch(f"{name} must be a matrix or a list of matrices")


def _interval_field(value: Any, kind: ModelKind, horizon: int, name: str) -> tuple[np.ndarray, ...]:
    mats = _as_matrix_seq(value, name)
    if kind.variant:
        expected = horizon - 1
        if len(mats) != expected:
            raise DimensionMismatch(
                f"{name} must list {expected} per-interval matrices for a time-variant model, got {len(mats)}"
            )
    else:
        if len(mats) != 1:
            raise DimensionMismatch(f"{name} must be a single matrix for a time-invariant model")
    return tuple(mats)


def _interval_label(base: str, j: int, variant: bool) -> str:
    return f"{base}_{j + 1}" if variant else base


def _as_sensor(obj: Any, index: int) -> Sensor:
    if isinstance(obj, Sensor):
        c_raw, v_raw = obj.C, obj.V
    elif isinstance(obj, dict):
        if set(obj) != {"C", "V"}:
            raise DimensionMismatch(f"sensors[{index}] must have exactly the keys C and V")
        c_raw, v_raw = obj["C"], obj["V"]
    elif _is_sequence(obj) and len(obj) == 2:
        c_raw, v_raw = obj
    else:
        raise DimensionMismatch(f"sensors[{index}] must be a Sensor, a {{C, V}} mapping, or a (C, V) pair")
    c = _as_matrix(c_raw, f"C_{index + 1}")
    v = _as_matrix(v_raw, f"V_{index + 1}")
    return Sensor(C=c, V=v)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _check_spd(matrix: np.ndarray, name: str) -> None:
    # Cholesky only reads the lower triangle, so symmetry needs its own check.
    scale = max(1.0, float(np.abs(matrix).max()))
    if float(np.abs(matrix - matrix.T).max()) > 1e-9 * scale:
        raise NotPositiveDefinite(f"{name} must be symmetric")
    chol_pd(matrix, name)


def validate_model(model: SystemModel) -> SystemModel:
    """Check every model invariant and return an immutable, normalized copy.

    Raises DimensionMismatch, NotPositiveDefinite, NonIncreasingTimes, or
    BudgetOutOfRange with a message naming the offending field.
    """
    try:
        kind = ModelKind(model.kind)
    except ValueError:
        raise InvalidArgument(
            f"kind must be one of {[k.value for k in ModelKind]}, got {model.kind!r}"
        ) from None

    n = model.state_dim
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DimensionMismatch("state_dim must be a positive integer")
    n = int(n)

    times_raw = model.measurement_times
    if not _is_sequence(times_raw) or len(times_raw) < 1:
        raise DimensionMismatch("measurement_times must be a non-empty list")
    times = []
    for t in times_raw:
        tf = float(t)
        if not np.isfinite(tf):
            raise DimensionMismatch("measurement_times must contain only finite values")
        times.append(tf)
    for a, b in zip(times, times[1:]):
        if not b > a:
            raise NonIncreasingTimes(f"measurement_times must be strictly increasing ({a} then {b})")
    horizon = len(times)

    dynamics = _interval_field(model.dynamics, kind, horizon, "dynamics")
    noise_input = _interval_field(model.noise_input, kind, horizon, "noise_input")
    process = _interval_field(model.process_noise_cov, kind, horizon, "process_noise_cov")
    if len(noise_input) != len(dynamics) or len(process) != len(dynamics):
        raise DimensionMismatch("dynamics, noise_input, and process_noise_cov must align per interval")

    for j, (a, f, w) in enumerate(zip(dynamics, noise_input, process)):
        a_name = _interval_label("A", j, kind.variant)
        f_name = _interval_label("F", j, kind.variant)
        w_name = _interval_label("W", j, kind.variant)
        if a.shape != (n, n):
            raise DimensionMismatch(f"{a_name} must be {n}x{n}, got {a.shape[0]}x{a.shape[1]}")
        if f.shape[0] != n:
            raise DimensionMismatch(f"{f_name} must have {n} rows, got {f.shape[0]}")
        p = f.shape[1]
        if w.shape != (p, p):
            raise DimensionMismatch(f"{w_name} must be {p}x{p} to match {f_name}, got {w.shape[0]}x{w.shape[1]}")
        _check_spd(w, w_name)

    p1 = _as_matrix(model.initial_state_cov, "P_1")
    if p1.shape != (n, n):
        raise DimensionMismatch(f"P_1 must be {n}x{n}, got {p1.shape[0]}x{p1.shape[1]}")
    _check_spd(p1, "P_1")

    if not _is_sequence(model.sensors):
        raise DimensionMismatch("sensors must be a list")
    sensors = []
    for idx, raw in enumerate(model.sensors):
        sensor = _as_sensor(raw, idx)
        if sensor.C.shape[1] != n:
            raise DimensionMismatch(f"C_{idx + 1} must have {n} columns, got {sensor.C.shape[1]}")
        d = sensor.C.shape[0]
        if sensor.V.shape != (d, d):
            raise DimensionMismatch(f"V_{idx + 1} must be {d}x{d} to match C_{idx + 1}")
        _check_spd(sensor.V, f"V_{idx + 1}")
        sensors.append(Sensor(C=_freeze(sensor.C), V=_freeze(sensor.V)))
    m = len(sensors)

    budgets_raw = model.budgets
    if not _is_sequence(budgets_raw) or len(budgets_raw) != horizon:
        raise DimensionMismatch(f"budgets must be a list of {horizon} integers")
    budgets = []
    for k, r in enumerate(budgets_raw):
        if isinstance(r, bool) or not isinstance(r, (int, np.integer)):
            raise DimensionMismatch(f"budgets[{k}] must be an integer")
        r = int(r)
        if not 0 <= r <= m:
            raise BudgetOutOfRange(f"budgets[{k}] = {r} outside [0, {m}]")
        budgets.append(r)

    input_matrix = None
    if model.input_matrix is not None:
        input_matrix = _as_matrix(model.input_matrix, "input_matrix")
        if input_matrix.shape[0] != n:
            raise DimensionMismatch(f"input_matrix must have {n} rows, got {input_matrix.shape[0]}")
        input_matrix = _freeze(input_matrix)

    validated = SystemModel(
        kind=kind,
        state_dim=n,
        dynamics=tuple(_freeze(a) for a in dynamics),
        noise_input=tuple(_freeze(f) for f in noise_input),
        process_noise_cov=tuple(_freeze(w) for w in process),
        initial_state_cov=_freeze(p1),
        measurement_times=tuple(times),
        sensors=tuple(sensors),
        budgets=tuple(budgets),
        input_matrix=input_matrix,
        input_signal=model.input_signal,
    )
    object.__setattr__(validated, "_validated", True)
    return validated


def _random_spd(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d))
    return g @ g.T + 0.1 * np.eye(d)


def _random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q


def _random_dynamics(rng: np.random.Generator, n: int, kind: ModelKind) -> np.ndarray:
    g = rng.standard_normal((n, n))
    eig = np.linalg.eigvals(g)
    if kind.continuous:
        shift = float(eig.real.max()) - 0.2
        if shift > 0.0:
            g = g - shift * np.eye(n)
    else:
        radius = float(np.abs(eig).max())
        if radius > 1.2:
            g = g * (1.2 / radius)
    return g


def random_scenario(
    seed: int,
    n: int,
    m: int,
    K: int,
    r: int,
    kind: ModelKind | str = ModelKind.DISCRETE_INVARIANT,
) -> SystemModel:
    """Deterministic random model: a pure function of the arguments.

    Dynamics are scaled to spectral radius at most 1.2 (discrete) or shifted
    to eigenvalue real parts at most 0.2 (continuous); every covariance is
    G G.T + 0.1 I with G standard normal, so positive definiteness holds by
    construction; each sensor reads a random 1- or 2-dimensional linear
    functional of the state.
    """
    try:
        kind = ModelKind(kind)
    except ValueError:
        raise InvalidArgument(
            f"kind must be one of {[k.value for k in ModelKind]}, got {kind!r}"
        ) from None
    for label, value in (("n", n), ("m", m), ("K", K)):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
            raise InvalidArgument(f"{label} must be a positive integer, got {value!r}")
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)) or not 0 <= r <= m:
        raise InvalidArgument(f"r must be an integer in [0, {m}], got {r!r}")

    rng = np.random.default_rng(seed)
    intervals = (K - 1) if kind.variant else 1
    dynamics = [_random_dynamics(rng, n, kind) for _ in range(intervals)]
    noise_input = [_random_orthogonal(rng, n) for _ in range(intervals)]
    process = [_random_spd(rng, n) for _ in range(intervals)]
    initial = _random_spd(rng, n)
    if kind.continuous:
        gaps = rng.uniform(0.2, 1.0, size=max(K - 1, 0))
        times = [0.0]
        for gap in gaps:
            times.append(times[-1] + float(gap))
    else:
        times = [float(k + 1) for k in range(K)]
    sensors = []
    for _ in range(m):
        d = int(rng.integers(1, 3))
        sensors.append(Sensor(C=rng.standard_normal((d, n)), V=_random_spd(rng, d)))

    model = SystemModel(
        kind=kind,
        state_dim=int(n),
        dynamics=tuple(dynamics),
        noise_input=tuple(noise_input),
        process_noise_cov=tuple(process),
        initial_state_cov=initial,
        measurement_times=tuple(times),
        sensors=tuple(sensors),
        budgets=tuple(int(r) for _ in range(K)),
    )
    return validate_model(model)


def _matrix_to_lists(arr: np.ndarray) -> list[list[float]]:
    return [[float(x) for x in row] for row in arr]


def _interval_field_to_json(mats: Sequence[np.ndarray], variant: bool):
    if variant:
        return [_matrix_to_lists(m) for m in mats]
    return _matrix_to_lists(mats[0])


def model_to_dict(model: SystemModel) -> dict:
    """Scenario-file representation; inverse of model_from_dict."""
    kind = ModelKind(model.kind)
    data: dict[str, Any] = {
        "kind": kind.value,
        "state_dim": int(model.state_dim),
        "dynamics": _interval_field_to_json(model.dynamics, kind.variant),
        "noise_input": _interval_field_to_json(model.noise_input, kind.variant),
        "process_noise_cov": _interval_field_to_json(model.process_noise_cov, kind.variant),
        "initial_state_cov": _matrix_to_lists(model.initial_state_cov),
        "measurement_times": [float(t) for t in model.measurement_times],
        "sensors": [{"C": _matrix_to_lists(s.C), "V": _matrix_to_lists(s.V)} for s in model.sensors],
        "budgets": [int(r) for r in model.budgets],
    }
    if model.input_matrix is not None:
        data["input_matrix"] = _matrix_to_lists(model.input_matrix)
    if model.input_signal is not None:
        data["input_signal"] = model.input_signal
    return data


def model_from_dict(data: dict) -> SystemModel:
    """Build and validate a model from a scenario dictionary.

    Rejection messages name the offending JSON path, e.g. "sensors[0].V".
    """
    if not isinstance(data, dict):
        raise InvalidArgument("scenario must be a JSON object")
    allowed = set(SCENARIO_KEYS) | set(OPTIONAL_SCENARIO_KEYS)
    for key in data:
        if key not in allowed:
            raise InvalidArgument(f"unexpected key {key!r} in scenario")
    for key in SCENARIO_KEYS:
        if key not in data:
            raise InvalidArgument(f"missing required key {key!r} in scenario")
    if not isinstance(data["sensors"], list):
        raise InvalidArgument("sensors must be a JSON array")
    sensors = []
    for idx, entry in enumerate(data["sensors"]):
        if not isinstance(entry, dict) or set(entry) != {"C", "V"}:
            raise InvalidArgument(f"sensors[{idx}] must be an object with exactly the keys C and V")
        try:
            c = _as_matrix(entry["C"], f"sensors[{idx}].C")
            v = _as_matrix(entry["V"], f"sensors[{idx}].V")
        except DimensionMismatch as exc:
            raise InvalidArgument(str(exc)) from None
        sensors.append(Sensor(C=c, V=v))
    model = SystemModel(
        kind=data["kind"],
        state_dim=data["state_dim"],
        dynamics=data["dynamics"],
        noise_input=data["noise_input"],
        process_noise_cov=data["process_noise_cov"],
        initial_state_cov=data["initial_state_cov"],
        measurement_times=data["measurement_times"],
        sensors=tuple(sensors),
        budgets=data["budgets"],
        input_matrix=data.get("input_matrix"),
        input_signal=data.get("input_signal"),
    )
    return validate_model(model)


def model_fingerprint(model: SystemModel) -> str:
    """SHA-256 of the canonical scenario serialization."""
    canonical = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _reject_constant(token: str):
    raise InvalidArgument(f"non-finite number {token!r} in scenario file")


def load_scenario(path: str) -> SystemModel:
    """Read, parse, and validate a scenario JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"invalid JSON in scenario file: {exc}") from None
    return model_from_dict(data)


def write_text_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".batchsched-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def save_scenario(model: SystemModel, path: str) -> None:
    write_text_atomic(path, json.dumps(model_to_dict(model), indent=2) + "\n")
