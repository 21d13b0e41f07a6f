"""Seeded synthetic scenarios, CSV ingestion and ground-truth bookkeeping.

All generators draw from a Philox counter-based generator keyed by the
integer seed, so a (generator, arguments, seed) triple always produces
byte-identical data.
"""
import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .data import DataSet
from .errors import DataError

SCHEMA_VERSION = 1

#: initial states [X, Y, Z, Vx, Vy, Vz] of the three missile-to-air sources
MISSILE_INITIAL_STATES = (
    (6500.0, -1000.0, 2000.0, -50.0, 100.0, 0.0),
    (5050.0, -450.0, 2000.0, 100.0, 50.0, 0.0),
    (8000.0, 500.0, 2000.0, -100.0, 0.0, 0.0),
)


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass
class Scenario:
    name: str
    inputs: np.ndarray
    outputs: np.ndarray
    true_labels: np.ndarray = None
    noiseless_outputs: np.ndarray = None
    rng_seed: int = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float).T).T
        self.outputs = np.atleast_2d(np.asarray(self.outputs, dtype=float).T).T
        if self.true_labels is not None:
            self.true_labels = np.asarray(self.true_labels, dtype=int)
            if np.any(self.true_labels < 0):
                raise DataError("labels must be non-negative")
        if self.noiseless_outputs is not None:
            self.noiseless_outputs = np.asarray(self.noiseless_outputs, dtype=float).reshape(
                self.outputs.shape)

    @property
    def n(self):
        return self.inputs.shape[0]

    @property
    def num_sources(self):
        if self.true_labels is None:
            return None
        return int(self.true_labels.max()) + 1 if self.true_labels.size else 0

    @property
    def dataset(self):
        return DataSet(self.inputs, self.outputs, self.true_labels)

    def subset(self, mask):
        return Scenario(
            self.name, self.inputs[mask], self.outputs[mask],
            None if self.true_labels is None else self.true_labels[mask],
            None if self.noiseless_outputs is None else self.noiseless_outputs[mask],
            self.rng_seed, dict(self.params))


def gen_circles(num_revolutions=1.0, samples=50, noise_std=0.05, seed=0, radius=1.0):
    """Two sources on one circle turning in opposite directions.

    ``samples`` observations per source, one of each per time instant,
    interleaved as source 0, source 1, source 0, ...  Both start at angle
    zero, so they meet at angles 0 and pi: twice per revolution.
    """
    if samples < 4:
        raise ValueError("gen_circles needs samples >= 4")
    rng = make_rng(seed)
    t = num_revolutions * np.arange(samples) / samples
    angle = 2.0 * np.pi * t
    clean = np.empty((2 * samples, 2))
    clean[0::2] = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
    clean[1::2] = np.column_stack([radius * np.cos(angle), -radius * np.sin(angle)])
    outputs = clean + noise_std * rng.standard_normal(clean.shape)
    return Scenario("circles", np.repeat(t, 2)[:, None], outputs,
                    np.tile([0, 1], samples), clean, seed,
                    {"num_revolutions": num_revolutions, "samples": samples,
                     "noise_std": noise_std, "radius": radius})


@dataclass
class StateSpaceParams:
    """Constant-velocity dynamics observed in range / azimuth / elevation.

    The sampling interval and noise covariances are free choices (defaults
    give a 50 m range error and 5 mrad angular errors).
    """

    sampling_interval: float = 1.0
    process_noise: np.ndarray = field(default_factory=lambda: 0.1 * np.eye(3))
    measurement_noise: np.ndarray = field(
        default_factory=lambda: np.diag([50.0**2, 0.005**2, 0.005**2]))
    initial_states: tuple = MISSILE_INITIAL_STATES
    num_steps: int = 30

    def __post_init__(self):
        self.process_noise = np.asarray(self.process_noise, dtype=float)
        self.measurement_noise = np.asarray(self.measurement_noise, dtype=float)
        if not self.sampling_interval > 0:
            raise ValueError("sampling_interval must be positive")
        for name in ("process_noise", "measurement_noise"):
            C = getattr(self, name)
            if C.shape != (3, 3) or not np.allclose(C, C.T):
                raise ValueError(f"{name} must be a symmetric 3x3 matrix")
            if np.min(np.linalg.eigvalsh(C)) < -1e-12 * max(1.0, np.trace(C)):
                raise ValueError(f"{name} must be positive semidefinite")
        self.initial_states = tuple(tuple(float(v) for v in s) for s in self.initial_states)
        if any(len(s) != 6 for s in self.initial_states):
            raise ValueError("initial states must be 6-vectors [X, Y, Z, Vx, Vy, Vz]")

    def transition(self):
        T = self.sampling_interval
        F = np.eye(6)
        F[:3, 3:] = T * np.eye(3)
        G = np.vstack([0.5 * T**2 * np.eye(3), T * np.eye(3)])
        return F, G

    def to_dict(self):
        return {"sampling_interval": self.sampling_interval,
                "process_noise": self.process_noise.tolist(),
                "measurement_noise": self.measurement_noise.tolist(),
                "initial_states": [list(s) for s in self.initial_states],
                "num_steps": self.num_steps}


def measure(state):
    """Noiseless (range, azimuth, elevation) of a state [X, Y, Z, ...]."""
    X, Y, Z = state[0], state[1], state[2]
    horizontal = np.hypot(X, Y)
    if horizontal == 0.0:
        raise DataError("azimuth is undefined for a source at X = Y = 0")
    return np.array([np.sqrt(X * X + Y * Y + Z * Z), np.arctan2(Y, X),
                     np.arctan(-Z / horizontal)])


def _psd_sqrt(C):
    w, V = np.linalg.eigh(C)
    return V * np.sqrt(np.clip(w, 0.0, None))


def simulate_states(params, rng):
    """Propagate every source; returns an array (sources, num_steps, 6)."""
    F, G = params.transition()
    q = _psd_sqrt(params.process_noise)
    states = np.empty((len(params.initial_states), params.num_steps, 6))
    for j, s0 in enumerate(params.initial_states):
        s = np.array(s0)
        for t in range(params.num_steps):
            states[j, t] = s
            s = F @ s + G @ (q @ rng.standard_normal(3))
    return states


def gen_missile_to_air(params=None, seed=0):
    """Three constant-velocity air targets seen by one range/angle sensor.

    Observations are time-sorted; within a time step their order is
    shuffled so that it carries no label information.
    """
    params = StateSpaceParams() if params is None else params
    rng = make_rng(seed)
    states = simulate_states(params, rng)
    r = _psd_sqrt(params.measurement_noise)
    n_src, n_steps = states.shape[:2]
    inputs, outputs, labels, clean = [], [], [], []
    for t in range(n_steps):
        order = rng.permutation(n_src)
        for j in order:
            h = measure(states[j, t])
            clean.append(h)
            outputs.append(h + r @ rng.standard_normal(3))
            inputs.append(t * params.sampling_interval)
            labels.append(j)
    sc = Scenario("missile", np.array(inputs)[:, None], np.array(outputs), np.array(labels),
                  np.array(clean), seed, params.to_dict())
    return sc


def gen_sinc_outliers(samples=100, outlier_fraction=0.1, noise_std=0.1, seed=0,
                      x_range=(-10.0, 10.0), outlier_range=(-3.0, 3.0)):
    """Noisy ``sin(x)/x`` with a fraction of samples replaced by uniform outliers.

    Labels are 0 for signal and 1 for outliers.
    """
    rng = make_rng(seed)
    x = np.sort(rng.uniform(x_range[0], x_range[1], samples))
    clean = np.sinc(x / np.pi)
    y = clean + noise_std * rng.standard_normal(samples)
    n_out = int(round(outlier_fraction * samples))
    idx = rng.choice(samples, size=n_out, replace=False)
    y[idx] = rng.uniform(outlier_range[0], outlier_range[1], n_out)
    labels = np.zeros(samples, dtype=int)
    labels[idx] = 1
    return Scenario("sinc", x[:, None], y[:, None], labels, clean[:, None], seed,
                    {"samples": samples, "outlier_fraction": outlier_fraction,
                     "noise_std": noise_std, "x_range": list(x_range),
                     "outlier_range": list(outlier_range)})


def gen_multilevel(num_functions=3, samples=40, noise_std=0.1, seed=0, dropout=0.2,
                   x_range=(0.0, 10.0), spacing=2.0):
    """Snapshots of several smooth curves taken at irregular times.

    ``samples`` is the number of snapshots; each snapshot observes every
    curve independently with probability ``1 - dropout``.  Curve ``j`` is
    ``spacing * (j - (J - 1) / 2) + a_j sin(w_j x + phi_j)``.
    """
    rng = make_rng(seed)
    amp = rng.uniform(0.3, 0.8, num_functions)
    freq = rng.uniform(0.4, 1.2, num_functions)
    phase = rng.uniform(0.0, 2.0 * np.pi, num_functions)
    offset = spacing * (np.arange(num_functions) - 0.5 * (num_functions - 1))
    times = np.sort(rng.uniform(x_range[0], x_range[1], samples))
    keep = rng.uniform(size=(samples, num_functions)) >= dropout
    tt, jj = np.nonzero(keep)
    x = times[tt]
    clean = offset[jj] + amp[jj] * np.sin(freq[jj] * x + phase[jj])
    y = clean + noise_std * rng.standard_normal(x.size)
    return Scenario("multilevel", x[:, None], y[:, None], jj, clean[:, None], seed,
                    {"num_functions": num_functions, "samples": samples,
                     "noise_std": noise_std, "dropout": dropout,
                     "x_range": list(x_range), "spacing": spacing})


GENERATORS = {
    "circles": gen_circles,
    "missile": gen_missile_to_air,
    "sinc": gen_sinc_outliers,
    "multilevel": gen_multilevel,
}


def _fmt(x):
    return repr(float(x))


def save_csv(scenario, path, sidecar=True):
    """Write the scenario as CSV (plus a JSON sidecar with its metadata).

    Columns are ``x1..xP, y1..yD`` followed by ``label`` and ``f1..fD``
    (noiseless outputs) when available.  Values use the shortest
    round-tripping decimal representation.
    """
    P, D = scenario.inputs.shape[1], scenario.outputs.shape[1]
    header = [f"x{i + 1}" for i in range(P)] + [f"y{d + 1}" for d in range(D)]
    if scenario.true_labels is not None:
        header.append("label")
    if scenario.noiseless_outputs is not None:
        header += [f"f{d + 1}" for d in range(D)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(scenario.n):
            row = [_fmt(v) for v in scenario.inputs[i]] + [_fmt(v) for v in scenario.outputs[i]]
            if scenario.true_labels is not None:
                row.append(int(scenario.true_labels[i]))
            if scenario.noiseless_outputs is not None:
                row += [_fmt(v) for v in scenario.noiseless_outputs[i]]
            w.writerow(row)
    if sidecar:
        meta = {"schema": SCHEMA_VERSION, "name": scenario.name, "seed": scenario.rng_seed,
                "params": scenario.params, "input_columns": header[:P],
                "output_columns": header[P:P + D],
                "label_column": "label" if scenario.true_labels is not None else None,
                "noiseless_columns": header[-D:] if scenario.noiseless_outputs is not None else None}
        with open(sidecar_path(path), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def sidecar_path(path):
    return os.path.splitext(path)[0] + ".json"


def _resolve(cols, header, path):
    out = []
    for c in cols:
        if isinstance(c, str) and not c.lstrip("-").isdigit():
            if c not in header:
                raise DataError(f"{path}: no column named {c!r} (have {', '.join(header)})")
            out.append(header.index(c))
        else:
            i = int(c)
            if not 0 <= i < len(header):
                raise DataError(f"{path}: column index {i} out of range (0..{len(header) - 1})")
            out.append(i)
    return out


def load_csv(path, input_cols, output_cols, label_col=None, noiseless_cols=None, name=None):
    """Read a headed CSV into a `Scenario`.

    Columns may be given as 0-based indices or header names.
    """
    if not os.path.exists(path):
        raise DataError(f"data file not found: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    ic = _resolve(input_cols, header, path)
    oc = _resolve(output_cols, header, path)
    lc = None if label_col is None else _resolve([label_col], header, path)[0]
    fc = None if noiseless_cols is None else _resolve(noiseless_cols, header, path)
    X, Y, L, Fv = [], [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            X.append([float(row[i]) for i in ic])
            Y.append([float(row[i]) for i in oc])
            if lc is not None:
                L.append(int(float(row[lc])))
            if fc is not None:
                Fv.append([float(row[i]) for i in fc])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric cell ({exc})") from None
    P, D = len(ic), len(oc)
    return Scenario(name or os.path.splitext(os.path.basename(path))[0],
                    np.array(X, dtype=float).reshape(-1, P), np.array(Y, dtype=float).reshape(-1, D),
                    np.array(L, dtype=int) if lc is not None else None,
                    np.array(Fv, dtype=float).reshape(-1, D) if fc is not None else None)


def load_scenario(path, input_cols=None, output_cols=None, label_col=None):
    """Load a CSV, taking column roles from its JSON sidecar when present.

    Without a sidecar or explicit columns, the first column is the input
    and every other column an output.
    """
    meta = {}
    if os.path.exists(sidecar_path(path)):
        with open(sidecar_path(path)) as fh:
            meta = json.load(fh)
    if input_cols is None and output_cols is None and meta:
        sc = load_csv(path, meta["input_columns"], meta["output_columns"],
                      meta.get("label_column"), meta.get("noiseless_columns"),
                      name=meta.get("name"))
        sc.rng_seed = meta.get("seed")
        sc.params = meta.get("params", {})
        return sc
    if input_cols is None or output_cols is None:
        if not os.path.exists(path):
            raise DataError(f"data file not found: {path}")
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), None)
        if header is None:
            raise DataError(f"{path}: empty file")
        input_cols = [0] if input_cols is None else input_cols
        if output_cols is None:
            taken = set(_resolve(input_cols, header, path))
            if label_col is not None:
                taken |= set(_resolve([label_col], header, path))
            output_cols = [i for i in range(len(header)) if i not in taken]
    return load_csv(path, input_cols, output_cols, label_col)
