"""Permutation-aligned association metrics and a nearest-neighbour baseline."""
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DataError

MAX_PERMUTATION_COMPONENTS = 6


@dataclass
class EvalReport:
    """Association quality of one labeling against ground truth.

    ``aligning_permutation[k]`` is the true source matched to predicted
    label ``k``.  ``rmse`` is per true track, in output units, measured
    against ``rmse_reference`` ("noiseless" or "observed");
    ``rmse_observed`` always compares with the observations.  Both are
    None when no per-sample means were supplied.
    """

    n_err: int
    total: int
    aligning_permutation: list
    rmse: list = None
    rmse_reference: str = None
    wall_time: float = None
    final_bound: float = None
    rmse_observed: list = None

    def to_dict(self):
        return {"n_err": self.n_err, "total": self.total,
                "aligning_permutation": list(self.aligning_permutation),
                "rmse": self.rmse, "rmse_reference": self.rmse_reference,
                "rmse_observed": self.rmse_observed,
                "wall_time": self.wall_time, "final_bound": self.final_bound}


def align_labels(predicted, truth, num_components=None):
    """Best relabeling of ``predicted`` by exhaustive search over permutations.

    Returns (permutation, n_err) where ``permutation[k]`` is the true label
    assigned to predicted label ``k``.
    """
    predicted = np.asarray(predicted, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if predicted.shape != truth.shape:
        raise DataError(f"{predicted.size} predicted labels for {truth.size} samples")
    M = num_components or int(max(predicted.max(initial=0), truth.max(initial=0))) + 1
    if M > MAX_PERMUTATION_COMPONENTS:
        raise DataError(f"permutation search is limited to {MAX_PERMUTATION_COMPONENTS} "
                        f"components, got {M}")
    counts = np.zeros((M, M), dtype=int)
    np.add.at(counts, (predicted, truth), 1)
    best, best_hits = None, -1
    for perm in itertools.permutations(range(M)):
        hits = counts[np.arange(M), perm].sum()
        if hits > best_hits:
            best, best_hits = perm, hits
    return list(best), int(truth.size - best_hits)


def evaluate(predicted_labels, scenario, means=None, num_components=None):
    """Misassignment count and per-track RMSE after optimal label alignment.

    ``means`` (optional) are per-sample posterior means of every component,
    shaped (M, N, D).  The RMSE of true track ``j`` compares the aligned
    component's means at track ``j``'s samples with the noiseless outputs
    when they exist, and separately with the observations.
    """
    if scenario.true_labels is None:
        raise DataError("scenario has no ground-truth labels")
    truth = scenario.true_labels
    M = num_components or max(int(np.max(predicted_labels)), int(truth.max())) + 1
    perm, n_err = align_labels(predicted_labels, truth, M)
    report = EvalReport(n_err, int(truth.size), perm)
    if means is not None:
        means = np.asarray(means, dtype=float)
        if scenario.noiseless_outputs is not None:
            report.rmse = _track_rmse(means, scenario.noiseless_outputs, truth, perm, M)
            report.rmse_reference = "noiseless"
        else:
            report.rmse_reference = "observed"
        report.rmse_observed = _track_rmse(means, scenario.outputs, truth, perm, M)
        if report.rmse is None:
            report.rmse = report.rmse_observed
    return report


def _track_rmse(means, reference, truth, perm, M):
    component_of_track = {t: k for k, t in enumerate(perm)}
    rmse = []
    for j in range(M):
        idx = truth == j
        if not np.any(idx) or j not in component_of_track:
            rmse.append(None)
            continue
        err = means[component_of_track[j]][idx] - reference[idx]
        rmse.append(float(np.sqrt(np.mean(np.sum(err * err, axis=1)))))
    return rmse


def nn_baseline(scenario, num_tracks, scale=None):
    """Greedy nearest-neighbour association, one time step at a time.

    Observations sharing an input value form one time step.  The first
    step assigns its observations to tracks in row order; afterwards the
    closest (observation, track) pair is matched repeatedly, measuring
    distance to each track's last assigned observation.  Observations
    left over once every track is taken join their nearest track.
    ``scale`` divides each output dimension before distances are taken.
    """
    t = scenario.inputs[:, 0]
    Y = scenario.outputs if scale is None else scenario.outputs / np.asarray(scale)
    if np.any(np.diff(t) < 0):
        raise DataError("nn_baseline needs observations sorted by time")
    labels = np.empty(scenario.n, dtype=int)
    steps = np.split(np.arange(scenario.n), np.flatnonzero(np.diff(t) != 0) + 1)
    first = steps[0]
    if first.size < num_tracks:
        raise DataError(f"first time step has {first.size} observations for {num_tracks} tracks")
    last = np.empty((num_tracks, Y.shape[1]))
    for k, i in enumerate(first):
        labels[i] = min(k, num_tracks - 1)
        if k < num_tracks:
            last[k] = Y[i]
    for step in steps[1:]:
        dist = np.linalg.norm(Y[step][:, None, :] - last[None, :, :], axis=2)
        free_obs, free_tracks = set(range(step.size)), set(range(num_tracks))
        updates = {}
        while free_obs and free_tracks:
            obs = sorted(free_obs)
            trk = sorted(free_tracks)
            sub = dist[np.ix_(obs, trk)]
            a, b = np.unravel_index(np.argmin(sub), sub.shape)
            o, k = obs[a], trk[b]
            labels[step[o]] = k
            updates[k] = Y[step[o]]
            free_obs.discard(o)
            free_tracks.discard(k)
        for o in sorted(free_obs):
            labels[step[o]] = int(np.argmin(dist[o]))
        for k, y in updates.items():
            last[k] = y
    return labels
