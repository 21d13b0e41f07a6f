from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class DataSet:
    """N inputs (N x P), N outputs (N x D) and optional integer labels."""

    inputs: np.ndarray
    outputs: np.ndarray
    labels: np.ndarray = None

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=float)
        Y = np.asarray(self.outputs, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise DimensionError(
                f"inputs {X.shape} and outputs {Y.shape} must be 2-D with equal row counts")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValueError("data contains non-finite values")
        object.__setattr__(self, "inputs", np.ascontiguousarray(X))
        object.__setattr__(self, "outputs", np.ascontiguousarray(Y))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=int)
            if labels.shape != (X.shape[0],):
                raise DimensionError(f"labels must have shape ({X.shape[0]},)")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.inputs.shape[0]

    @property
    def input_dim(self):
        return self.inputs.shape[1]

    @property
    def output_dim(self):
        return self.outputs.shape[1]

    def centered(self):
        """Return (data with per-dimension zero-mean outputs, the subtracted means)."""
        if self.n == 0:
            mean = np.zeros(self.output_dim)
        else:
            mean = self.outputs.mean(axis=0)
        return DataSet(self.inputs, self.outputs - mean, self.labels), mean

    def append(self, other):
        if other.input_dim != self.input_dim or other.output_dim != self.output_dim:
            raise DimensionError(
                f"cannot append data of shape P={other.input_dim}, D={other.output_dim} "
                f"to P={self.input_dim}, D={self.output_dim}")
        labels = None
        if self.labels is not None and other.labels is not None:
            labels = np.concatenate([self.labels, other.labels])
        return DataSet(np.vstack([self.inputs, other.inputs]),
                       np.vstack([self.outputs, other.outputs]), labels)
