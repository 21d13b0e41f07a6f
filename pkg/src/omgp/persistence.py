"""JSON serialization of fitted models."""
import json

import numpy as np

from .data import DataSet
from .errors import DataError
from .inference import OmgpConfig, OmgpModel, m_step_posterior

MODEL_SCHEMA = 1


def model_to_dict(model):
    """Everything needed to rebuild ``model``; the posterior is recomputed on load."""
    return {
        "schema": MODEL_SCHEMA,
        "config": model.config.to_dict(),
        "inputs": model.data.inputs.tolist(),
        "centered_outputs": model.data.outputs.tolist(),
        "output_mean": model.output_mean.tolist(),
        "responsibilities": model.responsibilities.tolist(),
        "bound_trace": [[int(r), float(v)] for r, v in model.bound_trace],
        "vb_trace": [[float(v) for v in trace] for trace in model.vb_trace],
        "converged": bool(model.converged),
    }


def model_from_dict(d):
    if d.get("schema") != MODEL_SCHEMA:
        raise DataError(f"unsupported model schema {d.get('schema')!r} (expected {MODEL_SCHEMA})")
    try:
        config = OmgpConfig.from_dict(d["config"])
        data = DataSet(np.asarray(d["inputs"], dtype=float),
                       np.asarray(d["centered_outputs"], dtype=float))
        resp = np.asarray(d["responsibilities"], dtype=float).reshape(data.n, -1)
        mean = np.asarray(d["output_mean"], dtype=float)
    except KeyError as exc:
        raise DataError(f"model file lacks field {exc}") from None
    post = m_step_posterior(data, resp, config)
    return OmgpModel(config, data, mean, resp, post,
                     [(int(r), float(v)) for r, v in d.get("bound_trace", [])],
                     [list(t) for t in d.get("vb_trace", [])],
                     bool(d.get("converged", False)))


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read model {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc.msg}, line {exc.lineno})") from None
    return model_from_dict(d)
