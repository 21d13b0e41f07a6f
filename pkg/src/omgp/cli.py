"""Command-line interface: ``omgp <command> [options]``.

Commands
--------
simulate   write a seeded synthetic scenario as CSV plus a JSON sidecar
fit        fit a mixture to a CSV using a config file, save the model as JSON
associate  hard labels of a fitted model as CSV
predict    per-component predictions of a fitted model at test inputs
eval       compare labels with the ground truth of a scenario
bench      seeded batch / online / nearest-neighbour comparison

Diagnostics go to standard error; their verbosity follows ``OMGP_LOG``
(``quiet``, ``info`` or ``debug``; default ``quiet``).
"""
import argparse
import csv
import json
import logging
import os
import sys
import time

import numpy as np

from . import config as config_io
from .bench import metrics_json, run_bench, summary_text
from .errors import DataError, OmgpError
from .evaluation import evaluate
from .inference import fit
from .persistence import load_model, save_model
from .prediction import predict, read_labels_csv, write_labels_csv, write_prediction_csv
from .scenarios import GENERATORS, load_scenario, save_csv

log = logging.getLogger("omgp")

LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def _columns(text):
    return None if text is None else [c.strip() for c in text.split(",") if c.strip()]


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def cmd_simulate(args):
    scenario = GENERATORS[args.scenario](seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.scenario}.csv")
    save_csv(scenario, path)
    log.info("wrote %d samples to %s", scenario.n, path)
    print(path)


def cmd_fit(args):
    scenario = load_scenario(args.data, _columns(args.inputs), _columns(args.outputs))
    config = config_io.load(args.config)
    if args.seed is not None:
        config.seed = args.seed
    t0 = time.perf_counter()
    model = fit(scenario.dataset, config)
    log.info("fit %d samples in %.2fs, final bound %.6f", scenario.n,
             time.perf_counter() - t0, model.final_bound)
    _ensure_parent(args.out)
    save_model(model, args.out)
    print(f"final_bound {model.final_bound!r} rounds {len(model.bound_trace)} "
          f"converged {str(model.converged).lower()}")


def cmd_associate(args):
    model = load_model(args.model)
    _ensure_parent(args.out)
    write_labels_csv(model, args.out)


def _read_test_inputs(path, input_dim):
    if not os.path.exists(path):
        raise DataError(f"test input file not found: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    cols = [i for i, h in enumerate(header) if h.startswith("x")] or list(range(len(header)))
    if len(cols) != input_dim:
        raise DataError(f"{path}: model needs {input_dim} input columns, found {len(cols)}")
    try:
        values = [[float(r[i]) for i in cols] for r in rows[1:] if r]
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: malformed row ({exc})") from None
    return np.array(values, dtype=float).reshape(-1, input_dim)


def _grid(text, input_dim):
    if input_dim != 1:
        raise DataError("--grid only applies to one-dimensional inputs")
    try:
        start, stop, num = text.split(":")
        return np.linspace(float(start), float(stop), int(num))[:, None]
    except ValueError:
        raise DataError(f"--grid expects START:STOP:NUM, got {text!r}") from None


def cmd_predict(args):
    model = load_model(args.model)
    P = model.data.input_dim
    X_star = _grid(args.grid, P) if args.grid else _read_test_inputs(args.test, P)
    _ensure_parent(args.out)
    write_prediction_csv(predict(model, X_star), args.out)


def cmd_eval(args):
    scenario = load_scenario(args.data)
    labels = read_labels_csv(args.labels)
    if labels.size != scenario.n:
        raise DataError(f"{args.labels} has {labels.size} labels, {args.data} has "
                        f"{scenario.n} samples")
    means, bound, M = None, None, scenario.num_sources
    if args.model:
        model = load_model(args.model)
        means = model.posterior.means + model.output_mean
        bound, M = model.final_bound, model.config.num_components
    report = evaluate(labels, scenario, means, max(M or 1, int(labels.max()) + 1))
    report.final_bound = bound
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        _ensure_parent(args.out)
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bench(args):
    metrics, timings = run_bench(args.scenario, args.seeds, args.seed, args.jobs,
                                 standardize=not args.raw_outputs)
    text = metrics_json(metrics)
    summary = summary_text(metrics, timings)
    if args.out:
        _ensure_parent(args.out)
        with open(args.out, "w") as fh:
            fh.write(text)
    if args.summary:
        _ensure_parent(args.summary)
        with open(args.summary, "w") as fh:
            fh.write(summary)
    sys.stdout.write(summary if args.out else text)


def build_parser():
    parser = _Parser(prog="omgp", description="Overlapping mixtures of Gaussian processes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write a seeded synthetic scenario")
    p.add_argument("--scenario", required=True, choices=sorted(GENERATORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a model to CSV data")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--inputs", help="comma-separated input columns (names or indices)")
    p.add_argument("--outputs", help="comma-separated output columns (names or indices)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("associate", help="hard labels of a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_associate)

    p = sub.add_parser("predict", help="mixture predictions at test inputs")
    p.add_argument("--model", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--test", help="CSV of test inputs (columns x1, x2, ...)")
    src.add_argument("--grid", help="START:STOP:NUM evenly spaced 1-D inputs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score labels against scenario ground truth")
    p.add_argument("--labels", required=True)
    p.add_argument("--data", required=True, help="scenario CSV with a label column")
    p.add_argument("--model", help="model JSON, adds per-track RMSE")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="seeded batch / online / nearest-neighbour comparison")
    p.add_argument("--scenario", default="missile", choices=sorted(GENERATORS))
    p.add_argument("--seeds", type=int, default=10, help="number of replications")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="metrics JSON path (default: stdout)")
    p.add_argument("--summary", help="plain-text summary path")
    p.add_argument("--raw-outputs", action="store_true",
                   help="fit unstandardized outputs")
    p.set_defaults(func=cmd_bench)
    return parser


def _configure_logging():
    level_name = os.environ.get("OMGP_LOG", "quiet").strip().lower()
    level = LOG_LEVELS.get(level_name, logging.WARNING)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("omgp: %(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(level)
    log.propagate = False
    if level_name not in LOG_LEVELS:
        log.warning("ignoring OMGP_LOG=%r (use quiet, info or debug)", level_name)


def run_command(argv):
    """Run one command; returns the process exit code."""
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if getattr(args, "seeds", 1) < 1 or getattr(args, "jobs", 1) < 1:
        print("omgp: error: --seeds and --jobs must be positive", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except (OmgpError, ValueError, OSError) as exc:
        message = str(exc)
        if isinstance(exc, OSError) and exc.strerror:
            message = f"{exc.strerror}: {exc.filename}" if exc.filename else exc.strerror
        print(f"omgp {args.command}: error: {message}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return 1
    return 0


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
