"""Flat ``key = value`` configuration files.

Example::

    # two identical SE-ARD components
    num_components = 2
    noise_variance = 0.01
    kernel.family = se_ard
    kernel.signal_power = 1.0
    kernel.length_scales = 0.25
    kernel.1.signal_power = 2.0     # overrides component 1 only
    mstep.max_evals = 20

``kernel.<field>`` applies to every component whose family uses that
field and ``kernel.<i>.<field>`` to component ``i`` alone.  Length-scales
are comma separated.  The number of components is ``num_components`` or,
if absent, one more than the highest component index mentioned.  Only the
uniform prior can be expressed.
"""
import numpy as np

from .errors import ConfigError
from .inference import MStepOptions, OmgpConfig
from .kernels import KernelFamily, KernelSpec

_KERNEL_FIELDS = ("family", "signal_power", "length_scales", "noise_level")
_APPLIES = {KernelFamily.SE_ARD: {"signal_power", "length_scales"},
            KernelFamily.WHITE_NOISE: {"noise_level"}}
_SCALARS = {
    "noise_variance": float,
    "max_em_rounds": int,
    "estep_tol": float,
    "max_estep_iters": int,
    "seed": int,
    "min_noise_variance": float,
    "n_restarts": int,
}
_MSTEP = {"max_evals": int, "gradient_tol": float}


def _parse_bool(text):
    t = text.lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def parse_lines(text, source="<config>"):
    """Split config text into an ordered ``{key: (value, line number)}`` map."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = (value, lineno)
    return entries


def _convert(conv, value, key, lineno, source):
    try:
        return conv(value)
    except ValueError as exc:
        raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None


def _length_scales(text):
    return tuple(float(v) for v in text.split(","))


def _build_kernel(shared, own, index, source):
    family_text = own.get("family", shared.get("family", ("se_ard", 0)))[0]
    try:
        family = KernelFamily(family_text)
    except ValueError:
        names = ", ".join(f.value for f in KernelFamily)
        raise ConfigError(f"{source}: component {index}: unknown kernel family "
                          f"{family_text!r} (choose from {names})") from None
    # shared fields of another family are skipped, explicit ones must fit
    fields = {k: v for k, v in shared.items() if k in _APPLIES[family]}
    fields.update(own)
    conv = {"signal_power": float, "length_scales": _length_scales, "noise_level": float}
    values = {k: _convert(conv[k], v, f"kernel.{k}", n, source)
              for k, (v, n) in fields.items() if k != "family"}
    try:
        if family is KernelFamily.SE_ARD:
            if "noise_level" in values:
                raise ConfigError("noise_level does not apply to se_ard")
            return KernelSpec.se_ard(values.get("signal_power", 1.0),
                                     values.get("length_scales", (1.0,)))
        extra = {"signal_power", "length_scales"} & set(values)
        if extra:
            raise ConfigError(f"{', '.join(sorted(extra))} does not apply to white_noise")
        return KernelSpec.white_noise(values.get("noise_level", 1.0))
    except ValueError as exc:
        raise ConfigError(f"{source}: component {index}: {exc}") from None


def loads(text, source="<config>"):
    """Parse config text into an `OmgpConfig`."""
    entries = parse_lines(text, source)
    shared, per_component, kwargs, mstep = {}, {}, {}, {}
    num_components = None
    for key, (value, lineno) in entries.items():
        parts = key.split(".")
        if parts[0] == "kernel":
            if len(parts) == 2 and parts[1] in _KERNEL_FIELDS:
                shared[parts[1]] = (value, lineno)
                continue
            if len(parts) == 3 and parts[1].isdigit() and parts[2] in _KERNEL_FIELDS:
                per_component.setdefault(int(parts[1]), {})[parts[2]] = (value, lineno)
                continue
        elif parts[0] == "mstep" and len(parts) == 2 and parts[1] in _MSTEP:
            mstep[parts[1]] = _convert(_MSTEP[parts[1]], value, key, lineno, source)
            continue
        elif len(parts) == 1 and key in _SCALARS:
            kwargs[key] = _convert(_SCALARS[key], value, key, lineno, source)
            continue
        elif key == "learn_hyperparameters":
            kwargs[key] = _convert(_parse_bool, value, key, lineno, source)
            continue
        elif key == "num_components":
            num_components = _convert(int, value, key, lineno, source)
            if num_components < 1:
                raise ConfigError(f"{source}:{lineno}: num_components must be positive")
            continue
        elif key == "prior":
            if value != "uniform":
                raise ConfigError(f"{source}:{lineno}: only 'prior = uniform' is supported")
            continue
        raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
    if "noise_variance" not in kwargs:
        raise ConfigError(f"{source}: missing required key 'noise_variance'")
    highest = max(per_component, default=-1) + 1
    if num_components is None:
        num_components = max(highest, 1)
    elif highest > num_components:
        raise ConfigError(f"{source}: kernel.{highest - 1}.* given but "
                          f"num_components = {num_components}")
    kernels = [_build_kernel(shared, per_component.get(m, {}), m, source)
               for m in range(num_components)]
    defaults = MStepOptions()
    kwargs["mstep"] = MStepOptions(mstep.get("max_evals", defaults.max_evals),
                                   mstep.get("gradient_tol", defaults.gradient_tol))
    try:
        return OmgpConfig(kernels, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return loads(text, source=str(path))


def _fmt(x):
    return repr(float(x))


def dumps(config):
    """Config text that `loads` maps back to an equal configuration."""
    if config.prior is not None:
        raise ConfigError("a full-matrix prior cannot be written to a config file")
    lines = [f"num_components = {config.num_components}",
             f"noise_variance = {_fmt(config.noise_variance)}",
             f"max_em_rounds = {config.max_em_rounds}",
             f"estep_tol = {_fmt(config.estep_tol)}",
             f"max_estep_iters = {config.max_estep_iters}",
             f"mstep.max_evals = {config.mstep.max_evals}",
             f"mstep.gradient_tol = {_fmt(config.mstep.gradient_tol)}",
             f"seed = {config.seed}",
             f"learn_hyperparameters = {str(config.learn_hyperparameters).lower()}",
             f"min_noise_variance = {_fmt(config.min_noise_variance)}",
             f"n_restarts = {config.n_restarts}",
             "prior = uniform"]
    for m, spec in enumerate(config.kernels):
        lines.append(f"kernel.{m}.family = {spec.family.value}")
        if spec.family is KernelFamily.SE_ARD:
            lines.append(f"kernel.{m}.signal_power = {_fmt(spec.signal_power)}")
            lines.append(f"kernel.{m}.length_scales = "
                         + ", ".join(_fmt(v) for v in np.asarray(spec.length_scales)))
        else:
            lines.append(f"kernel.{m}.noise_level = {_fmt(spec.noise_level)}")
    return "\n".join(lines) + "\n"
