"""Overlapping mixtures of Gaussian processes for data association."""
from .data import DataSet
from .errors import ConfigError, DataError, DimensionError, FactorizationError, OmgpError
from .evaluation import EvalReport, evaluate, nn_baseline
from .gp import gp_fit, gp_log_evidence, gp_optimize, gp_predict
from .inference import (MStepOptions, OmgpConfig, OmgpModel, TrajectoryPosterior, bound_lkl,
                        bound_lvb, e_step, fit, fit_online, lkl_hyper_gradient,
                        m_step_posterior)
from .kernels import KernelFamily, KernelSpec, gram, gram_gradient
from .persistence import load_model, save_model
from .prediction import MixturePrediction, associate, predict, predictive_density
from .scenarios import (Scenario, gen_circles, gen_missile_to_air, gen_multilevel,
                        gen_sinc_outliers, load_csv)

__all__ = [
    "DataSet", "OmgpError", "ConfigError", "DataError", "DimensionError", "FactorizationError",
    "EvalReport", "evaluate", "nn_baseline",
    "gp_fit", "gp_log_evidence", "gp_optimize", "gp_predict",
    "MStepOptions", "OmgpConfig", "OmgpModel", "TrajectoryPosterior",
    "bound_lkl", "bound_lvb", "e_step", "fit", "fit_online", "lkl_hyper_gradient",
    "m_step_posterior",
    "KernelFamily", "KernelSpec", "gram", "gram_gradient",
    "load_model", "save_model",
    "MixturePrediction", "associate", "predict", "predictive_density",
    "Scenario", "gen_circles", "gen_missile_to_air", "gen_multilevel", "gen_sinc_outliers",
    "load_csv",
]
