"""Bounded quasi-Newton ascent in log-hyperparameter space."""
import numpy as np
from scipy.optimize import minimize

#: box applied to every log-hyperparameter
LOG_BOUNDS = (np.log(1e-8), np.log(1e8))


def maximize(fun_and_grad, x0, max_evals=20, gradient_tol=1e-5, bounds=None):
    """Maximize ``fun_and_grad(x) -> (value, gradient)`` with L-BFGS-B.

    Returns ``(x_best, value_best, n_evals)``. The best point visited is
    returned, so the result never scores below the start.
    """
    x0 = np.asarray(x0, dtype=float)
    if bounds is None:
        bounds = [LOG_BOUNDS] * x0.size
    x0 = np.clip(x0, [b[0] for b in bounds], [b[1] for b in bounds])
    best = {"x": x0.copy(), "f": -np.inf}
    evals = [0]

    def negated(x):
        evals[0] += 1
        try:
            f, g = fun_and_grad(x)
        except ArithmeticError:
            return np.inf, np.zeros_like(x)
        if not np.isfinite(f):
            return np.inf, np.zeros_like(x)
        if f > best["f"]:
            best["x"], best["f"] = x.copy(), f
        return -f, -np.asarray(g, dtype=float)

    f0, _ = negated(x0)
    if not np.isfinite(f0):
        raise ArithmeticError("objective is not finite at the starting point")
    if max_evals > 1:
        minimize(negated, x0, jac=True, method="L-BFGS-B", bounds=bounds,
                 options={"maxfun": max_evals - 1, "gtol": gradient_tol,
                          "ftol": 1e-12, "maxiter": max_evals})
    return best["x"], best["f"], evals[0]
