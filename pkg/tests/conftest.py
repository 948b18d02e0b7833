"""Shared test helpers: finite-difference oracle and gradient comparison."""

import numpy as np


def numeric_grad(f, x, h=1e-6):
    """Central finite differences of scalar-valued ``f`` w.r.t. array ``x``.

    ``f`` takes no arguments and must read ``x`` (which is perturbed in
    place); the array is restored before returning.
    """
    x = np.asarray(x)
    assert x.dtype == np.float64
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + h
        fp = f()
        flat[k] = orig - h
        fm = f()
        flat[k] = orig
        gflat[k] = (fp - fm) / (2.0 * h)
    return grad


def max_rel_err(analytic, numeric):
    """Worst-case relative error with a unit floor.

    The floor keeps finite-difference roundoff noise on near-zero entries
    from registering as error; for entries of magnitude >= 1 this is a
    plain relative comparison.
    """
    a = np.asarray(analytic)
    n = np.asarray(numeric)
    denom = np.maximum(1.0, np.abs(a) + np.abs(n))
    return float(np.max(np.abs(a - n) / denom))


def assert_grads_close(analytic, numeric, tol=1e-5):
    err = max_rel_err(analytic, numeric)
    assert err < tol, f"gradient mismatch: max rel err {err:.3e} >= {tol}"
