"""Shared test oracles: central finite differences, independent of autodiff."""

import numpy as np


def finite_diff_grads(f, params, h=1e-5):
    """Central-difference gradient of the scalar function `f()` w.r.t. each
    parameter Tensor, perturbing raw arrays in place. `f` must rebuild its
    computation from the current parameter values on every call."""
    grads = []
    for p in params:
        g = np.zeros_like(p.data)
        flat = p.data.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = f()
            flat[i] = orig - h
            down = f()
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * h)
        grads.append(g)
    return grads


def relative_error(analytic, numeric):
    """||a - n|| / max(||n||, eps) over the concatenated gradient vectors."""
    a = np.concatenate([np.ravel(x) for x in analytic])
    n = np.concatenate([np.ravel(x) for x in numeric])
    denom = max(np.linalg.norm(n), 1e-12)
    return np.linalg.norm(a - n) / denom


def check_gradients(loss_fn, params, h=1e-5, tol=1e-4):
    """Assert analytic gradients (via backward) match finite differences."""
    for p in params:
        p.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in params]
    numeric = finite_diff_grads(lambda: float(loss_fn().data), params, h=h)
    err = relative_error(analytic, numeric)
    assert err < tol, f"gradient mismatch: relative error {err:.3e} >= {tol}"
    return err
