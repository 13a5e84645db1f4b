"""Shared test utilities: finite-difference gradient checking."""

import numpy as np

FD_STEP = 1e-5


def central_difference(loss_fn, flat, h=FD_STEP):
    """Numerical gradient of loss_fn at flat, one coordinate at a time."""
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        bumped = flat.copy()
        bumped[i] += h
        up = loss_fn(bumped)
        bumped[i] -= 2 * h
        down = loss_fn(bumped)
        grad[i] = (up - down) / (2 * h)
    return grad


def max_rel_error(analytic, numeric):
    """Coordinate-wise relative error; absolute where both are ~zero."""
    analytic = np.asarray(analytic, dtype=float).ravel()
    numeric = np.asarray(numeric, dtype=float).ravel()
    err = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    rel = np.where(scale > 1e-8, err / np.maximum(scale, 1e-300), err)
    return float(rel.max())


def gradient_check(loss_fn, grad_fn, flat, h=FD_STEP):
    """Max relative error between analytic and numeric gradients."""
    return max_rel_error(grad_fn(flat), central_difference(loss_fn, flat, h=h))
