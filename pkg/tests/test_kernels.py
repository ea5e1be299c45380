"""Transition kernels and Gauss-Hermite expectations."""

import numpy as np
import pytest

from itolab.kernels import (EULER_LOCAL_GAUSSIAN, EXACT_GAUSSIAN, kernel_expectation,
                            transition_kernel)
from itolab.models import model_preset
from itolab.simulate import simulate, uniform_grid


def test_brownian_kernel_is_exact_gaussian(bm):
    k = transition_kernel(bm)
    assert k.family == EXACT_GAUSSIAN
    cov = k.covariance(0.2, np.array([0.3]), 0.7)
    assert cov[0, 0] == pytest.approx(0.5)
    assert np.array_equal(k.mean(0.2, np.array([0.3]), 0.7), np.array([0.3]))


def test_scaled_kernel_covariance():
    k = transition_kernel(model_preset("scaled_bm"))
    assert k.covariance(0.0, np.array([0.0]), 0.25)[0, 0] == pytest.approx(1.0)  # 4 * 0.25


def test_normalization_within_tolerance(bm):
    k = transition_kernel(bm)
    for order in (5, 9, 21):
        val = kernel_expectation(k, lambda y: np.ones(y.shape[0]), 0.0, [1.3], 0.8, order=order)
        assert abs(val - 1.0) < 1e-10


def test_centered_mean_and_second_moment(bm):
    k = transition_kernel(bm)
    x = 0.7
    assert kernel_expectation(k, lambda y: y[:, 0], 0.0, [x], 0.5) == pytest.approx(x)
    # E Y^2 = x^2 + (u - s) for sigma = 1
    assert kernel_expectation(k, lambda y: y[:, 0] ** 2, 0.1, [x], 0.6) == pytest.approx(x**2 + 0.5)


def test_bounded_elliptic_kernel_frozen_coefficient():
    model = model_preset("bounded_elliptic")
    k = transition_kernel(model)
    assert k.family == EULER_LOCAL_GAUSSIAN
    s, x, u = 0.0, np.array([1.5]), 0.2
    sig2 = 1.0 + 1.5**2 / (1.0 + 1.5**2)
    assert k.covariance(s, x, u)[0, 0] == pytest.approx(sig2 * 0.2)

    # cross-check against the empirical covariance of the simulated driftless
    # process started at x over a fine short window
    grid = uniform_grid(64, 0.2)
    shifted = _restart(model, x)
    ens = simulate(shifted, grid, 77, 4096)
    emp = np.var(ens.values[:, -1, 0] - x[0], ddof=1)
    assert emp == pytest.approx(sig2 * 0.2, rel=0.15)


def _restart(model, x0):
    from itolab.models import DiffusionModel
    return DiffusionModel(
        dimension=1, drift=model.drift, diffusion=model.diffusion,
        ellipticity=model.ellipticity, drift_bound=model.drift_bound,
        x0=x0, horizon=model.horizon, sigma_constant=model.sigma_constant,
        drift_is_constant=model.drift_is_constant,
    )


def test_error_decreases_with_order_for_smooth_integrand(bm):
    # E cos(Y) = cos(x) exp(-tau/2) for the Brownian kernel
    k = transition_kernel(bm)
    x, tau = 0.4, 0.9
    exact = np.cos(x) * np.exp(-tau / 2)
    errs = [abs(kernel_expectation(k, lambda y: np.cos(y[:, 0]), 0.0, [x], tau, order=q) - exact)
            for q in (3, 5, 9)]
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 1e-10


def test_argument_errors(bm):
    k = transition_kernel(bm)
    with pytest.raises(ValueError):
        kernel_expectation(k, lambda y: y[:, 0], 0.0, [0.0], 1.0, order=0)
    with pytest.raises(ValueError):
        kernel_expectation(k, lambda y: y[:, 0], 1.0, [0.0], 1.0)


def test_multidimensional_normalization():
    from itolab.models import DiffusionModel
    mat = np.array([[1.0, 0.3], [0.0, 0.8]])
    model = DiffusionModel(
        dimension=2,
        drift=lambda t, x: np.zeros_like(x),
        diffusion=lambda t, x: np.broadcast_to(mat, np.asarray(x).shape[:-1] + (2, 2)),
        ellipticity=0.3, drift_bound=0.0, x0=[0.0, 0.0], horizon=1.0,
        sigma_constant=True, drift_is_constant=True,
    )
    k = transition_kernel(model)
    val = kernel_expectation(k, lambda y: np.ones(y.shape[0]), 0.0, [0.1, -0.2], 0.5, order=7)
    assert abs(val - 1.0) < 1e-10
    # second moment along the first coordinate: x^2 + cov_00 * (u - s)
    cov00 = (mat @ mat.T)[0, 0]
    got = kernel_expectation(k, lambda y: y[:, 0] ** 2, 0.0, [0.1, -0.2], 0.5, order=7)
    assert got == pytest.approx(0.1**2 + cov00 * 0.5)
