"""Transition kernels of the driftless reference process and Gauss-Hermite expectations.

The smoothing operator integrates against the transition density of
dZ = sigma dW (no drift; drift enters only through path simulation). When
sigma does not depend on the state the kernel is exactly Gaussian with
covariance int_s^u (sigma sigma')(r) dr; otherwise the coefficient is frozen
at (s, x) and the one-step Euler Gaussian N(x, sigma sigma'(s,x)(u-s)) is
used as the standard computable surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import DiffusionModel

EXACT_GAUSSIAN = "exact-gaussian"
EULER_LOCAL_GAUSSIAN = "euler-local-gaussian"


def gauss_hermite(order: int, dim: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Probabilists' Gauss-Hermite rule: nodes (Q, dim), weights summing to 1.

    E[g(Z)] for Z ~ N(0, I_dim) is approximated by sum_q w_q g(sqrt(2) xi_q).
    The sqrt(2) change of variables is left to the caller so nodes can be
    scaled directly by a covariance square root.
    """
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    xi, w = np.polynomial.hermite.hermgauss(order)
    w = w / np.sqrt(np.pi)
    if dim == 1:
        return xi[:, None], w
    grids = np.meshgrid(*([xi] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return nodes, weights


@dataclass(frozen=True)
class TransitionKernel:
    """Gaussian transition family of the driftless process Z started anywhere.

    mean(s, x, u) and covariance(s, x, u) accept x of shape (..., m) and
    return (..., m) / (..., m, m). reference_density(s, y) is the density of
    Z_s from the model's x0, defining the measure mu(ds, dy) = p(s, y) ds dy.
    """

    family: str
    dimension: int
    mean: Callable
    covariance: Callable
    reference_density: Callable
    model: DiffusionModel

    def scale(self, s: float, x: np.ndarray, u: float) -> np.ndarray:
        """Square roots of the covariance, shape (..., m, m) (Cholesky)."""
        cov = self.covariance(s, x, u)
        if self.dimension == 1:
            return np.sqrt(cov)
        return np.linalg.cholesky(cov)


def transition_kernel(model: DiffusionModel) -> TransitionKernel:
    m = model.dimension
    x0 = model.x0

    if model.sigma_constant:
        sig0 = model.diffusion(0.0, x0[None, :])[0]
        cov0 = sig0 @ sig0.T

        def mean(s, x, u):
            return np.asarray(x, dtype=float)

        def covariance(s, x, u):
            x = np.asarray(x, dtype=float)
            dt = np.asarray(np.asarray(u, dtype=float) - np.asarray(s, dtype=float))
            out = cov0 * dt[..., None, None]
            return np.broadcast_to(out, x.shape[:-1] + (m, m))

        def reference_density(s, y):
            # density of Z_s = x0 + sigma W_s
            y = np.asarray(y, dtype=float)
            cov = cov0 * s
            diff = y - x0
            if m == 1:
                var = cov[0, 0]
                return np.exp(-diff[..., 0] ** 2 / (2 * var)) / np.sqrt(2 * np.pi * var)
            inv = np.linalg.inv(cov)
            det = np.linalg.det(cov)
            q = np.einsum("...i,ij,...j->...", diff, inv, diff)
            return np.exp(-0.5 * q) / np.sqrt((2 * np.pi) ** m * det)

        family = EXACT_GAUSSIAN
    else:
        def mean(s, x, u):
            return np.asarray(x, dtype=float)

        def covariance(s, x, u):
            x = np.asarray(x, dtype=float)
            dt = np.asarray(np.asarray(u, dtype=float) - np.asarray(s, dtype=float))
            sig = model.diffusion(s, x)
            return (sig @ np.swapaxes(sig, -1, -2)) * dt[..., None, None]

        def reference_density(s, y):
            # frozen-coefficient surrogate: N(x0, sigma sigma'(0, x0) s)
            y = np.asarray(y, dtype=float)
            sig0 = model.diffusion(0.0, x0[None, :])[0]
            cov = (sig0 @ sig0.T) * s
            diff = y - x0
            if m == 1:
                var = cov[0, 0]
                return np.exp(-diff[..., 0] ** 2 / (2 * var)) / np.sqrt(2 * np.pi * var)
            inv = np.linalg.inv(cov)
            det = np.linalg.det(cov)
            q = np.einsum("...i,ij,...j->...", diff, inv, diff)
            return np.exp(-0.5 * q) / np.sqrt((2 * np.pi) ** m * det)

        family = EULER_LOCAL_GAUSSIAN

    return TransitionKernel(family=family, dimension=m, mean=mean,
                            covariance=covariance, reference_density=reference_density,
                            model=model)


def kernel_expectation(kernel: TransitionKernel, g, s: float, x, u: float,
                       order: int = 21) -> float:
    """E[g(Y)] for Y ~ kernel(s, x, u), by tensor Gauss-Hermite quadrature."""
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    if not u > s:
        raise ValueError("need u > s")
    m = kernel.dimension
    x = np.asarray(x, dtype=float).reshape(m)
    nodes, weights = gauss_hermite(order, m)
    mu = kernel.mean(s, x, u)
    root = kernel.scale(s, x, u)     # (m, m)
    ys = mu[None, :] + np.sqrt(2.0) * nodes @ root.T
    vals = np.asarray(g(ys), dtype=float)
    return float(weights @ vals)
