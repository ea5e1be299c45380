"""The kernel-smoothing sequence: approximants, their gradients, and their generator values.

For smoothing index n,

    fhat_n(s, x) = n * int_s^{s+1/n} E[ f(u, Y_u) ] du,      Y_u ~ kernel(s, x, u),

evaluated with a fixed-node Gauss-Legendre rule in time and Gauss-Hermite in
space. The spatial gradient integrates f against the differentiated Gaussian
kernel, cov^{-1}(y - x), so it needs no derivatives of f. The generator value
uses the one-step form at horizon exactly 1/n,

    (L fhat_n)(s, x) = n * ( E[ f(s + 1/n, Y) ] - f(s, x) ),   Y ~ kernel(s, x, s + 1/n),

which is the object whose pathwise total variation drives the semimartingale
diagnostic.

As n grows, fhat_n -> f uniformly on compacts and the gradients converge in
L2(mu) to the generalized gradient; those limits are asserted statistically
in the acceptance suite, not per call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import TransitionKernel, gauss_hermite
from .transforms import TransformSpec

_CHUNK = 1 << 19    # evaluation points per quadrature pass; keeps temporaries ~100 MB


def gauss_legendre_window(n_points: int, width: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on (0, width); weights sum to width."""
    if n_points < 1:
        raise ValueError("time quadrature needs at least one node")
    xi, w = np.polynomial.legendre.leggauss(n_points)
    return 0.5 * width * (xi + 1.0), 0.5 * width * w


@dataclass(frozen=True)
class SmoothedTransform:
    transform: TransformSpec
    kernel: TransitionKernel
    n: int
    time_quad_points: int = 3
    space_quad_order: int = 21

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("smoothing index n must be >= 1")
        if self.time_quad_points < 1 or self.space_quad_order < 1:
            raise ValueError("quadrature rules need at least one node")

    @property
    def window(self) -> float:
        return 1.0 / self.n

    # -- internals ----------------------------------------------------------

    def _nodes(self):
        return gauss_hermite(self.space_quad_order, self.kernel.dimension)

    def _eval_chunk(self, s, x, want_value: bool, want_gradient: bool):
        """Quadrature over one chunk; s (N,), x (N, m)."""
        taus, tws = gauss_legendre_window(self.time_quad_points, self.window)
        nodes, weights = self._nodes()    # (Q, m), (Q,)
        m = self.kernel.dimension
        N = x.shape[0]
        value = np.zeros(N) if want_value else None
        grad = np.zeros((N, m)) if want_gradient else None
        for tau, tw in zip(taus, tws):
            u = s + tau
            root = self.kernel.scale(s, x, u + 0.0) if m > 1 else None
            if m == 1:
                std = np.sqrt(self.kernel.covariance(s, x, s + tau)[..., 0, 0])  # (N,)
                shift = np.sqrt(2.0) * std[:, None] * nodes[:, 0][None, :]       # (N, Q)
                ys = x[:, 0][:, None] + shift
                fv = self.transform(u[:, None] if np.ndim(u) else u, ys[..., None])  # (N, Q)
                if want_value:
                    value += tw * (fv @ weights)
                if want_gradient:
                    # E[f(Y) (Y-x)] / var; (Y-x)/var = sqrt(2) xi / std
                    gw = weights * (np.sqrt(2.0) * nodes[:, 0])
                    grad[:, 0] += tw * (fv @ gw) / std
            else:
                shift = np.sqrt(2.0) * np.einsum("nij,qj->nqi", root, nodes)     # (N, Q, m)
                ys = x[:, None, :] + shift
                fv = self.transform(np.broadcast_to(np.atleast_1d(u)[:, None], ys.shape[:2]), ys)
                if want_value:
                    value += tw * (fv @ weights)
                if want_gradient:
                    cov = self.kernel.covariance(s, x, s + tau)
                    inv = np.linalg.inv(cov)
                    diff = np.einsum("nij,nqj->nqi", inv, shift)
                    grad += tw * np.einsum("nq,nqi,q->ni", fv, diff, weights)
        if want_value:
            value *= self.n
        if want_gradient:
            grad *= self.n
        return value, grad

    def _batched(self, s, x, want_value: bool, want_gradient: bool):
        x = np.asarray(x, dtype=float)
        m = self.kernel.dimension
        lead = x.shape[:-1]
        s_full = np.broadcast_to(np.asarray(s, dtype=float), lead).reshape(-1)
        x_flat = x.reshape(-1, m)
        N = x_flat.shape[0]
        value = np.empty(N) if want_value else None
        grad = np.empty((N, m)) if want_gradient else None
        for lo in range(0, N, _CHUNK):
            hi = min(lo + _CHUNK, N)
            v, g = self._eval_chunk(s_full[lo:hi], x_flat[lo:hi], want_value, want_gradient)
            if want_value:
                value[lo:hi] = v
            if want_gradient:
                grad[lo:hi] = g
        if want_value:
            value = value.reshape(lead)
        if want_gradient:
            grad = grad.reshape(lead + (m,))
        return value, grad

    # -- public surface -----------------------------------------------------

    def value(self, s, x) -> np.ndarray:
        """fhat_n(s, x)."""
        v, _ = self._batched(s, x, True, False)
        return v

    def gradient(self, s, x) -> np.ndarray:
        """Spatial gradient of fhat_n, shape (..., m)."""
        _, g = self._batched(s, x, False, True)
        return g

    def generator_value(self, s, x) -> np.ndarray:
        """(L fhat_n)(s, x) by the one-step formula at horizon 1/n."""
        x = np.asarray(x, dtype=float)
        m = self.kernel.dimension
        lead = x.shape[:-1]
        s_arr = np.broadcast_to(np.asarray(s, dtype=float), lead).reshape(-1)
        x_flat = x.reshape(-1, m)
        nodes, weights = self._nodes()
        out = np.empty(x_flat.shape[0])
        h = self.window
        for lo in range(0, x_flat.shape[0], _CHUNK):
            hi = min(lo + _CHUNK, x_flat.shape[0])
            sc, xc = s_arr[lo:hi], x_flat[lo:hi]
            u = sc + h
            if m == 1:
                std = np.sqrt(self.kernel.covariance(sc, xc, sc + h)[..., 0, 0])
                ys = xc[:, 0][:, None] + np.sqrt(2.0) * std[:, None] * nodes[:, 0][None, :]
                fv = self.transform(u[:, None], ys[..., None])
            else:
                root = self.kernel.scale(sc, xc, sc + h)
                ys = xc[:, None, :] + np.sqrt(2.0) * np.einsum("nij,qj->nqi", root, nodes)
                fv = self.transform(np.broadcast_to(u[:, None], ys.shape[:2]), ys)
            out[lo:hi] = self.n * (fv @ weights - self.transform(sc, xc))
        return out.reshape(lead)


def smooth(transform: TransformSpec, kernel: TransitionKernel, n: int,
           time_quad_points: int = 3, space_quad_order: int = 21) -> SmoothedTransform:
    """Build the n-th kernel-smoothed approximant of the transform."""
    return SmoothedTransform(transform=transform, kernel=kernel, n=int(n),
                             time_quad_points=time_quad_points,
                             space_quad_order=space_quad_order)


@dataclass(frozen=True)
class GradientField:
    """Smoothed-gradient samples on a time-space lattice (scalar state)."""

    times: np.ndarray      # (Gt,)
    states: np.ndarray     # (Gx,)
    values: np.ndarray     # (Gt, Gx)
    n: int


def estimate_generalized_gradient(transform: TransformSpec, kernel: TransitionKernel,
                                  n: int, region, grid_density: int,
                                  time_quad_points: int = 3,
                                  space_quad_order: int = 21) -> GradientField:
    """Sample fhat_n's gradient on a box lattice.

    region is ((t_lo, t_hi), (x_lo, x_hi)); the samples approximate the
    generalized gradient in L2(mu) as n grows.
    """
    if kernel.dimension != 1:
        raise ValueError("gradient field sampling is implemented for scalar models")
    (t_lo, t_hi), (x_lo, x_hi) = region
    ts = np.linspace(t_lo, t_hi, grid_density)
    xs = np.linspace(x_lo, x_hi, grid_density)
    st = smooth(transform, kernel, n, time_quad_points, space_quad_order)
    tt, xx = np.meshgrid(ts, xs, indexing="ij")
    vals = st.gradient(tt, xx[..., None])[..., 0]
    return GradientField(times=ts, states=xs, values=vals, n=int(n))
