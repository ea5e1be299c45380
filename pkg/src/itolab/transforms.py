"""Time-space transforms f(t, x), their presets, and the generator L.

L acts on C12 transforms as

    (Lf)(t,x) = f_t(t,x) + 1/2 sum_ij (sigma sigma')_ij(t,x) f_{x_i x_j}(t,x)

and deliberately excludes the drift: it is the generator of the driftless
reference process against whose transition kernel everything is smoothed.

Transforms are vectorized: f(t, x) takes t broadcastable against x[..., 0]
and x of shape (..., m), returning (...). Gradients return (..., m) and
Hessians (..., m, m).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import UnsupportedOperationError
from .models import DiffusionModel

C12 = "C12"
CONTINUOUS = "continuous-only"


@dataclass(frozen=True)
class TransformSpec:
    name: str
    f: Callable
    smoothness: str = CONTINUOUS
    f_t: Callable | None = None
    f_x: Callable | None = None
    f_xx: Callable | None = None
    bounded: bool = False
    time_clip: float | None = None    # extend f constantly in time beyond this horizon

    def __call__(self, t, x):
        if self.time_clip is not None:
            t = np.minimum(t, self.time_clip)
        return self.f(t, x)

    @property
    def is_c12(self) -> bool:
        return self.smoothness == C12


def _fd_time(spec: TransformSpec, t, x, h: float = 1e-6):
    return (spec(t + h, x) - spec(t - h, x)) / (2 * h)


def _fd_gradient(spec: TransformSpec, t, x, h: float = 1e-6):
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    out = np.empty(x.shape)
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        out[..., i] = (spec(t, x + e) - spec(t, x - e)) / (2 * h)
    return out


def _fd_hessian(spec: TransformSpec, t, x, h: float = 1e-4):
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    out = np.empty(x.shape + (m,))
    f0 = spec(t, x)
    for i in range(m):
        ei = np.zeros(m)
        ei[i] = h
        out[..., i, i] = (spec(t, x + ei) - 2 * f0 + spec(t, x - ei)) / h**2
        for j in range(i + 1, m):
            ej = np.zeros(m)
            ej[j] = h
            mixed = (spec(t, x + ei + ej) - spec(t, x + ei - ej)
                     - spec(t, x - ei + ej) + spec(t, x - ei - ej)) / (4 * h**2)
            out[..., i, j] = mixed
            out[..., j, i] = mixed
    return out


def time_derivative(spec: TransformSpec, t, x):
    return spec.f_t(t, x) if spec.f_t is not None else _fd_time(spec, t, x)


def gradient(spec: TransformSpec, t, x):
    return spec.f_x(t, x) if spec.f_x is not None else _fd_gradient(spec, t, x)


def hessian(spec: TransformSpec, t, x):
    return spec.f_xx(t, x) if spec.f_xx is not None else _fd_hessian(spec, t, x)


def apply_L(spec: TransformSpec, model: DiffusionModel, t, x):
    """Evaluate the (driftless) generator L on a C12 transform."""
    if not spec.is_c12:
        raise UnsupportedOperationError(
            f"L is only defined on C12 transforms; {spec.name!r} is tagged {spec.smoothness}")
    x = np.asarray(x, dtype=float)
    cov = model.covariance(t, x)
    hess = hessian(spec, t, x)
    return time_derivative(spec, t, x) + 0.5 * np.einsum("...ij,...ij->...", cov, hess)


def check_derivatives(spec: TransformSpec, probe_points, rtol: float = 1e-4) -> None:
    """Assert supplied analytic derivatives match central differences on probes.

    Enforces the C12 contract; raises ValueError on the first disagreement.
    """
    if not spec.is_c12:
        return
    for t, x in probe_points:
        x = np.asarray(x, dtype=float)
        scale = max(1.0, abs(float(spec(t, x))))
        if spec.f_t is not None:
            a, b = float(spec.f_t(t, x)), float(_fd_time(spec, t, x))
            if abs(a - b) > rtol * max(scale, abs(b)):
                raise ValueError(f"{spec.name}: f_t mismatch at (t={t}, x={x.tolist()}): {a} vs FD {b}")
        if spec.f_x is not None:
            a = np.asarray(spec.f_x(t, x), float)
            b = _fd_gradient(spec, t, x)
            if np.max(np.abs(a - b)) > rtol * max(scale, float(np.max(np.abs(b)))):
                raise ValueError(f"{spec.name}: f_x mismatch at (t={t}, x={x.tolist()})")
        if spec.f_xx is not None:
            a = np.asarray(spec.f_xx(t, x), float)
            b = _fd_hessian(spec, t, x)
            if np.max(np.abs(a - b)) > 10 * rtol * max(scale, float(np.max(np.abs(b)))):
                raise ValueError(f"{spec.name}: f_xx mismatch at (t={t}, x={x.tolist()})")


# ---------------------------------------------------------------------------
# presets (scalar state)

def _x(t, x):
    return np.asarray(x)[..., 0] + 0.0 * np.asarray(t)


def _linear() -> TransformSpec:
    return TransformSpec(
        name="linear", f=_x, smoothness=C12,
        f_t=lambda t, x: np.zeros(np.broadcast_shapes(np.shape(t), np.asarray(x).shape[:-1])),
        f_x=lambda t, x: np.ones_like(np.asarray(x, dtype=float)),
        f_xx=lambda t, x: np.zeros(np.asarray(x).shape + (1,)),
    )


def _square() -> TransformSpec:
    return TransformSpec(
        name="square", f=lambda t, x: _x(t, x) ** 2, smoothness=C12,
        f_t=lambda t, x: np.zeros(np.broadcast_shapes(np.shape(t), np.asarray(x).shape[:-1])),
        f_x=lambda t, x: 2.0 * np.asarray(x, dtype=float),
        f_xx=lambda t, x: np.full(np.asarray(x).shape + (1,), 2.0),
    )


def _abs() -> TransformSpec:
    return TransformSpec(name="abs", f=lambda t, x: np.abs(_x(t, x)), bounded=True)


def _pow(alpha: float) -> TransformSpec:
    name = "sqrt_abs" if alpha == 0.5 else f"pow:{alpha:g}"
    return TransformSpec(name=name, f=lambda t, x: np.abs(_x(t, x)) ** alpha, bounded=True)


def _t_plus_sin() -> TransformSpec:
    return TransformSpec(
        name="t_plus_sin", f=lambda t, x: np.asarray(t) + np.sin(_x(t, x)), smoothness=C12,
        f_t=lambda t, x: np.ones(np.broadcast_shapes(np.shape(t), np.asarray(x).shape[:-1])),
        f_x=lambda t, x: np.cos(np.asarray(x, dtype=float)),
        f_xx=lambda t, x: -np.sin(np.asarray(x, dtype=float))[..., None],
    )


TRANSFORM_PRESETS = {
    "linear": _linear,
    "square": _square,
    "abs": _abs,
    "sqrt_abs": lambda: _pow(0.5),
    "t_plus_sin": _t_plus_sin,
}


def transform_preset(name: str) -> TransformSpec:
    """Look up a preset; "pow:<alpha>" parses the exponent."""
    if name in TRANSFORM_PRESETS:
        return TRANSFORM_PRESETS[name]()
    if name.startswith("pow:"):
        try:
            alpha = float(name.split(":", 1)[1])
        except ValueError:
            raise KeyError(f"bad exponent in transform preset {name!r}") from None
        if alpha <= 0:
            raise KeyError(f"transform preset {name!r} needs a positive exponent")
        return _pow(alpha)
    known = ", ".join(sorted(TRANSFORM_PRESETS) + ["pow:<alpha>"])
    raise KeyError(f"unknown transform preset {name!r} (known: {known})")
