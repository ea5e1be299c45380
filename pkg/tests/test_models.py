"""Model validation against the claimed ellipticity and drift bounds."""

import numpy as np
import pytest

from itolab.errors import ModelEvaluationError
from itolab.models import (DiffusionModel, default_probe_grid, model_preset, validate_model)


def _probe(ts, xs, dirs=((1.0,),)):
    return [(t, np.atleast_1d(x), np.atleast_1d(d)) for t in ts for x in xs for d in dirs]


def test_identity_diffusion_passes_with_unit_epsilon():
    bm = model_preset("bm")
    report = validate_model(bm, default_probe_grid(bm))
    assert report.passed
    assert report.empirical_epsilon == pytest.approx(1.0)
    assert report.max_drift_norm == 0.0


def test_degenerate_sigma_fails_at_origin():
    # sigma(t, x) = x vanishes at 0: lower ellipticity bound violated there
    model = DiffusionModel(
        dimension=1,
        drift=lambda t, x: np.zeros_like(x),
        diffusion=lambda t, x: np.asarray(x)[..., None],
        ellipticity=0.1, drift_bound=0.0, x0=[1.0], horizon=1.0,
    )
    report = validate_model(model, _probe([0.0], [0.0, 1.0]))
    assert not report.passed
    assert not report.ellipticity_ok
    assert any("ellipticity" in f for f in report.failures)


def test_empirical_epsilon_from_eigenvalue_sweep():
    # oracle: for constant sigma, min(lam_min, 1/lam_max) of sigma sigma'
    mat = np.array([[np.sqrt(0.5), 0.0], [0.0, np.sqrt(2.0)]])
    model = DiffusionModel(
        dimension=2,
        drift=lambda t, x: np.zeros_like(x),
        diffusion=lambda t, x: np.broadcast_to(mat, np.asarray(x).shape[:-1] + (2, 2)),
        ellipticity=0.5, drift_bound=0.0, x0=[0.0, 0.0], horizon=1.0,
        sigma_constant=True, drift_is_constant=True,
    )
    eig = np.linalg.eigvalsh(mat @ mat.T)
    expected = min(eig.min(), 1.0 / eig.max())
    dirs = [(1.0, 0.0), (0.0, 1.0)]
    report = validate_model(model, _probe([0.0, 0.5], [(0.0, 0.0)], dirs))
    assert report.passed
    assert report.empirical_epsilon == pytest.approx(expected)
    assert expected == pytest.approx(0.5)


def test_drift_bound_and_linear_growth():
    drifted = model_preset("drifted_bm")
    report = validate_model(drifted, default_probe_grid(drifted))
    assert report.passed and report.max_drift_norm == pytest.approx(1.0)

    # |b| = 2|x| fails a constant bound of 1 far out, passes as linear growth C=2
    model = DiffusionModel(
        dimension=1,
        drift=lambda t, x: 2.0 * np.asarray(x, dtype=float),
        diffusion=lambda t, x: np.ones(np.asarray(x).shape + (1,)),
        ellipticity=1.0, drift_bound=1.0, x0=[0.0], horizon=1.0,
    )
    report = validate_model(model, _probe([0.0], [3.0]))
    assert not report.drift_ok
    growth = DiffusionModel(
        dimension=1, drift=model.drift, diffusion=model.diffusion,
        ellipticity=1.0, drift_bound=2.0, x0=[0.0], horizon=1.0, linear_growth=True,
    )
    assert validate_model(growth, _probe([0.0], [3.0])).passed


def test_non_finite_coefficient_identifies_probe():
    model = DiffusionModel(
        dimension=1,
        drift=lambda t, x: np.where(np.asarray(x) > 0.5, np.inf, 0.0),
        diffusion=lambda t, x: np.ones(np.asarray(x).shape + (1,)),
        ellipticity=1.0, drift_bound=0.0, x0=[0.0], horizon=1.0,
    )
    with pytest.raises(ModelEvaluationError, match="t=0.0"):
        validate_model(model, _probe([0.0], [1.0]))


def test_validation_monotone_under_probe_enlargement():
    # enlarging the probe grid can only lower the empirical epsilon
    model = model_preset("bounded_elliptic")
    small = _probe([0.0, 1.0], [0.0, 0.5])
    large = small + _probe([0.5], [-2.0, 2.0, 5.0])
    rep_small = validate_model(model, small)
    rep_large = validate_model(model, large)
    assert rep_large.empirical_epsilon <= rep_small.empirical_epsilon
    assert not (rep_small.passed is False and rep_large.passed is True)


def test_empty_probe_grid_rejected():
    with pytest.raises(ValueError):
        validate_model(model_preset("bm"), [])
    with pytest.raises(ValueError):
        validate_model(model_preset("bm"), [(0.0, np.array([0.0]), np.array([0.0]))])


def test_unknown_preset():
    with pytest.raises(KeyError, match="unknown model preset"):
        model_preset("nope")
