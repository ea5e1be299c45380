"""Transform presets and the driftless generator L."""

import numpy as np
import pytest

from itolab.errors import UnsupportedOperationError
from itolab.models import model_preset
from itolab.transforms import (TransformSpec, apply_L, check_derivatives, transform_preset)


def test_L_on_linear_vanishes(bm):
    lin = transform_preset("linear")
    for x in (-2.0, 0.0, 1.5):
        assert apply_L(lin, bm, 0.4, np.array([x])) == pytest.approx(0.0)


def test_L_on_square(bm):
    sq = transform_preset("square")
    assert apply_L(sq, bm, 0.0, np.array([3.0])) == pytest.approx(1.0)
    # scaled model: (1/2) * 4 * 2 = 4
    assert apply_L(sq, model_preset("scaled_bm"), 0.0, np.array([3.0])) == pytest.approx(4.0)


def test_L_on_t_plus_sin_matches_symbolic(bm):
    # symbolic oracle: L(t + sin x) = 1 - sin(x)/2 for sigma = 1
    ts = transform_preset("t_plus_sin")
    for x in np.linspace(-2, 2, 7):
        assert apply_L(ts, bm, 0.3, np.array([x])) == pytest.approx(1 - np.sin(x) / 2)


def test_L_rejects_continuous_only(bm):
    with pytest.raises(UnsupportedOperationError):
        apply_L(transform_preset("abs"), bm, 0.0, np.array([1.0]))


def test_L_via_finite_differences_matches_analytic(bm):
    # strip the analytic derivatives and rely on central differences
    sq = transform_preset("square")
    bare = TransformSpec(name="square_fd", f=sq.f, smoothness="C12")
    got = apply_L(bare, bm, 0.0, np.array([1.7]))
    assert got == pytest.approx(1.0, abs=1e-5)


def test_c12_presets_pass_derivative_check():
    probes = [(t, np.array([x])) for t in (0.0, 0.7) for x in (-1.3, 0.2, 2.0)]
    for name in ("linear", "square", "t_plus_sin"):
        check_derivatives(transform_preset(name), probes, rtol=1e-4)


def test_derivative_check_catches_wrong_gradient():
    sq = transform_preset("square")
    wrong = TransformSpec(name="bad", f=sq.f, smoothness="C12",
                          f_x=lambda t, x: 3.0 * np.asarray(x, dtype=float))
    with pytest.raises(ValueError, match="f_x mismatch"):
        check_derivatives(wrong, [(0.0, np.array([1.0]))])


def test_pow_preset_parsing():
    p = transform_preset("pow:0.3")
    assert p(0.0, np.array([[-8.0]])) == pytest.approx(8.0 ** 0.3)
    assert transform_preset("pow:0.5").name == "sqrt_abs"
    with pytest.raises(KeyError):
        transform_preset("pow:zero")
    with pytest.raises(KeyError):
        transform_preset("pow:-1")
    with pytest.raises(KeyError):
        transform_preset("cubic")


def test_presets_vectorize_over_paths():
    tr = transform_preset("t_plus_sin")
    t = np.linspace(0, 1, 5)[None, :]
    x = np.zeros((3, 5, 1))
    out = tr(t, x)
    assert out.shape == (3, 5)
    assert np.allclose(out, np.broadcast_to(t, (3, 5)))


def test_time_clip_extends_constantly():
    tr = transform_preset("t_plus_sin")
    clipped = TransformSpec(name=tr.name, f=tr.f, smoothness=tr.smoothness, time_clip=1.0)
    assert clipped(5.0, np.array([0.0])) == pytest.approx(clipped(1.0, np.array([0.0])))
