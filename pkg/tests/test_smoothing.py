"""The smoothing sequence: values, gradients, generator values, convergence."""

import numpy as np
import pytest
from scipy import integrate
from scipy.special import erf

from itolab.kernels import kernel_expectation, transition_kernel
from itolab.models import model_preset
from itolab.smoothing import estimate_generalized_gradient, smooth
from itolab.transforms import transform_preset


@pytest.fixture(scope="module")
def brownian_kernel(bm):
    return transition_kernel(bm)


def test_linear_transform_is_fixed_point(brownian_kernel):
    lin = transform_preset("linear")
    for n in (1, 10, 1000):
        st = smooth(lin, brownian_kernel, n)
        xs = np.array([[-1.5], [0.0], [2.0]])
        assert np.allclose(st.value(0.2, xs), xs[:, 0], atol=1e-12)
        assert np.allclose(st.gradient(0.2, xs)[:, 0], 1.0, atol=1e-12)
        assert np.allclose(st.generator_value(0.2, xs), 0.0, atol=1e-9 * n)


def test_square_closed_forms(brownian_kernel):
    # fhat_n = x^2 + 1/(2n), gradient 2x, L fhat_n = 1 (sigma = 1)
    sq = transform_preset("square")
    for n in (4, 64, 1024):
        st = smooth(sq, brownian_kernel, n)
        x = np.array([[0.7], [-1.2]])
        assert np.allclose(st.value(0.1, x), x[:, 0] ** 2 + 1 / (2 * n), atol=1e-10)
        assert np.allclose(st.gradient(0.1, x)[:, 0], 2 * x[:, 0], atol=1e-9)
        assert np.allclose(st.generator_value(0.1, x), 1.0, atol=1e-8)


def test_square_closed_form_scaled_sigma():
    # sigma = 2: fhat_n = x^2 + 4/(2n)
    k = transition_kernel(model_preset("scaled_bm"))
    st = smooth(transform_preset("square"), k, 32)
    assert st.value(0.0, np.array([1.0]))[()] == pytest.approx(1.0 + 2.0 / 32)
    assert st.generator_value(0.0, np.array([1.0]))[()] == pytest.approx(4.0, abs=1e-8)


def test_abs_generator_at_kink_grows_like_sqrt_n(brownian_kernel):
    # L fhat_n(s, 0) = n E|Z/sqrt(n)| = sqrt(2n/pi); Gauss-Hermite at the kink
    # converges slowly, so allow 5% at the default order and 2% at order 81
    ab = transform_preset("abs")
    for n in (64, 1024):
        target = np.sqrt(2 * n / np.pi)
        got = smooth(ab, brownian_kernel, n).generator_value(0.0, np.array([0.0]))[()]
        assert got == pytest.approx(target, rel=0.05)
        fine = smooth(ab, brownian_kernel, n, space_quad_order=81)
        assert fine.generator_value(0.0, np.array([0.0]))[()] == pytest.approx(target, rel=0.02)


def test_abs_value_at_kink_against_quadrature_oracle(brownian_kernel):
    # oracle: n \int_0^{1/n} sqrt(2 tau / pi) d tau = (2/3) sqrt(2/(pi n))
    ab = transform_preset("abs")
    for n in (10, 100):
        exact, _ = integrate.quad(lambda tau: np.sqrt(2 * tau / np.pi), 0, 1 / n)
        st = smooth(ab, brownian_kernel, n)
        assert st.value(0.3, np.array([0.0]))[()] == pytest.approx(n * exact, rel=0.02)


def test_abs_gradient_matches_erf_mollification(brownian_kernel):
    # oracle: d/dx E|x + sqrt(tau) Z| = erf(x / sqrt(2 tau)), time-averaged
    ab = transform_preset("abs")
    n = 100
    st = smooth(ab, brownian_kernel, n)
    for x in (-0.3, -0.05, 0.02, 0.4):
        oracle = n * integrate.quad(lambda tau: erf(x / np.sqrt(2 * tau)), 0, 1 / n)[0]
        got = st.gradient(0.0, np.array([x]))[0]
        assert got == pytest.approx(oracle, abs=0.02)


def test_generator_matches_kernel_expectation_one_step(brownian_kernel):
    # type invariant: L fhat_n(s,x) = n (E f(s + 1/n, .) - f(s, x)) by construction
    tr = transform_preset("t_plus_sin")
    n = 50
    st = smooth(tr, brownian_kernel, n)
    s, x = 0.2, 0.9
    expected = n * (kernel_expectation(
        brownian_kernel, lambda y: tr(s + 1 / n, y), s, [x], s + 1 / n, order=21)
        - float(tr(s, np.array([x]))))
    assert st.generator_value(s, np.array([x]))[()] == pytest.approx(expected, abs=1e-10)


def test_sup_error_nonincreasing_in_n(brownian_kernel):
    # uniform convergence on compacts: sup |fhat_n - f| shrinks along 10, 100, 1000
    ts = np.linspace(0.0, 1.0, 9)
    xs = np.linspace(-1.0, 1.0, 41)
    tt, xx = np.meshgrid(ts, xs, indexing="ij")
    for name in ("abs", "square", "t_plus_sin", "sqrt_abs"):
        tr = transform_preset(name)
        exact = tr(tt, xx[..., None])
        sups = []
        for n in (10, 100, 1000):
            st = smooth(tr, brownian_kernel, n)
            sups.append(np.max(np.abs(st.value(tt, xx[..., None]) - exact)))
        assert sups[0] >= sups[1] >= sups[2]


def test_gradient_fallback_equivalence_for_c12(brownian_kernel):
    # smoothed gradient at n = 10^4 matches analytic f_x within 1e-2 on the box
    from itolab.transforms import gradient as analytic_gradient
    xs = np.linspace(-1.0, 1.0, 21)[:, None]
    for name in ("linear", "square", "t_plus_sin"):
        tr = transform_preset(name)
        st = smooth(tr, brownian_kernel, 10_000)
        got = st.gradient(0.5, xs)[:, 0]
        want = np.asarray(analytic_gradient(tr, 0.5, xs))[:, 0]
        assert np.max(np.abs(got - want)) < 1e-2


def test_gradient_field_on_region(brownian_kernel):
    field = estimate_generalized_gradient(transform_preset("abs"), brownian_kernel,
                                          n=10_000, region=((0.0, 1.0), (-1.0, 1.0)),
                                          grid_density=21)
    assert field.values.shape == (21, 21)
    mask = np.abs(field.states) > 0.05
    err = field.values[:, mask] - np.sign(field.states[mask])[None, :]
    assert np.max(np.abs(err)) < 0.05


def test_smoothing_argument_errors(brownian_kernel):
    with pytest.raises(ValueError):
        smooth(transform_preset("abs"), brownian_kernel, 0)
    with pytest.raises(ValueError):
        smooth(transform_preset("abs"), brownian_kernel, 4, time_quad_points=0)
