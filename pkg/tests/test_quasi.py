import numpy as np
import pytest

from macrospline.fields import get_field, make_polynomial_field, make_smooth_field
from macrospline.interpolation import (
    interp_reduced,
    quasi_interp,
    random_c1q2,
    sigma_average,
)
from macrospline.mesh import build_macro_mesh, select_sigma


def _uniform(n):
    return build_macro_mesh(np.linspace(0, 1, n + 1), np.linspace(0, 1, n + 1))


def test_xy_gives_unit_averages_and_exact_reproduction():
    mesh = _uniform(3)
    sigma = select_sigma(mesh, "left")
    f = get_field("xy")  # u_xy == 1
    for node, edge in sigma.edges.items():
        assert sigma_average(f, edge) == pytest.approx(1.0, abs=1e-13)
    p = quasi_interp(f, mesh, sigma)
    X, Y = np.meshgrid(np.linspace(0, 1, 13), np.linspace(0, 1, 13), indexing="ij")
    assert np.max(np.abs(p.evaluate(X, Y) - f(X, Y))) < 1e-13


def test_zero_mixed_derivative_reduces_to_reduced_operator():
    mesh = _uniform(2)
    sigma = select_sigma(mesh, "toward_corner")
    f = get_field("sin_plus_sin")  # u_xy == 0
    pq = quasi_interp(f, mesh, sigma)
    pr = interp_reduced(f, mesh)
    assert np.max(np.abs(pq.coef - pr.coef)) < 1e-14


@pytest.mark.parametrize("strategy", ["left", "down", "toward_corner"])
def test_projector_on_random_c1q2_functions(strategy):
    rng = np.random.default_rng(17)
    mesh = _uniform(3)
    sigma = select_sigma(mesh, strategy)
    for _ in range(5):
        v = random_c1q2(mesh, rng)
        p = quasi_interp(v.as_field(), mesh, sigma)
        assert np.max(np.abs(p.coef - v.coef)) < 1e-10


def test_projector_on_nonuniform_mesh():
    rng = np.random.default_rng(5)
    mesh = build_macro_mesh([0.0, 0.1, 0.3, 0.6, 1.0], [0.0, 0.5, 0.75, 1.0])
    sigma = select_sigma(mesh, "left")
    v = random_c1q2(mesh, rng)
    p = quasi_interp(v.as_field(), mesh, sigma)
    assert np.max(np.abs(p.coef - v.coef)) < 1e-10


def test_biquadratic_field_reproduced():
    rng = np.random.default_rng(2)
    mesh = _uniform(4)
    sigma = select_sigma(mesh, "toward_corner")
    f = make_polynomial_field(rng.normal(size=(3, 3)))
    p = quasi_interp(f, mesh, sigma)
    X, Y = np.meshgrid(np.linspace(0, 1, 17), np.linspace(0, 1, 17), indexing="ij")
    assert np.max(np.abs(p.evaluate(X, Y) - f(X, Y))) < 1e-11


def test_quasi_output_is_c1_across_macro_interfaces():
    mesh = _uniform(4)
    sigma = select_sigma(mesh, "toward_corner")
    f = make_smooth_field("sin_sin")
    p = quasi_interp(f, mesh, sigma)
    ts = np.linspace(0.0, 1.0, 100)
    for xline in (0.25, 0.5, 0.75):
        for ax, ay in ((0, 0), (1, 0), (0, 1)):
            left = p.evaluate(np.full_like(ts, xline), ts, ax, ay, side=("-", "-"))
            right = p.evaluate(np.full_like(ts, xline), ts, ax, ay, side=("+", "-"))
            assert np.max(np.abs(left - right)) < 1e-10
    for yline in (0.25, 0.5, 0.75):
        for ax, ay in ((0, 0), (1, 0), (0, 1)):
            below = p.evaluate(ts, np.full_like(ts, yline), ax, ay, side=("-", "-"))
            above = p.evaluate(ts, np.full_like(ts, yline), ax, ay, side=("-", "+"))
            assert np.max(np.abs(below - above)) < 1e-10
