import numpy as np
import pytest

from macrospline.fields import make_polynomial_field, make_smooth_field
from macrospline.interpolation import interp_full_macro
from macrospline.mesh import build_macro_mesh
from macrospline.oracles import (
    HERMITE_NODE_SEQS,
    KnotSequence,
    aniso_functional_checks,
    bound_consistency,
    bound_spec_catalog,
    brute_force_divided_difference,
    check_duality_and_functionals,
    check_trace_inequality,
    divided_difference_2d,
    dual_weight_checks,
    fd_check,
    kronecker_table,
    orthogonality_checks,
    peano_checks,
    reduced_functional_checks,
)
from macrospline.spline_core import divided_difference


def test_fd_check_polynomial():
    f = make_polynomial_field(np.random.default_rng(0).normal(size=(3, 3)))
    pts = np.random.default_rng(1).uniform(0.2, 0.8, size=(30, 2))
    for alpha in ((1, 0), (1, 1), (2, 2)):
        assert fd_check(f, alpha, pts, step=5e-2) < 1e-9


def test_fd_check_sin():
    f = make_smooth_field("sin_sin")
    pts = np.random.default_rng(2).uniform(0.1, 0.9, size=(50, 2))
    for alpha in ((1, 0), (0, 2), (2, 2)):
        assert fd_check(f, alpha, pts) < 1e-6


def test_fd_check_interpolant():
    f = make_smooth_field("exp_xy")
    p = interp_full_macro(f, (0.0, 1.0, 0.0, 1.0))
    # interior points of one element, clear of the knot lines
    pts = np.random.default_rng(3).uniform(0.1, 0.4, size=(20, 2))
    for alpha in ((1, 0), (1, 1), (2, 2)):
        assert fd_check(lambda x, y, ax, ay: p.evaluate(x, y, ax, ay), alpha, pts, step=2e-2) < 1e-8


def test_fd_check_step_underflow():
    f = make_smooth_field("sin_sin")
    with pytest.raises(ValueError):
        fd_check(f, (1, 0), [(0.5, 0.5)], step=1e-12)


def test_brute_force_dd_matches_table_algorithm():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        n_knots = rng.integers(1, 4)
        positions = np.sort(rng.uniform(-1, 1, size=n_knots))
        while len(positions) > 1 and np.min(np.diff(positions)) < 1e-3:
            positions = np.sort(rng.uniform(-1, 1, size=n_knots))
        mults = rng.integers(1, 4, size=n_knots)
        ks = KnotSequence(tuple((float(p), int(m)) for p, m in zip(positions, mults)))
        coeffs = rng.normal(size=7)

        def f1d(x, order):
            d = coeffs
            for _ in range(order):
                d = np.polynomial.polynomial.polyder(d)
            return float(np.polynomial.polynomial.polyval(x, d))

        data = [[f1d(p, k) for k in range(m)] for (p, m) in ks.nodes]
        a = divided_difference(ks, data)
        b = brute_force_divided_difference(ks, f1d)
        assert a == pytest.approx(b, abs=1e-12 * max(1.0, abs(b)))


def test_brute_force_dd_constant():
    ks = KnotSequence(((0.0, 1), (1.0, 2)))
    assert brute_force_divided_difference(ks, lambda x, o: 3.0 if o == 0 else 0.0) == pytest.approx(0.0, abs=1e-15)


def test_brute_force_dd_closed_forms():
    rng = np.random.default_rng(8)
    c = rng.normal(size=5)

    def f1d(x, order):
        d = c
        for _ in range(order):
            d = np.polynomial.polynomial.polyder(d)
        return float(np.polynomial.polynomial.polyval(x, d))

    u_m, du_m, u_p, du_p = f1d(-1, 0), f1d(-1, 1), f1d(1, 0), f1d(1, 1)
    assert brute_force_divided_difference(KnotSequence(((-1.0, 2), (1.0, 1))), f1d) == pytest.approx(
        0.25 * (u_p - u_m) - 0.5 * du_m, abs=1e-13
    )
    assert brute_force_divided_difference(KnotSequence(((-1.0, 2), (1.0, 2))), f1d) == pytest.approx(
        0.25 * (u_m - u_p + du_m + du_p), abs=1e-13
    )


def test_2d_divided_difference_invariance_under_full_interpolation():
    rng = np.random.default_rng(11)
    for _ in range(50):
        u = make_polynomial_field(rng.normal(size=(4, 4)))
        p = interp_full_macro(u, (-1.0, 1.0, -1.0, 1.0))
        for i in range(1, 5):
            for j in range(1, 5):
                xs, ys = HERMITE_NODE_SEQS[i], HERMITE_NODE_SEQS[j]
                du = divided_difference_2d(u, xs, ys)
                dp = divided_difference_2d(lambda x, y, ax, ay: p.evaluate(x, y, ax, ay), xs, ys)
                assert du == pytest.approx(dp, abs=1e-11 * max(1.0, abs(du)))


def test_kronecker_table():
    dev, table = kronecker_table()
    assert dev < 1e-12
    assert table.shape == (16, 16)


def test_identity_suites_pass():
    for result in dual_weight_checks() + orthogonality_checks() + peano_checks() + reduced_functional_checks() + aniso_functional_checks():
        assert result.passed, f"{result.name}: {result.value:.3e} > {result.tolerance:.1e}"


def test_full_suite_aggregator():
    results = check_duality_and_functionals()
    assert len(results) > 50
    assert all(r.passed for r in results)


def test_trace_inequality_constant_equality():
    c = make_polynomial_field([[2.0]])
    hx, hy = 0.5, 0.125
    lhs, rhs = check_trace_inequality(c, (0.0, hx, 0.0, hy))
    assert lhs == pytest.approx(2 * hy * 4.0, rel=1e-12)
    assert lhs == pytest.approx(rhs, rel=1e-12)  # v_x = 0 makes it sharp


def test_trace_inequality_random_and_stretched():
    rng = np.random.default_rng(13)
    for trial in range(100):
        f = make_polynomial_field(rng.normal(size=(3, 3)))
        aspect = 10.0 ** rng.uniform(0, 6)
        el = (0.0, 1.0, 0.0, 1.0 / aspect)
        lhs, rhs = check_trace_inequality(f, el)
        assert lhs <= rhs * (1 + 1e-10)


def test_bound_consistency_reproduction_class():
    specs = bound_spec_catalog()
    meshes = [build_macro_mesh(np.linspace(0, 1, n + 1), np.linspace(0, 1, n + 1)) for n in (2, 4)]
    f = make_polynomial_field([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])  # x^2
    res = bound_consistency(specs["reduced_dx"], f, meshes)
    assert res["zero_rhs_ok"]
    assert not res["sup_ratios"]


def test_bound_consistency_bounded_ratios_smoke():
    specs = bound_spec_catalog()
    f = make_smooth_field("sin_sin")
    meshes = [build_macro_mesh(np.linspace(0, 1, n + 1), np.linspace(0, 1, n + 1)) for n in (2, 4, 8)]
    for name in ("full_g10", "bfs_g00"):
        res = bound_consistency(specs[name], f, meshes)
        assert res["max_over_min"] < 4.0
        assert res["zero_rhs_ok"]
