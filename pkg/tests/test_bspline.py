import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.interpolate import BSpline

from ratc1.bspline import (EXACT, BSplineBasis, NewmanReQU, TensorSpline, activation_for,
                           eval_B2, eval_B2_prime, eval_tensor_spline,
                           eval_tensor_spline_grad, fit_spline, make_knots, quad_terms)
from ratc1.errors import ArgumentError, DomainError, SingularFit, SizeCapExceeded
from conftest import central_jacobian

qs = st.integers(2, 5)
Ns = st.integers(2, 12)


def cox_de_boor(knots, z):
    """Normalized degree-q B-splines from scipy, left limit at z = 1."""
    a, q = knots.a, knots.q
    z = np.minimum(z, np.nextafter(1.0, 0.0))
    out = [np.nan_to_num(BSpline.basis_element(a[j:j + q + 2], extrapolate=False)(z))
           for j in range(len(a) - q - 1)]
    return np.array(out).T


def test_knot_examples():
    assert make_knots(3, 4).a.tolist() == [0, 0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1, 1]
    assert make_knots(2, 2).a.tolist() == [0, 0, 0, 0.5, 1, 1, 1]
    assert len(make_knots(5, 16)) == 27
    with pytest.raises(ArgumentError):
        make_knots(1, 4)
    with pytest.raises(ArgumentError):
        make_knots(3, 1)


@given(qs, Ns)
def test_knots_nondecreasing_and_clamped(q, N):
    a = make_knots(q, N).a
    assert np.all(np.diff(a) >= 0) and len(a) == 2 * q + N + 1
    assert np.all(a[: q + 1] == 0) and np.all(a[-(q + 1):] == 1)


def test_order_two_examples():
    k = make_knots(3, 4)
    assert eval_B2(k, 2, 0.0) == pytest.approx(4.0)
    assert eval_B2(k, 7, 1.0) == pytest.approx(4.0)
    assert eval_B2(k, 3, 0.0) == 0.0
    with pytest.raises(IndexError):
        eval_B2(k, 0, 0.5)
    with pytest.raises(IndexError):
        eval_B2(k, 2 * 3 + 4 - 1, 0.5)
    with pytest.raises(DomainError):
        eval_B2(k, 3, 1.2)


@given(qs, Ns)
def test_five_case_layout(q, N):
    k = make_knots(q, N)
    cases = [quad_terms(k, j).case for j in range(1, 2 * q + N - 1)]
    assert cases.count("left_outer") == 1 and cases.count("left_inner") == 1
    assert cases.count("right_inner") == 1 and cases.count("right_outer") == 1
    assert cases.count("interior") == N - 2
    assert all(c == "zero" for j, c in enumerate(cases, 1) if j < q - 1 or j > q + N)


@given(qs, Ns)
def test_order_two_matches_cox_de_boor(q, N):
    # unnormalized order-2 spline j spans knots a_j .. a_{j+3}
    k = make_knots(q, N)
    z = np.linspace(0, 1, 257)
    sweep = BSplineBasis(k).sweep(z, 2)[2][0]
    ref = cox_de_boor(make_knots(2, N), z)  # same interior knots, degree 2
    gaps = np.array([k.at(j + 3) - k.at(j) for j in range(q - 1, q + N + 1)])
    got = sweep[q - 2: q + N].T * gaps
    assert np.abs(got - ref).max() <= 1e-12


@given(st.integers(2, 5), Ns)
def test_top_order_matches_cox_de_boor(q, N):
    b = BSplineBasis(make_knots(q, N))
    z = np.linspace(0, 1, 401)
    vals, _ = b.design(z)
    assert np.abs(vals - cox_de_boor(b.knots, z)).max() <= 1e-11


@given(qs, Ns, st.lists(st.floats(0, 1), min_size=1, max_size=20))
def test_partition_of_unity(q, N, z):
    vals, ders = BSplineBasis(make_knots(q, N)).design(np.array(z))
    assert np.allclose(vals.sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(ders.sum(axis=1), 0.0, atol=1e-9 * N ** 2)


def test_vanishing_gaps_give_zero():
    b = BSplineBasis(make_knots(3, 4))
    z = np.linspace(0, 1, 50)
    a = b.knots
    for m in (2, 3):
        for j in range(1, b.count(m) + 1):
            if a.at(j) == a.at(j + m + 1):
                assert np.all(b.eval_Bm(j, m, z) == 0.0)


def test_top_order_sup_bound():
    b = BSplineBasis(make_knots(3, 8))
    vals = b.sweep(np.linspace(0, 1, 10_000))[3][0]
    assert np.abs(vals).max() <= 16


@pytest.mark.parametrize("q,N", [(2, 4), (3, 8), (4, 5)])
def test_derivatives_match_finite_differences(q, N):
    b = BSplineBasis(make_knots(q, N))
    z = np.linspace(0.0005, 0.9995, 3001)
    knots = np.unique(b.knots.a)
    z = z[np.min(np.abs(z[:, None] - knots[None]), axis=1) > 1e-3]
    h = 1e-6
    for m in range(2, q + 1):
        for j in range(1, b.count(m) + 1):
            fd = (b.eval_Bm(j, m, z + h) - b.eval_Bm(j, m, z - h)) / (2 * h)
            assert np.abs(b.eval_Bm_prime(j, m, z) - fd).max() <= 1e-5 * max(1, N ** 2 / 10)
    k = make_knots(q, N)
    fd = (eval_B2(k, q, z + h) - eval_B2(k, q, z - h)) / (2 * h)
    assert np.abs(eval_B2_prime(k, q, z) - fd).max() <= 1e-5 * N ** 2


def test_index_errors():
    b = BSplineBasis(make_knots(3, 4))
    with pytest.raises(IndexError):
        b.eval_Bm(0, 3, 0.5)
    with pytest.raises(IndexError):
        b.eval_Bm(b.count(3) + 1, 3, 0.5)
    with pytest.raises(IndexError):
        b.eval_Bm(1, 4, 0.5)


def test_newman_activation_converges_to_exact():
    k = make_knots(3, 4)
    z = np.linspace(0, 1, 2001)
    exact = BSplineBasis(k).sweep(z)[3]
    errs = []
    for M in (4, 16, 64):
        approx = BSplineBasis(k, NewmanReQU(M)).sweep(z)[3]
        errs.append(max(np.abs(approx[0] - exact[0]).max(), np.abs(approx[1] - exact[1]).max()))
    assert errs[0] > errs[1] > errs[2]
    assert activation_for(None) is EXACT and activation_for(8) == NewmanReQU(8)


def test_verbatim_right_boundary_discrepancy():
    # the as-written right-inner coefficients (1, -2, -3) equal the true spline
    # plus half of the outermost one: N/2 at z = 1, and q >= 3 loses x^2
    for N in (4, 8):
        k = make_knots(2, N)
        j = 2 + N - 1
        assert eval_B2(k, j, 1.0, boundary="verbatim") == pytest.approx(N / 2)
        assert eval_B2(k, j, 1.0, boundary="symmetric") == pytest.approx(0.0, abs=1e-12)
        z = np.linspace(0, 1, 101)
        diff = eval_B2(k, j, z, boundary="verbatim") - eval_B2(k, j, z)
        assert np.allclose(diff, 0.5 * eval_B2(k, j + 1, z))
    x = np.linspace(0, 1, 1001)
    sym = fit_spline(lambda p: p[:, 0] ** 2, 3, 4)
    verb = fit_spline(lambda p: p[:, 0] ** 2, 3, 4, boundary="verbatim")
    assert np.abs(sym(x)[:, 0] - x ** 2).max() <= 1e-8
    assert np.abs(verb(x)[:, 0] - x ** 2).max() > 1e-3


def test_boundary_mode_validated():
    with pytest.raises(ArgumentError):
        quad_terms(make_knots(3, 4), 3, boundary="other")


# -- tensor splines ---------------------------------------------------------

@pytest.mark.parametrize("N", [4, 8, 16])
def test_quadratic_reproduction(N):
    s = fit_spline(lambda p: p[:, 0] ** 2, 3, N)
    x = np.linspace(0, 1, 10_001)
    assert np.abs(s(x)[:, 0] - x ** 2).max() <= 1e-8


def test_zero_target_gives_zero_weights():
    s = fit_spline(lambda p: np.zeros(len(p)), 3, 6, d=2)
    assert np.abs(s.weights).max() <= 1e-12
    x = np.random.default_rng(0).uniform(0, 1, (20, 2))
    assert np.all(s(x) == 0) and np.all(s.grad(x) == 0)


def test_single_weight_is_scaled_basis_function():
    b = BSplineBasis(make_knots(3, 5))
    w = np.zeros((1, 8))
    w[0, 3] = 2.5
    s = TensorSpline(1, 1, b, w)
    z = np.linspace(0, 1, 33)
    assert np.allclose(s(z)[:, 0], 2.5 * b.gaps()[3] * b.eval_Bm(4, 3, z))


def test_tensor_evaluation_formula():
    # sum_j w_j prod_l gap_{j_l} B_{j_l}(x_l), against direct loops
    rng = np.random.default_rng(3)
    b = BSplineBasis(make_knots(3, 3))
    w = rng.normal(size=(2, 6, 6))
    s = TensorSpline(2, 2, b, w)
    x = rng.uniform(0, 1, (7, 2))
    g = b.gaps()
    B = [np.array([b.eval_Bm(j, 3, x[:, l]) for j in range(1, 7)]) for l in range(2)]
    want = np.einsum("pij,in,jn,i,j->np", w, B[0], B[1], g, g)
    assert np.allclose(eval_tensor_spline(s, x), want, atol=1e-12)


def test_gradient_matches_finite_differences():
    f = lambda p: np.sin(2 * np.pi * p[:, 0]) * np.cos(np.pi * p[:, 1])
    s = fit_spline(f, 3, 8, d=2)
    pts = np.random.default_rng(0).uniform(0.01, 0.99, (50, 2))
    fd = central_jacobian(s, pts, 1e-6)
    assert np.abs(eval_tensor_spline_grad(s, pts) - fd).max() <= 1e-5


def test_vector_valued_fit():
    f = lambda p: np.stack([p[:, 0] ** 2, 1 - p[:, 0]], axis=1)
    s = fit_spline(f, 3, 4, p=2)
    x = np.linspace(0, 1, 101)
    assert np.allclose(s(x), f(x[:, None]), atol=1e-8)
    assert s.grad(x).shape == (101, 2, 1)


def test_domain_mapping_and_errors():
    f = lambda p: np.exp(p[:, 0])
    s = fit_spline(f, 3, 8, domain=(-0.5, 1.5))
    x = np.linspace(-0.5, 1.5, 101)
    assert np.abs(s(x)[:, 0] - np.exp(x)).max() <= 1e-3
    assert np.abs(s.grad(x)[:, 0, 0] - np.exp(x)).max() <= 1e-2
    with pytest.raises(DomainError):
        s(np.array([1.6]))
    with pytest.raises(DomainError):
        fit_spline(f, 3, 4)(np.array([-0.01]))


def test_json_round_trip():
    s = fit_spline(lambda p: np.sin(3 * p[:, 0]) * p[:, 1], 3, 5, d=2)
    t = TensorSpline.from_json(s.to_json())
    x = np.random.default_rng(0).uniform(0, 1, (10, 2))
    assert np.array_equal(s(x), t(x))


def test_size_cap_and_singular_fit():
    with pytest.raises(SizeCapExceeded):
        fit_spline(lambda p: p[:, 0], 3, 60, d=3, size_cap=10_000)
    with pytest.raises(SingularFit):
        fit_spline(lambda p: np.full(len(p), np.nan), 3, 4)


def test_fit_is_deterministic():
    f = lambda p: np.sin(2 * np.pi * p[:, 0])
    assert np.array_equal(fit_spline(f, 3, 8).weights, fit_spline(f, 3, 8).weights)
