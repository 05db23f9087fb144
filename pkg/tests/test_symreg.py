import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import central_jacobian
from ratc1.bspline import fit_spline
from ratc1.errors import ArgumentError, DomainError, IntermediateEscape
from ratc1.harness import Grid, c1_error, get_target
from ratc1.poly import DensePolynomial, RationalFunction
from ratc1.ratnet import BuildConfig, build_spline_net, identity_network
from ratc1.symreg import (ACTIVATIONS, SymbolicNet, build_cancellation_net, cancellation_blocks,
                          convergence_scan, eval_symnet, get_activation, grad_symnet,
                          lipschitz_on_grid)

SIN = get_target("sin2pi")
SCHEDULE = (4, 8, 16, 32)


def build(acts, N, eps=1.5, target=SIN):
    return build_cancellation_net(target.sampler, acts, N, epsilon=eps)


def scan(acts, target=SIN, schedule=SCHEDULE):
    return convergence_scan(lambda N: build(acts, N, target=target), schedule, target)


@pytest.mark.parametrize("name", sorted(ACTIVATIONS))
@given(y=st.floats(0, 1))
def test_inverse_round_trip(name, y):
    a = ACTIVATIONS[name]
    assert a.forward(a.inverse(y)) == pytest.approx(y, abs=1e-12)


@pytest.mark.parametrize("name", sorted(ACTIVATIONS))
def test_activation_derivatives(name):
    a = ACTIVATIONS[name]
    x = np.linspace(-0.05, 1.05, 101)
    h = 1e-6
    assert np.allclose(a.derivative(x), (a.forward(x + h) - a.forward(x - h)) / (2 * h), atol=1e-8)
    assert np.allclose(a.inverse_derivative(x), (a.inverse(x + h) - a.inverse(x - h)) / (2 * h),
                       atol=1e-8)
    # the inverse is smooth on the unit interval: bounded second divided differences
    u = np.linspace(0, 1, 201)
    d2 = np.diff(a.inverse(u), 2) / (u[1] - u[0]) ** 2
    assert np.abs(d2).max() < 10


def test_unknown_activation():
    with pytest.raises(ArgumentError):
        get_activation("relu")


def test_identity_composition_is_identity():
    net = SymbolicNet((identity_network(), identity_network()), (ACTIVATIONS["identity"],))
    x = np.linspace(0, 1, 11)[:, None]
    assert np.array_equal(eval_symnet(net, x), x)
    assert np.array_equal(grad_symnet(net, x), np.ones((11, 1, 1)))
    rnet = SymbolicNet((RationalFunction.identity(domain=(0, 1)),) * 2, (ACTIVATIONS["identity"],))
    assert np.array_equal(eval_symnet(rnet, x), x)


def test_no_activations_is_plain_network_fit():
    net = build((), 8)
    s = fit_spline(SIN.sampler, 3, 8)
    plain = build_spline_net(BuildConfig(3.0, 8, M=net.rationals[0].meta["M"]), s)
    x = np.linspace(0, 1, 501)[:, None]
    assert np.array_equal(eval_symnet(net, x), plain(x))


def test_pointwise_error_decreases():
    errs = [abs(eval_symnet(build(("exp1",), N), np.array([[0.5]]))[0, 0]) for N in SCHEDULE]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_two_activation_level():
    rep = c1_error(SIN, build(("exp1", "atan2"), 32), Grid(2001))
    assert rep.c0_error <= 1e-2


def test_cancellation_block_at_top_entry():
    net = build(("exp1",), 32)
    x = np.linspace(0, 1, 2001)[:, None]
    (z, _), = cancellation_blocks(net, x)
    assert np.abs(z - x).max() <= 5e-2


@pytest.mark.parametrize("acts", [("exp1",), ("atan2",), ("exp1", "atan2"), ("atan2", "exp1")])
def test_convergence_scan_trends(acts):
    series = scan(acts)
    c0 = [e.c0_error for e in series]
    c1 = [e.c1_error for e in series]
    assert all(b < a for a, b in zip(c0, c0[1:]))
    assert all(b < a for a, b in zip(c1, c1[1:]))
    for i in range(len(acts)):
        cancel = [e.cancel_errors[i] for e in series]
        assert all(b <= a for a, b in zip(cancel, cancel[1:]))


def test_constant_target_scan():
    one = get_target("const1")
    exact = convergence_scan(
        lambda N: build_cancellation_net(one.sampler, ("exp1",), N, oracle=True), SCHEDULE, one)
    for e in exact:
        assert e.c0_error <= 1e-9 and e.c1_error <= 1e-8
    # with rational activations a constant is reproduced up to the substitution error
    c1 = [e.c1_error for e in scan(("exp1",), target=one)]
    assert all(b < a for a, b in zip(c1, c1[1:])) and c1[-1] <= 1e-8


def test_error_composition_bound():
    x = np.linspace(0, 1, 2001)[:, None]
    for N in SCHEDULE:
        net = build(("exp1",), N)
        last = net.rationals[-1]
        lip = lipschitz_on_grid(last)
        (z, _), = cancellation_blocks(net, x)
        total = np.abs(eval_symnet(net, x) - SIN(x)).max()
        fit = np.abs(last(x) - SIN(x)).max()
        assert total <= lip * np.abs(z - x).max() + fit + 1e-10


@pytest.mark.parametrize("acts", [("exp1",), ("exp1", "atan2")])
def test_gradient_matches_finite_differences(acts):
    net = build(acts, 8)
    pts = np.random.default_rng(0).uniform(0.01, 0.99, (25, 1))
    fd = central_jacobian(lambda p: eval_symnet(net, p), pts, 1e-5)
    assert np.abs(grad_symnet(net, pts) - fd).max() <= 1e-4


def test_intermediate_escape_reported():
    shift = RationalFunction(DensePolynomial([0.5, 1.0]), domain=(0, 1))  # x + 0.5
    net = SymbolicNet((shift, RationalFunction.identity(domain=(0, 1))), (ACTIVATIONS["identity"],))
    with pytest.raises(IntermediateEscape) as info:
        eval_symnet(net, np.array([[0.9]]))
    assert info.value.layer == 1 and info.value.value == pytest.approx(1.4)
    assert eval_symnet(net, np.array([[0.5]]))[0, 0] == pytest.approx(1.0)


def test_input_domain_and_margin_checks():
    net = build(("exp1",), 4)
    with pytest.raises(DomainError):
        eval_symnet(net, np.array([[1.2]]))
    with pytest.raises(DomainError):
        build_cancellation_net(SIN.sampler, ("exp1",), 4, margin=1.5)
    with pytest.raises(ArgumentError):
        SymbolicNet((identity_network(),), (ACTIVATIONS["exp1"],))
