"""Cancellation networks r_{L+1} o s_L o r_L o ... o s_1 o r_1.

Each r_i (i <= L) approximates the inverse of the activation that follows
it, so the block S_i = s_i o r_i o ... o s_1 o r_1 tends to the identity and
the whole map tends to the final fit r_{L+1} of the target.  Every r_i is a
spline network fitted on the margin-extended cube [-mu, 1 + mu]^d, because
the blocks only approximately map the unit cube into itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bspline import fit_spline
from .errors import ArgumentError, DomainError, IntermediateEscape
from .harness import ErrorReport, Grid, c1_error
from .poly import RationalFunction
from .ratnet import BuildConfig, RationalNetwork, build_spline_net, eval_net_with_grad

DEFAULT_MARGIN = 0.05


@dataclass(frozen=True)
class BaseActivation:
    name: str
    forward: Callable
    derivative: Callable
    inverse: Callable
    inverse_derivative: Callable
    inverse_domain: tuple  # open interval on which the inverse is analytic


ACTIVATIONS = {
    "exp1": BaseActivation(
        "exp1", lambda x: np.expm1(x), lambda x: np.exp(x),
        lambda y: np.log1p(y), lambda y: 1.0 / (1.0 + y), (-1.0, np.inf)),
    "atan2": BaseActivation(
        "atan2", lambda x: 2.0 * np.arctan(x), lambda x: 2.0 / (1.0 + x * x),
        lambda y: np.tan(y / 2.0), lambda y: 0.5 / np.cos(y / 2.0) ** 2, (-np.pi, np.pi)),
    "identity": BaseActivation(
        "identity", lambda x: x, lambda x: np.ones_like(x),
        lambda y: y, lambda y: np.ones_like(y), (-np.inf, np.inf)),
}


def get_activation(name):
    if isinstance(name, BaseActivation):
        return name
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ArgumentError(f"unknown activation {name!r}; known: {', '.join(ACTIVATIONS)}")


@dataclass(frozen=True)
class SymbolicNet:
    rationals: tuple  # RationalNetwork or RationalFunction, L + 1 of them
    activations: tuple
    d: int = 1
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if len(self.rationals) != len(self.activations) + 1:
            raise ArgumentError("need exactly one more rational map than activations")

    @property
    def L(self):
        return len(self.activations)

    def __call__(self, x):
        return eval_symnet(self, x)

    def grad(self, x):
        return grad_symnet(self, x)

    def value_and_grad(self, x):
        v, g, _ = _forward(self, x)
        return v, g


def _apply(r, z):
    """Values (P, p) and Jacobian (P, p, k) of one rational map at z (P, k)."""
    if isinstance(r, RationalNetwork):
        v, g = eval_net_with_grad(r, z)
        return v, g
    if isinstance(r, RationalFunction):
        v, g = r.value_and_grad(z[:, 0] if r.dim == 1 else z)
        return v.reshape(-1, 1), g.reshape(z.shape[0], 1, z.shape[1])
    raise ArgumentError(f"unsupported rational map {type(r).__name__}")


def _domain_of(r, margin):
    if isinstance(r, RationalNetwork):
        return r.domain
    return (-margin, 1.0 + margin)


def _forward(net, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1 and net.d > 1 or x.ndim == 0
    z = x.reshape(-1, net.d)
    if np.any((z < 0.0) | (z > 1.0)):
        raise DomainError("symbolic networks are evaluated on the unit cube")
    P = z.shape[0]
    jac = np.broadcast_to(np.eye(net.d), (P, net.d, net.d)).copy()
    blocks = []
    for i, r in enumerate(net.rationals):
        if i > 0:
            lo, hi = _domain_of(r, net.margin)
            bad = (z < lo - 1e-12) | (z > hi + 1e-12)
            if np.any(bad):
                raise IntermediateEscape(i, float(z[bad].flat[0]), (lo, hi))
            z = np.clip(z, lo, hi)
        v, g = _apply(r, z)
        jac = np.einsum("pij,pjk->pik", g, jac)
        if i < net.L:
            act = net.activations[i]
            jac = act.derivative(v)[:, :, None] * jac
            z = act.forward(v)
            blocks.append((z, jac))
        else:
            z = v
    if single:
        return z[0], jac[0], blocks
    return z, jac, blocks


def eval_symnet(net, x):
    """Values, shape (P, p)."""
    return _forward(net, x)[0]


def grad_symnet(net, x):
    """Jacobian, shape (P, p, d)."""
    return _forward(net, x)[1]


def cancellation_blocks(net, x):
    """[(S_i(x), DS_i(x))] for i = 1..L."""
    return _forward(net, x)[2]


def _fit_network(sampler, beta, N, M, d, p, domain, epsilon, oracle):
    cfg = BuildConfig(beta=beta, N=N, M=M, d=d, p=p, epsilon=epsilon)
    spline = fit_spline(sampler, cfg.q, N, d=d, p=p, domain=domain)
    return build_spline_net(cfg, spline, oracle=oracle)


def build_cancellation_net(f_sampler, activations, N, beta=3.0, d=1, p=1, M=None,
                           epsilon=1.5, margin=DEFAULT_MARGIN, oracle=False):
    """Fit r_i ~ inverse of activation i and r_{L+1} ~ f, all by spline networks.

    ``M`` defaults to round(N ** epsilon).  With no activations the result is
    the plain network fit of f on the unit cube.  ``oracle=True`` keeps exact
    ReQU in every network, isolating the spline part of the error.
    """
    acts = tuple(get_activation(a) for a in activations)
    ext = (-margin, 1.0 + margin)
    for a in acts:
        lo, hi = a.inverse_domain
        if not (lo < ext[0] and ext[1] < hi):
            raise DomainError(f"inverse of {a.name} is not defined on {ext}")
    rats = []
    for a in acts:
        def inv(x, a=a):
            return a.inverse(x)
        rats.append(_fit_network(inv, beta, N, M, d, d, ext, epsilon, oracle))
    last_domain = ext if acts else (0.0, 1.0)
    rats.append(_fit_network(f_sampler, beta, N, M, d, p, last_domain, epsilon, oracle))
    return SymbolicNet(tuple(rats), acts, d, margin)


class _Identity:
    def __init__(self, d):
        self.d = d

    def __call__(self, x):
        return x

    def grad(self, x):
        return np.broadcast_to(np.eye(self.d), (x.shape[0], self.d, self.d))


@dataclass(frozen=True)
class ScanEntry:
    N: int
    report: ErrorReport
    cancel_errors: tuple  # sup |S_i - id| over the grid, i = 1..L
    cancel_c1_errors: tuple

    @property
    def c0_error(self):
        return self.report.c0_error

    @property
    def c1_error(self):
        return self.report.c1_error


def convergence_scan(net_builder, schedule, target, grid_size=None, d=1):
    """Error series of the networks ``net_builder(N)`` for N in ``schedule``."""
    grid = Grid(grid_size or (2001 if d == 1 else 101), d)
    x = grid.points()
    ident = _Identity(d)
    out = []
    for N in schedule:
        net = net_builder(N)
        rep = c1_error(target, net, grid)
        c0s, c1s = [], []
        for z, jac in cancellation_blocks(net, x):
            e0 = float(np.abs(z - x).max())
            c0s.append(e0)
            c1s.append(e0 + float(np.abs(jac - ident.grad(x)).max()))
        out.append(ScanEntry(int(N), rep, tuple(c0s), tuple(c1s)))
    return out


def lipschitz_on_grid(r, margin=DEFAULT_MARGIN, n=4001):
    """max |r'| over a grid of the map's domain (d = 1)."""
    lo, hi = _domain_of(r, margin)
    z = np.linspace(lo, hi, n)[:, None]
    _, g = _apply(r, z)
    return float(np.abs(g).max())
