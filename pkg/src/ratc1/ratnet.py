"""Rational neural networks and the constructive spline network.

A network is a list of layers; each node maps the previous layer's outputs
to one real number.  Node kinds:

``affine``       sum_k w_k z_{in_k} + b                      (degree 1)
``newman_requ``  x^2 (1 + r_M(x)) / 2 applied to an affine map (degree M+1)
``requ_exact``   max(x, 0)^2 applied to an affine map        (oracle mode only)
``rational``     p(z_in) / q(z_in) with sparse polynomials

Derivatives are propagated forward alongside values, one tangent per input
coordinate, with the quotient rule at every rational node.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bspline import BSplineBasis, TensorSpline, make_knots, quad_terms
from .errors import ArgumentError, ConfigMismatch, DenominatorNearZero
from .newman import NewmanBasis, as_rational, eval_repu_pair
from .poly import (DEFAULT_TERM_CAP, FactoredRational, RationalFunction,
                   SparseMultiPolynomial, eval_poly_factored)

KINDS = ("affine", "newman_requ", "requ_exact", "rational")
DEN_FLOOR = 1e-300


@dataclass(frozen=True)
class RationalNode:
    kind: str
    input_dim: int
    inputs: tuple
    weights: tuple = ()
    bias: float = 0.0
    M: int | None = None
    rational: RationalFunction | None = None
    tag: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown node kind {self.kind!r}")
        if any(not 0 <= i < self.input_dim for i in self.inputs):
            raise ArgumentError(f"node {self.tag!r} reads outside its input layer")
        if self.kind == "rational":
            if self.rational is None or self.rational.dim != len(self.inputs):
                raise ArgumentError("rational node needs a rational of dim len(inputs)")
        elif len(self.weights) != len(self.inputs):
            raise ArgumentError("one weight per input")
        if self.kind == "newman_requ" and (self.M is None or self.M < 1):
            raise ArgumentError("newman_requ needs M >= 1")

    @property
    def degree_bound(self):
        """Degree used in the width/depth/degree accounting (None: not rational)."""
        if self.kind == "affine":
            return 1
        if self.kind == "newman_requ":
            return self.M + 1
        if self.kind == "requ_exact":
            return None
        return self.rational.degree_bound

    @property
    def expanded_degree(self):
        """Degree of the explicit numerator/denominator representation."""
        if self.kind == "newman_requ":
            return self.M + 2
        return self.degree_bound

    @classmethod
    def identity(cls, input_dim, i, tag=""):
        return cls("affine", input_dim, (i,), (1.0,), 0.0, tag=tag)

    def to_json(self):
        params = {"inputs": list(self.inputs), "tag": self.tag}
        if self.kind == "rational":
            params["rational"] = self.rational.to_json()
        else:
            params["weights"] = list(self.weights)
            params["bias"] = self.bias
        if self.M is not None:
            params["M"] = self.M
        return {"kind": self.kind, "params": params, "degree_bound": self.degree_bound}

    @classmethod
    def from_json(cls, obj, input_dim):
        p = obj["params"]
        rational = None
        if obj["kind"] == "rational":
            rational = RationalFunction.from_json(p["rational"], check=False)
        return cls(obj["kind"], input_dim, tuple(p["inputs"]), tuple(p.get("weights", ())),
                   float(p.get("bias", 0.0)), p.get("M"), rational, p.get("tag", ""))


@dataclass(frozen=True)
class RationalNetwork:
    input_dim: int
    layers: tuple
    oracle_mode: bool = False
    domain: tuple = (0.0, 1.0)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        width = self.input_dim
        for k, layer in enumerate(self.layers):
            for node in layer:
                if node.input_dim != width:
                    raise ArgumentError(
                        f"layer {k + 1}: node expects {node.input_dim} inputs, layer has {width}")
                if node.kind == "requ_exact" and not self.oracle_mode:
                    raise ArgumentError("exact ReQU nodes are only legal in oracle mode")
            width = len(layer)

    @property
    def widths(self):
        return [self.input_dim] + [len(layer) for layer in self.layers]

    @property
    def depth(self):
        return len(self.layers)

    @property
    def width(self):
        return max(self.widths)

    @property
    def output_dim(self):
        return len(self.layers[-1])

    def __call__(self, x):
        return eval_net(self, x)

    def grad(self, x):
        return grad_net(self, x)

    def to_json(self):
        return {"input_dim": self.input_dim, "oracle": self.oracle_mode,
                "domain": list(self.domain), "meta": self.meta,
                "layers": [[n.to_json() for n in layer] for layer in self.layers]}

    @classmethod
    def from_json(cls, obj):
        width = obj["input_dim"]
        layers = []
        for layer in obj["layers"]:
            nodes = tuple(RationalNode.from_json(n, width) for n in layer)
            layers.append(nodes)
            width = len(nodes)
        return cls(obj["input_dim"], tuple(layers), obj.get("oracle", False),
                   tuple(obj.get("domain", (0.0, 1.0))), obj.get("meta", {}))

    def dumps(self):
        return json.dumps(self.to_json())


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

_NEWMAN = {}


def _newman(M):
    if M not in _NEWMAN:
        _NEWMAN[M] = NewmanBasis(M)
    return _NEWMAN[M]


def _affine(node, V, T):
    u = np.full(V.shape[1], node.bias)
    du = np.zeros(T.shape[1:]) if T is not None else None
    for i, w in zip(node.inputs, node.weights):
        u = u + w * V[i]
        if T is not None:
            du = du + w * T[i]
    return u, du


def _forward(net, x, with_grad):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1 and net.input_dim > 1 or x.ndim == 0
    x = np.atleast_2d(x) if net.input_dim > 1 else x.reshape(-1, 1)
    if x.shape[1] != net.input_dim:
        raise ValueError(f"expected points with {net.input_dim} coordinates")
    P, d = x.shape
    V = x.T.copy()
    T = np.broadcast_to(np.eye(d)[:, None, :], (d, P, d)).copy() if with_grad else None
    for depth, layer in enumerate(net.layers, start=1):
        newV = np.empty((len(layer), P))
        newT = np.empty((len(layer), P, d)) if with_grad else None
        groups = {}
        for k, node in enumerate(layer):
            if node.kind == "affine":
                newV[k], du = _affine(node, V, T)
                if with_grad:
                    newT[k] = du
            elif node.kind in ("newman_requ", "requ_exact"):
                groups.setdefault((node.kind, node.M), []).append(k)
            else:
                _rational_node(node, V, T, newV, newT, k, depth)
        for (kind, M), ks in groups.items():
            us = []
            dus = []
            for k in ks:
                u, du = _affine(layer[k], V, T)
                us.append(u)
                dus.append(du)
            U = np.stack(us)
            if kind == "newman_requ":
                # shifted arguments sit in [-1, 1] up to rounding
                U = np.clip(U, -1.0, 1.0)
                val, der = eval_repu_pair(_newman(M), 2, U)
            else:
                val, der = U.clip(min=0.0) ** 2, 2.0 * U.clip(min=0.0)
            newV[ks] = val
            if with_grad:
                newT[ks] = der[:, :, None] * np.stack(dus)
        V, T = newV, newT
    out = V.T
    grad = np.transpose(T, (1, 0, 2)) if with_grad else None
    if single:
        out = out[0]
        grad = grad[0] if with_grad else None
    return out, grad


def _rational_node(node, V, T, newV, newT, k, depth):
    Z = V[list(node.inputs)].T
    r = node.rational
    if T is None:
        num = r.num(Z[:, 0] if r.dim == 1 else Z)
        den = r.den(Z[:, 0] if r.dim == 1 else Z)
        _check_den(den, depth, node)
        newV[k] = num / den
        return
    from .poly import as_sparse
    n, gn = as_sparse(r.num).value_and_grad(Z)
    dd, gd = as_sparse(r.den).value_and_grad(Z)
    _check_den(dd, depth, node)
    newV[k] = n / dd
    gz = (gn * dd[:, None] - n[:, None] * gd) / (dd * dd)[:, None]  # (P, k_in)
    Tin = T[list(node.inputs)]  # (k_in, P, d)
    newT[k] = np.einsum("pk,kpd->pd", gz, Tin)


def _check_den(den, depth, node):
    if np.any(np.abs(den) < DEN_FLOOR):
        raise DenominatorNearZero(f"layer {depth} node {node.tag!r}: denominator underflow")


def eval_net(net, x):
    """Forward pass; points ``(P, d)`` give outputs ``(P, p)``."""
    out, _ = _forward(net, x, False)
    return out


def grad_net(net, x):
    """Jacobian at points ``(P, d)``, shape ``(P, p, d)``."""
    _, g = _forward(net, x, True)
    return g


def eval_net_with_grad(net, x):
    return _forward(net, x, True)


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BuildConfig:
    beta: float
    N: int
    M: int | None = None
    d: int = 1
    p: int = 1
    epsilon: float = 1.0

    def __post_init__(self):
        if not self.beta > 2:
            raise ArgumentError(f"beta must exceed 2, got {self.beta}")
        if self.N < 2:
            raise ArgumentError("N must be at least 2")
        if self.epsilon <= 0:
            raise ArgumentError("epsilon must be positive")

    @property
    def q(self):
        return int(math.floor(self.beta))

    @property
    def resolved_M(self):
        if self.M is not None:
            return int(self.M)
        return max(1, int(round(self.N ** self.epsilon)))


def build_spline_net(cfg, spline, oracle=False):
    """The layer stack of the constructive proof, realizing ``spline``.

    Layer 1: shifts t_i - j/N, 0 <= j <= N, where t maps the spline box to [0,1].
    Layer 2: ReQU (or its rational approximant) of every shift, of -t_i,
             1/N - t_i and 2/N - t_i, plus t_i passed through.
    Layer 3: order-2 splines j = q-1..q+N as linear combinations, plus t_i.
    Layer m+1 (3 <= m <= q): order-m splines j = q-m+1..q+N by the recursion,
             plus t_i except in the last hidden layer.
    Output:  the degree-d tensor polynomial in the top-order splines.
    """
    q, N, d, p = cfg.q, cfg.N, cfg.d, cfg.p
    if (spline.q, spline.N, spline.d, spline.p) != (q, N, d, p):
        raise ConfigMismatch(
            f"spline (q={spline.q}, N={spline.N}, d={spline.d}, p={spline.p}) does not match "
            f"config (q={q}, N={N}, d={d}, p={p})")
    M = cfg.resolved_M
    lo, hi = spline.domain
    scale = 1.0 / (hi - lo)
    offset = -lo * scale
    knots = spline.basis.knots
    boundary = spline.basis.boundary
    layers = []

    # layer 1
    nodes, idx1 = [], {}
    for i in range(d):
        for j in range(N + 1):
            idx1[(i, j)] = len(nodes)
            nodes.append(RationalNode("affine", d, (i,), (scale,), offset - j / N,
                                      tag=f"shift[{i},{j}]"))
    layers.append(tuple(nodes))
    width = len(nodes)

    # layer 2
    act = "requ_exact" if oracle else "newman_requ"
    act_M = None if oracle else M
    nodes, idx2, pass2 = [], {}, {}
    for i in range(d):
        for j in range(N + 1):
            idx2[(i, 1, j)] = len(nodes)
            nodes.append(RationalNode(act, width, (idx1[(i, j)],), (1.0,), 0.0, act_M,
                                      tag=f"requ(t{i}-{j}/N)"))
        for j in range(3):
            idx2[(i, -1, j)] = len(nodes)
            nodes.append(RationalNode(act, width, (idx1[(i, 0)],), (-1.0,), j / N, act_M,
                                      tag=f"requ({j}/N-t{i})"))
        pass2[i] = len(nodes)
        nodes.append(RationalNode.identity(width, idx1[(i, 0)], tag=f"t{i}"))
    layers.append(tuple(nodes))
    width = len(nodes)

    # layer 3: order-2 splines
    nodes, idx, passthrough = [], {}, {}
    for i in range(d):
        for j in range(q - 1, q + N + 1):
            spl = quad_terms(knots, j, boundary)
            ins, ws = [], []
            for coeff, shift, orient in spl.terms:
                ins.append(idx2[(i, orient, int(round(shift * N)))])
                ws.append(coeff)
            idx[(i, j)] = len(nodes)
            nodes.append(RationalNode("affine", width, tuple(ins), tuple(ws), 0.0,
                                      tag=f"B2[{i},{j}]"))
        passthrough[i] = len(nodes)
        nodes.append(RationalNode.identity(width, pass2[i], tag=f"t{i}"))
    layers.append(tuple(nodes))
    width = len(nodes)

    # layers m+1: recursion
    a = knots.a
    for m in range(3, q + 1):
        nodes, new_idx, new_pass = [], {}, {}
        for i in range(d):
            for j in range(q - m + 1, q + N + 1):
                lo_k, hi_k = a[j - 1], a[j + m]
                gap = hi_k - lo_k
                ins = [passthrough[i]]
                terms = {}
                # local variable 0 is t, then the available lower-order splines
                if (i, j) in idx:
                    ins.append(idx[(i, j)])
                    v = len(ins) - 1
                    terms[_mono(3, (0, v))] = 1.0 / gap
                    terms[_mono(3, (v,))] = -lo_k / gap
                if (i, j + 1) in idx:
                    ins.append(idx[(i, j + 1)])
                    v = len(ins) - 1
                    terms[_mono(3, (0, v))] = terms.get(_mono(3, (0, v)), 0.0) - 1.0 / gap
                    terms[_mono(3, (v,))] = hi_k / gap
                k_in = len(ins)
                terms = {e[:k_in]: c for e, c in terms.items()}
                num = SparseMultiPolynomial(k_in, terms)
                rat = RationalFunction(num, SparseMultiPolynomial.constant(k_in, 1.0),
                                       degree_bound=2, check=False)
                new_idx[(i, j)] = len(nodes)
                nodes.append(RationalNode("rational", width, tuple(ins), rational=rat,
                                          tag=f"B{m}[{i},{j}]"))
            if m < q:
                new_pass[i] = len(nodes)
                nodes.append(RationalNode.identity(width, passthrough[i], tag=f"t{i}"))
        idx, passthrough = new_idx, new_pass
        layers.append(tuple(nodes))
        width = len(nodes)

    # output layer
    n_b = q + N
    gaps = spline.basis.gaps()
    ins = [idx[(i, j)] for i in range(d) for j in range(1, n_b + 1)]
    k_in = len(ins)
    nodes = []
    for out in range(p):
        terms = {}
        w = spline.weights[out]
        for multi in np.ndindex(*([n_b] * d)):
            c = float(w[multi])
            if c == 0.0:
                continue
            e = [0] * k_in
            for i, jj in enumerate(multi):
                e[i * n_b + jj] = 1
                c *= gaps[jj]
            terms[tuple(e)] = c
        num = SparseMultiPolynomial(k_in, terms)
        rat = RationalFunction(num, SparseMultiPolynomial.constant(k_in, 1.0),
                               degree_bound=d, check=False)
        nodes.append(RationalNode("rational", width, tuple(ins), rational=rat, tag=f"out[{out}]"))
    layers.append(tuple(nodes))

    meta = {"beta": cfg.beta, "q": q, "N": N, "M": None if oracle else M, "d": d, "p": p,
            "boundary": boundary}
    return RationalNetwork(d, tuple(layers), oracle, tuple(spline.domain), meta)


def _mono(n, ones):
    e = [0] * n
    for v in ones:
        e[v] += 1
    return tuple(e)


# --------------------------------------------------------------------------
# bookkeeping and collapse
# --------------------------------------------------------------------------

def degree_report(net):
    degs = [n.degree_bound for layer in net.layers for n in layer]
    rational = [g for g in degs if g is not None]
    expanded = [n.expanded_degree for layer in net.layers for n in layer
                if n.expanded_degree is not None]
    return {
        "depth": net.depth,
        "width": net.width,
        "widths": net.widths,
        "max_degree": max(rational) if rational else None,
        "max_expanded_degree": max(expanded) if expanded else None,
        "non_rational_nodes": sum(g is None for g in degs),
    }


def expected_bookkeeping(cfg):
    """Depth, width and maximal degree as stated for the construction."""
    q = cfg.q
    return {"depth": q + 2, "width": (cfg.N + max(4, q) + 1) * cfg.d,
            "max_degree": cfg.resolved_M + 1}


def _newman_factored(M, u, term_cap):
    """x^2 (1 + r_M(x)) / 2 at polynomial ``u`` as a factored rational.

    The denominator is even, so it is substituted at the sign-normalized
    argument; R(t - s) and R(s - t) then share one denominator factor.
    """
    rat = as_rational(_newman(M), "requ")
    num = eval_poly_factored(rat.num, [u], term_cap)
    lead = max(u.num.terms)
    u_canon = u if u.num.terms[lead] > 0 else u * -1.0
    den = eval_poly_factored(rat.den, [u_canon], term_cap)
    return num / den


def collapse_factored(net, term_cap=DEFAULT_TERM_CAP):
    if net.oracle_mode:
        raise ArgumentError("oracle networks contain exact ReQU and do not collapse")
    d = net.input_dim
    vals = [FactoredRational.from_poly(SparseMultiPolynomial.variable(d, i), term_cap)
            for i in range(d)]
    for layer in net.layers:
        new = []
        for node in layer:
            if node.kind in ("affine", "newman_requ"):
                u = FactoredRational.constant(d, node.bias, term_cap)
                for i, w in zip(node.inputs, node.weights):
                    u = u + vals[i] * w
                if node.kind == "newman_requ":
                    u = _newman_factored(node.M, u, term_cap)
                new.append(u)
            else:
                args = [vals[i] for i in node.inputs]
                top = eval_poly_factored(node.rational.num, args, term_cap)
                bot = eval_poly_factored(node.rational.den, args, term_cap)
                new.append(top / bot)
        vals = new
    return vals


def collapse_to_rational(net, term_cap=DEFAULT_TERM_CAP, check=True):
    """Compose every layer symbolically into one rational per output."""
    outs = collapse_factored(net, term_cap)
    rats = [fr.to_rational(domain=net.domain, check=check) for fr in outs]
    return rats[0] if len(rats) == 1 else rats


def identity_network(d=1):
    layer = tuple(RationalNode.identity(d, i, tag=f"x{i}") for i in range(d))
    return RationalNetwork(d, (layer,), False, (0.0, 1.0))
