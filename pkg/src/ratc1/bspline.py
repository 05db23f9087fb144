"""Clamped uniform knots, order-2 B-splines written with ReQU, the order-m
recursion, and tensor-product splines with least-squares weights.

Knot and spline indices are 1-based throughout the public API, as in the
construction being reproduced; ``KnotVector.a`` stores them 0-based, so
``knots.at(j) == knots.a[j - 1]``.

B-splines here are *unnormalized*: ``B_j^m = N_j^m / (a_{j+m+1} - a_j)`` with
``N_j^m`` the usual partition-of-unity basis of degree ``m``.
"""
from __future__ import annotations

import json
import string
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DomainError, SingularFit, SizeCapExceeded
from .newman import NewmanBasis, eval_repu_pair, requ, requ_prime

BOUNDARY_MODES = ("symmetric", "verbatim")
DEFAULT_SIZE_CAP = 250_000


@dataclass(frozen=True)
class KnotVector:
    q: int
    N: int
    a: np.ndarray = field(repr=False, compare=False)

    def at(self, j):
        """1-based knot access."""
        return self.a[j - 1]

    def __len__(self):
        return self.a.size


def make_knots(q, N):
    if int(q) != q or q < 2:
        raise ArgumentError(f"spline order q must be an integer >= 2, got {q}")
    if int(N) != N or N < 2:
        raise ArgumentError(f"resolution N must be an integer >= 2, got {N}")
    q, N = int(q), int(N)
    a = np.concatenate([np.zeros(q + 1), np.arange(1, N) / N, np.ones(q + 1)])
    a.setflags(write=False)
    return KnotVector(q, N, a)


# --------------------------------------------------------------------------
# activations
# --------------------------------------------------------------------------

class ExactReQU:
    name = "requ_exact"

    def pair(self, u):
        u = np.asarray(u, dtype=float)
        return requ(u), requ_prime(u)

    def __repr__(self):
        return "ExactReQU()"


@dataclass(frozen=True)
class NewmanReQU:
    """ReQU replaced by x^2 (1 + r_M(x)) / 2."""

    M: int
    name = "newman_requ"

    @property
    def basis(self):
        return _newman_basis(self.M)

    def pair(self, u):
        return eval_repu_pair(self.basis, 2, u)


_BASES = {}


def _newman_basis(M):
    if M not in _BASES:
        _BASES[M] = NewmanBasis(M)
    return _BASES[M]


EXACT = ExactReQU()


def activation_for(M):
    """``None`` means exact ReQU, an integer the degree-M Newman approximant."""
    return EXACT if M is None else NewmanReQU(int(M))


# --------------------------------------------------------------------------
# order-2 splines in ReQU form
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadBSpline:
    """B_j^{2,N} as ``sum coeff * ReQU(orient * (z - shift))``.

    ``orient = +1`` stands for ReQU(z - s), ``-1`` for ReQU(s - z).
    """

    knots: KnotVector
    j: int
    case: str
    terms: tuple

    def pair(self, z, activation=EXACT):
        z = np.asarray(z, dtype=float)
        val = np.zeros_like(z)
        der = np.zeros_like(z)
        for coeff, shift, orient in self.terms:
            v, d = activation.pair(orient * (z - shift))
            val = val + coeff * v
            der = der + coeff * orient * d
        return val, der


def quad_terms(knots, j, boundary="symmetric"):
    """The five cases of the order-2 ReQU representation.

    ``boundary="verbatim"`` uses the right-boundary coefficients (1, -2, -3) as
    printed in the source construction; ``"symmetric"`` uses (1, -4, 3), the
    mirror image of the left-boundary spline, which is what Cox-de Boor gives.
    """
    q, N = knots.q, knots.N
    if not 1 <= j <= 2 * q + N - 2:
        raise IndexError(f"order-2 index j={j} outside 1..{2 * q + N - 2}")
    if boundary not in BOUNDARY_MODES:
        raise ArgumentError(f"boundary must be one of {BOUNDARY_MODES}")
    n3 = float(N) ** 3
    if q + 1 <= j <= q + N - 2:
        k = j - q
        c = n3 / 6.0
        terms = ((c, (k - 1) / N, 1), (-3 * c, k / N, 1), (3 * c, (k + 1) / N, 1),
                 (-c, (k + 2) / N, 1))
        case = "interior"
    elif j == q - 1:
        terms = ((n3, 1 / N, -1),)
        case = "left_outer"
    elif j == q:
        c = n3 / 4.0
        terms = ((c, 2 / N, -1), (-4 * c, 1 / N, -1), (3 * c, 0.0, -1))
        case = "left_inner"
    elif j == q + N - 1:
        c = n3 / 4.0
        if boundary == "verbatim":
            terms = ((c, (N - 2) / N, 1), (-2 * c, (N - 1) / N, 1), (-3 * c, 1.0, 1))
        else:
            terms = ((c, (N - 2) / N, 1), (-4 * c, (N - 1) / N, 1), (3 * c, 1.0, 1))
        case = "right_inner"
    elif j == q + N:
        terms = ((n3, (N - 1) / N, 1),)
        case = "right_outer"
    else:
        terms = ()
        case = "zero"
    return QuadBSpline(knots, j, case, terms)


def _check_unit(z):
    z = np.asarray(z, dtype=float)
    if np.any((z < 0.0) | (z > 1.0)) or np.any(np.isnan(z)):
        raise DomainError("B-splines are evaluated on [0, 1]")
    return z


def eval_B2(knots, j, z, activation=EXACT, boundary="symmetric"):
    z = _check_unit(z)
    val, _ = quad_terms(knots, j, boundary).pair(z, activation)
    return val if val.ndim else float(val)


def eval_B2_prime(knots, j, z, activation=EXACT, boundary="symmetric"):
    z = _check_unit(z)
    _, der = quad_terms(knots, j, boundary).pair(z, activation)
    return der if der.ndim else float(der)


# --------------------------------------------------------------------------
# recursion to higher orders
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BSplineBasis:
    """All unnormalized B-splines of orders 2..q on one knot vector.

    ``activation`` is :data:`EXACT` or a :class:`NewmanReQU`; with the latter
    every ReQU in the order-2 layer is replaced by the rational approximant
    and the recursion is applied unchanged.
    """

    knots: KnotVector
    activation: object = EXACT
    boundary: str = "symmetric"

    @property
    def q(self):
        return self.knots.q

    @property
    def N(self):
        return self.knots.N

    def count(self, m):
        """Number of order-m splines, indices 1..2q+N-m."""
        return 2 * self.q + self.N - m

    def sweep(self, z, top=None):
        """Values and derivatives for every order 2..top at points ``z``.

        Returns ``{m: (vals, ders)}`` with arrays of shape ``(count(m),) + z.shape``;
        row ``j-1`` holds spline ``j``.  One pass, each order built from the last.
        """
        z = _check_unit(z)
        top = self.q if top is None else top
        if not 2 <= top <= self.q:
            raise ArgumentError(f"order must be in 2..{self.q}")
        a = self.knots.a
        out = {}
        n2 = self.count(2)
        vals = np.zeros((n2,) + z.shape)
        ders = np.zeros((n2,) + z.shape)
        for j in range(1, n2 + 1):
            spl = quad_terms(self.knots, j, self.boundary)
            if spl.terms:
                vals[j - 1], ders[j - 1] = spl.pair(z, self.activation)
        out[2] = (vals, ders)
        for m in range(3, top + 1):
            pv, pd = out[m - 1]
            nm = self.count(m)
            vals = np.zeros((nm,) + z.shape)
            ders = np.zeros((nm,) + z.shape)
            for j in range(1, nm + 1):
                lo, hi = a[j - 1], a[j + m]
                if hi <= lo:
                    continue
                gap = hi - lo
                left, right = pv[j - 1], pv[j]
                vals[j - 1] = ((z - lo) * left + (hi - z) * right) / gap
                ders[j - 1] = (left - right + (z - lo) * pd[j - 1] + (hi - z) * pd[j]) / gap
            out[m] = (vals, ders)
        return out

    def eval_Bm(self, j, m, z):
        self._check_index(j, m)
        vals, _ = self.sweep(z, m)[m]
        out = vals[j - 1]
        return out if out.ndim else float(out)

    def eval_Bm_prime(self, j, m, z):
        self._check_index(j, m)
        _, ders = self.sweep(z, m)[m]
        out = ders[j - 1]
        return out if out.ndim else float(out)

    def _check_index(self, j, m):
        if not 2 <= m <= self.q:
            raise IndexError(f"order m={m} outside 2..{self.q}")
        if not 1 <= j <= self.count(m):
            raise IndexError(f"index j={j} outside 1..{self.count(m)}")

    def gaps(self):
        """a_{j+q+1} - a_j for j = 1..q+N, the factors in the tensor representation."""
        a = self.knots.a
        n = self.q + self.N
        return np.array([a[j + self.q] - a[j - 1] for j in range(1, n + 1)])

    def design(self, z):
        """Scaled top-order basis ``gap_j * B_j^q(z)`` and its derivative, shape (len(z), q+N)."""
        vals, ders = self.sweep(z)[self.q]
        g = self.gaps()
        return (vals * g[:, None]).T, (ders * g[:, None]).T


# --------------------------------------------------------------------------
# tensor-product splines
# --------------------------------------------------------------------------

def _einsum_contract(weights, mats):
    """sum_j w[p, j1..jd] prod_l mats[l][n, j_l] -> (n, p)."""
    d = len(mats)
    letters = string.ascii_lowercase
    js = letters[:d]
    subs = "z" + js + "," + ",".join("y" + c for c in js) + "->yz"
    return np.einsum(subs, weights, *mats, optimize=True)


@dataclass(frozen=True)
class TensorSpline:
    d: int
    p: int
    basis: BSplineBasis
    weights: np.ndarray = field(repr=False, compare=False)
    domain: tuple = (0.0, 1.0)

    @property
    def q(self):
        return self.basis.q

    @property
    def N(self):
        return self.basis.N

    def _unit(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1 and self.d == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[1] != self.d:
            raise ValueError(f"expected points of shape (n, {self.d})")
        lo, hi = self.domain
        t = (x - lo) / (hi - lo)
        # snap rounding noise at the edges of the box
        t = np.where(np.abs(t) < 1e-14, 0.0, t)
        t = np.where(np.abs(t - 1.0) < 1e-14, 1.0, t)
        if np.any((t < 0.0) | (t > 1.0)):
            raise DomainError(f"point outside the spline box {self.domain}^{self.d}")
        return t

    def _tables(self, t):
        return [self.basis.design(t[:, l]) for l in range(self.d)]

    def __call__(self, x):
        t = self._unit(x)
        tabs = self._tables(t)
        return _einsum_contract(self.weights, [v for v, _ in tabs])

    def grad(self, x):
        """Gradient, shape (n, p, d)."""
        t = self._unit(x)
        tabs = self._tables(t)
        scale = 1.0 / (self.domain[1] - self.domain[0])
        cols = []
        for l in range(self.d):
            mats = [tabs[k][1] if k == l else tabs[k][0] for k in range(self.d)]
            cols.append(_einsum_contract(self.weights, mats) * scale)
        return np.stack(cols, axis=-1)

    def to_json(self):
        return {
            "d": self.d, "p": self.p, "q": self.q, "N": self.N,
            "domain": list(self.domain), "boundary": self.basis.boundary,
            "knots": self.basis.knots.a.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        knots = make_knots(obj["q"], obj["N"])
        basis = BSplineBasis(knots, EXACT, obj.get("boundary", "symmetric"))
        return cls(int(obj["d"]), int(obj["p"]), basis, np.asarray(obj["weights"], dtype=float),
                   tuple(obj.get("domain", (0.0, 1.0))))

    def dumps(self):
        return json.dumps(self.to_json())


def eval_tensor_spline(s, x):
    return s(x)


def eval_tensor_spline_grad(s, x):
    return s.grad(x)


def _sample_grid(n_axis, d, domain):
    lo, hi = domain
    axis = np.linspace(lo, hi, n_axis)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return axis, np.stack([m.ravel() for m in mesh], axis=-1)


def fit_spline(f_sampler, q, N, d=1, p=1, domain=(0.0, 1.0), ridge=1e-10, oversample=4,
               boundary="symmetric", size_cap=DEFAULT_SIZE_CAP, residual_tol=1e-6):
    """Least-squares tensor-spline fit with a tiny ridge term.

    Samples on a uniform grid with ``oversample * (q + N)`` points per axis and
    solves the normal equations.  The Gram matrix is a Kronecker product of the
    per-axis Gram matrices, so the ridge system is solved exactly through their
    eigendecompositions without forming the full matrix.
    """
    q, N, d, p = int(q), int(N), int(d), int(p)
    n_basis = q + N
    if d * n_basis ** d > size_cap:
        raise SizeCapExceeded(f"d (q+N)^d = {d * n_basis ** d} exceeds cap {size_cap}")
    basis = BSplineBasis(make_knots(q, N), EXACT, boundary)
    n_axis = oversample * n_basis
    axis, pts = _sample_grid(n_axis, d, domain)
    y = np.asarray(f_sampler(pts), dtype=float).reshape(pts.shape[0], p)
    t = (axis - domain[0]) / (domain[1] - domain[0])
    t[0], t[-1] = 0.0, 1.0
    A, _ = basis.design(t)  # (n_axis, n_basis), identical for every axis

    Y = y.T.reshape((p,) + (n_axis,) * d)
    rhs = Y
    for l in range(d):
        rhs = np.moveaxis(np.tensordot(rhs, A, axes=([1 + l], [0])), -1, 1 + l)
    G = A.T @ A
    lam, U = np.linalg.eigh(G)
    eig = np.ones(())
    for _ in range(d):
        eig = np.multiply.outer(eig, lam)
    eig = eig + ridge
    proj = rhs
    for l in range(d):
        proj = np.moveaxis(np.tensordot(proj, U, axes=([1 + l], [0])), -1, 1 + l)
    proj = proj / eig
    W = proj
    for l in range(d):
        W = np.moveaxis(np.tensordot(W, U.T, axes=([1 + l], [0])), -1, 1 + l)

    check = W
    for l in range(d):
        check = np.moveaxis(np.tensordot(check, G, axes=([1 + l], [0])), -1, 1 + l)
    resid = np.linalg.norm(check + ridge * W - rhs)
    scale = max(np.linalg.norm(rhs), 1e-300)
    if not (resid <= residual_tol * scale or resid <= 1e-12):  # also catches NaN
        raise SingularFit(f"normal-equation residual {resid / scale:.3g} exceeds tolerance")
    return TensorSpline(d, p, basis, W, tuple(float(v) for v in domain))
