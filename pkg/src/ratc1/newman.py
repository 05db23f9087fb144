"""Newman-type rational approximants of sign, |x|, ReQU and RePU on [-1, 1].

All evaluation goes through the factored ratio

    Q(x) = prod_i (xi^i - |x|) / (xi^i + |x|),   r(x) = sgn(x) (1 - Q) / (1 + Q),

whose factors lie in [-1, 1].  The expanded coefficients (``as_rational``)
are only for inspection: the constant term xi^(n(n-1)/2) underflows long
before the factored form loses accuracy.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ArgumentError, DomainError
from .poly import DensePolynomial, RationalFunction

VARIANTS = ("r", "R", "requ", "repu")


class ConditioningWarning(UserWarning):
    """Expanded Newman coefficients lose digits for large n."""


@dataclass(frozen=True)
class NewmanBasis:
    n: int
    xi: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ArgumentError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        xi = math.exp(-1.0 / math.sqrt(self.n))
        # exp(-i/sqrt(n)) directly; repeated multiplication drifts
        nodes = np.exp(-np.arange(self.n) / math.sqrt(self.n))
        nodes.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "nodes", nodes)

    def error_bound(self):
        """Certified sup-norm bound for | |x| - x r_n(x) | on [-1, 1]."""
        return 3.0 * math.exp(-math.sqrt(self.n))

    @cached_property
    def _expanded(self):
        # P_n(x) = prod (x + xi^i); split into even and odd parts
        p = DensePolynomial.from_roots(-self.nodes)
        k = np.arange(p.coeffs.size)
        even = np.where(k % 2 == 0, 2.0 * p.coeffs, 0.0)
        odd = np.where(k % 2 == 1, 2.0 * p.coeffs, 0.0)
        return p, DensePolynomial(even), DensePolynomial(odd)

    def newman_polynomial(self):
        return self._expanded[0]


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0) or np.any(np.isnan(x)):
        bad = x[np.abs(x) > 1.0] if np.any(np.abs(x) > 1.0) else x[np.isnan(x)]
        raise DomainError(f"Newman approximants are certified on [-1, 1]; got {bad.flat[0]!r}")
    return x


def _q_and_s(basis, a):
    """Q(a) and S(a) = sum_i w_i prod_{j != i} f_j for a = |x| >= 0.

    Built by the recurrence Q_{k+1} = Q_k f_k, S_{k+1} = S_k f_k + w_k Q_k so
    no division by a vanishing factor ever happens.
    """
    q = np.ones_like(a)
    s = np.zeros_like(a)
    for t in basis.nodes:
        plus = t + a
        f = (t - a) / plus
        s = s * f + (t / (plus * plus)) * q
        q = q * f
    return q, s


def eval_r(basis, x):
    x = _check_domain(x)
    q, _ = _q_and_s(basis, np.abs(x))
    out = np.sign(x) * (1.0 - q) / (1.0 + q)
    return out if out.ndim else float(out)


def eval_r_prime(basis, x):
    x = _check_domain(x)
    q, s = _q_and_s(basis, np.abs(x))
    out = 4.0 * s / (1.0 + q) ** 2
    return out if out.ndim else float(out)


def _one_plus_r(q, x):
    # 1 + r = 2/(1+Q) for x >= 0 and 2Q/(1+Q) for x < 0, free of cancellation
    return np.where(x >= 0, 2.0 / (1.0 + q), 2.0 * q / (1.0 + q))


def eval_repu_pair(basis, p, x):
    """Value and derivative of x**p (1 + r_n(x)) / 2."""
    x = _check_domain(x)
    q, s = _q_and_s(basis, np.abs(x))
    opr = _one_plus_r(q, x)
    rp = 4.0 * s / (1.0 + q) ** 2
    val = 0.5 * x ** p * opr
    der = 0.5 * p * x ** (p - 1) * opr + 0.5 * x ** p * rp
    return val, der


def eval_requ_approx(basis, x):
    val, _ = eval_repu_pair(basis, 2, x)
    return val if val.ndim else float(val)


def eval_requ_approx_prime(basis, x):
    _, der = eval_repu_pair(basis, 2, x)
    return der if der.ndim else float(der)


def eval_repu_approx(basis, p, x):
    if int(p) != p or p < 3:
        raise ArgumentError(f"RePU order must be an integer >= 3, got {p}")
    val, _ = eval_repu_pair(basis, int(p), x)
    return val if val.ndim else float(val)


def eval_repu_approx_prime(basis, p, x):
    if int(p) != p or p < 3:
        raise ArgumentError(f"RePU order must be an integer >= 3, got {p}")
    _, der = eval_repu_pair(basis, int(p), x)
    return der if der.ndim else float(der)


def requ(x):
    return np.maximum(x, 0.0) ** 2


def requ_prime(x):
    return 2.0 * np.maximum(x, 0.0)


@dataclass(frozen=True)
class ReQUApproximant:
    """A Newman approximant variant with the nominal bookkeeping used in proofs.

    ``nominal_type`` is the (numerator, denominator) type quoted for x^2 r_n;
    the expanded representation can be one degree higher, see ``as_rational``.
    """

    basis: NewmanBasis
    variant: str = "requ"
    p: int = 2

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ArgumentError(f"unknown variant {self.variant!r}")
        if self.variant == "repu" and self.p < 3:
            raise ArgumentError("repu variant needs p >= 3")

    @property
    def n(self):
        return self.basis.n

    @property
    def nominal_type(self):
        n = self.basis.n
        if self.variant == "r":
            return (n, n)
        return (n + 1, n - 1)

    @property
    def nominal_degree(self):
        return max(self.nominal_type)

    def error_bound(self):
        return self.basis.error_bound()

    def __call__(self, x):
        if self.variant == "r":
            return eval_r(self.basis, x)
        if self.variant == "R":
            x = _check_domain(x)
            return x * x * eval_r(self.basis, x)
        if self.variant == "requ":
            return eval_requ_approx(self.basis, x)
        return eval_repu_approx(self.basis, self.p, x)

    def derivative(self, x):
        if self.variant == "r":
            return eval_r_prime(self.basis, x)
        if self.variant == "R":
            x = _check_domain(x)
            return 2 * x * eval_r(self.basis, x) + x * x * eval_r_prime(self.basis, x)
        if self.variant == "requ":
            return eval_requ_approx_prime(self.basis, x)
        return eval_repu_approx_prime(self.basis, self.p, x)

    def as_rational(self):
        return as_rational(self.basis, self.variant, self.p)


MAX_EXPANSION_N = 30


def as_rational(basis, variant="r", p=None):
    """Expanded coefficient form.

    ``r``:    (P(x) - P(-x)) / (P(x) + P(-x))
    ``R``:    x^2 times ``r``
    ``requ``: x^2 (P(x)+P(-x) + P(x)-P(-x)) / (2 (P(x)+P(-x)))
    ``repu``: same with x^p
    """
    if basis.n > MAX_EXPANSION_N:
        raise ArgumentError(f"coefficient expansion capped at n <= {MAX_EXPANSION_N}")
    if variant not in VARIANTS:
        raise ArgumentError(f"unknown variant {variant!r}")
    if basis.n > 20:
        warnings.warn(f"expanded Newman coefficients for n={basis.n} are ill-conditioned",
                      ConditioningWarning, stacklevel=2)
    _, even, odd = basis._expanded
    if variant == "r":
        num, den = odd, even
    elif variant == "R":
        num, den = DensePolynomial([0, 0, 1]) * odd, even
    else:
        power = 2 if variant == "requ" else int(p or 0)
        if power < 2 or (variant == "repu" and power < 3):
            raise ArgumentError("repu variant needs p >= 3")
        mono = DensePolynomial([0.0] * power + [1.0])
        num, den = mono * (even + odd), even * 2.0
    return RationalFunction(num, den)


def certification_grid(basis, n_uniform=100_000):
    """Uniform grid on [-1, 1] with the nodes and their geometric midpoints adjoined.

    Error extrema sit between nodes, down to xi^n, far below the uniform spacing.
    """
    nodes = np.exp(-np.arange(basis.n + 1) / math.sqrt(basis.n))
    mids = np.sqrt(nodes[1:] * nodes[:-1])
    tail = np.geomspace(nodes[-1] * 1e-3, nodes[-1], 64)
    extra = np.concatenate([nodes, mids, tail])
    return np.unique(np.concatenate([np.linspace(-1.0, 1.0, n_uniform), extra, -extra, [0.0]]))


def abs_error(basis, x):
    """| |x| - x r_n(x) | on the given points."""
    x = np.asarray(x, dtype=float)
    return np.abs(np.abs(x) - x * eval_r(basis, x))


def sup_errors(n, n_uniform=100_000):
    """Sup-norm errors on the certification grid for one n.

    Returns a dict with c0_err_abs, c0_bound, c0_err_requ, c1_err_requ.
    """
    b = NewmanBasis(n)
    x = certification_grid(b, n_uniform)
    val, der = eval_repu_pair(b, 2, x)
    return {
        "n": n,
        "c0_err_abs": float(np.max(abs_error(b, x))),
        "c0_bound": b.error_bound(),
        "c0_err_requ": float(np.max(np.abs(val - requ(x)))),
        "c1_err_requ": float(np.max(np.abs(der - requ_prime(x)))),
    }
