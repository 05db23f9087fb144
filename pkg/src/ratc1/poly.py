"""Polynomial and rational-function arithmetic with degree bookkeeping.

Two polynomial kinds share one duck-typed surface (``dim``, ``degree()``,
``__call__``, ``derivative(axis)``, ``+``, ``*``):

* :class:`DensePolynomial` -- univariate, coefficient list indexed by power.
* :class:`SparseMultiPolynomial` -- ``d`` variables, exponent tuple -> coeff.

Rational functions are never reduced to coprime form.  ``degree_bound`` is an
upper bound on the degree, which is all the approximation statements need.
"""
from __future__ import annotations

import numpy as np

DEFAULT_TERM_CAP = 200_000
DEFAULT_PROBE_POINTS = 1024
DEFAULT_PROBE_TOTAL = 65_536


class TermExplosion(RuntimeError):
    """Symbolic result would exceed the configured term cap."""


class NonPositiveDenominator(ValueError):
    pass


# --------------------------------------------------------------------------
# double-double helpers (error-free transformations)
# --------------------------------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _dd_horner(coeffs, x):
    """Horner's scheme carried in double-double; returns (hi, lo)."""
    x = np.asarray(x, dtype=float)
    hi = np.full_like(x, coeffs[-1])
    lo = np.zeros_like(x)
    for c in coeffs[-2::-1]:
        # (hi, lo) * x
        p, e = _two_prod(hi, x)
        e = e + lo * x
        hi, lo = _two_sum(p, e)
        # + c
        s, e2 = _two_sum(hi, c)
        e2 = e2 + lo
        hi, lo = _two_sum(s, e2)
    return hi, lo


# --------------------------------------------------------------------------
# univariate dense
# --------------------------------------------------------------------------

class DensePolynomial:
    """Univariate polynomial, ``coeffs[k]`` multiplies ``x**k``."""

    __slots__ = ("coeffs",)
    dim = 1

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float)).copy()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1)
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def constant(cls, value):
        return cls([value])

    @classmethod
    def x(cls):
        return cls([0.0, 1.0])

    @classmethod
    def from_roots(cls, roots, lead=1.0):
        # numpy returns highest power first
        return cls(lead * np.poly(np.asarray(roots, dtype=float))[::-1])

    def is_zero(self):
        return self.coeffs.size == 1 and self.coeffs[0] == 0.0

    def degree(self):
        """Index of the last nonzero coefficient, ``None`` for the zero polynomial."""
        return None if self.is_zero() else self.coeffs.size - 1

    def canonical(self):
        return DensePolynomial(self.coeffs)

    @property
    def n_terms(self):
        return int(np.count_nonzero(self.coeffs))

    def __call__(self, x, extended=False):
        if extended:
            hi, lo = _dd_horner(self.coeffs, x)
            return hi + lo
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            out = out * x + c
        return out if out.ndim else float(out)

    def derivative(self, axis=0):
        if axis != 0:
            raise ValueError("univariate polynomial has only axis 0")
        if self.coeffs.size == 1:
            return DensePolynomial([0.0])
        return DensePolynomial(self.coeffs[1:] * np.arange(1, self.coeffs.size))

    def _coerce(self, other):
        if isinstance(other, DensePolynomial):
            return other
        if np.isscalar(other):
            return DensePolynomial([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        n = max(self.coeffs.size, other.coeffs.size)
        out = np.zeros(n)
        out[: self.coeffs.size] += self.coeffs
        out[: other.coeffs.size] += other.coeffs
        return DensePolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return DensePolynomial(-self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return DensePolynomial(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, k):
        out = DensePolynomial([1.0])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        return isinstance(other, DensePolynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"DensePolynomial({self.coeffs.tolist()})"

    def compose(self, inner):
        """``self(inner(x))`` for a univariate ``inner``."""
        out = DensePolynomial([self.coeffs[-1]])
        for c in self.coeffs[-2::-1]:
            out = out * inner + c
        return out

    def to_sparse(self):
        return SparseMultiPolynomial(1, {(k,): c for k, c in enumerate(self.coeffs) if c != 0.0})

    def to_json(self):
        return self.to_sparse().to_json()


# --------------------------------------------------------------------------
# multivariate sparse
# --------------------------------------------------------------------------

class SparseMultiPolynomial:
    """Polynomial in ``dim`` variables stored as ``{exponents: coeff}``."""

    __slots__ = ("dim", "terms", "_compiled")

    def __init__(self, dim, terms=None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = int(dim)
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.dim:
                raise ValueError(f"exponent {exps} does not match dimension {dim}")
            c = float(c)
            if c != 0.0:
                clean[exps] = clean.get(exps, 0.0) + c
        # sorted, so evaluation order (and rounding) does not depend on construction order
        self.terms = {k: clean[k] for k in sorted(clean) if clean[k] != 0.0}
        self._compiled = None

    @classmethod
    def constant(cls, dim, value):
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def variable(cls, dim, i, coeff=1.0):
        e = [0] * dim
        e[i] = 1
        return cls(dim, {tuple(e): coeff})

    @classmethod
    def affine(cls, weights, bias=0.0):
        dim = len(weights)
        p = cls.constant(dim, bias)
        for i, w in enumerate(weights):
            if w != 0.0:
                p = p + cls.variable(dim, i, w)
        return p

    @classmethod
    def from_dense(cls, poly):
        return poly.to_sparse()

    def is_zero(self):
        return not self.terms

    def degree(self):
        if not self.terms:
            return None
        return max(sum(e) for e in self.terms)

    def degree_in(self, axis):
        if not self.terms:
            return None
        return max(e[axis] for e in self.terms)

    @property
    def n_terms(self):
        return len(self.terms)

    def is_constant(self):
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self):
        return self.terms.get((0,) * self.dim, 0.0)

    # -- evaluation --------------------------------------------------------

    def _compile(self):
        if self._compiled is None:
            comp = []
            for exps, c in self.terms.items():
                idx = tuple(i for i, e in enumerate(exps) if e)
                comp.append((c, idx, tuple(exps[i] for i in idx)))
            self._compiled = comp
        return self._compiled

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected trailing dimension {self.dim}, got {x.shape}")
        return x

    def __call__(self, x):
        x = self._points(x)
        shape = x.shape[:-1]
        out = np.zeros(shape)
        powers = {}

        def pw(i, e):
            key = (i, e)
            if key not in powers:
                powers[key] = x[..., i] ** e if e > 1 else x[..., i]
            return powers[key]

        for c, idx, exps in self._compile():
            term = c
            for i, e in zip(idx, exps):
                term = term * pw(i, e)
            out = out + term
        return out if out.ndim else float(out)

    def value_and_grad(self, x):
        """Value ``(...,)`` and gradient ``(..., dim)`` at points ``(..., dim)``."""
        x = self._points(x)
        shape = x.shape[:-1]
        val = np.zeros(shape)
        grad = np.zeros(shape + (self.dim,))
        powers = {}

        def pw(i, e):
            if e == 0:
                return 1.0
            key = (i, e)
            if key not in powers:
                powers[key] = x[..., i] ** e if e > 1 else x[..., i]
            return powers[key]

        for c, idx, exps in self._compile():
            factors = [pw(i, e) for i, e in zip(idx, exps)]
            term = c
            for f in factors:
                term = term * f
            val = val + term
            for k, (i, e) in enumerate(zip(idx, exps)):
                part = c * e
                for kk, f in enumerate(factors):
                    part = part * (pw(i, e - 1) if kk == k else f)
                grad[..., i] += part
        return val, grad

    def derivative(self, axis=0):
        terms = {}
        for exps, c in self.terms.items():
            e = exps[axis]
            if e:
                new = list(exps)
                new[axis] = e - 1
                terms[tuple(new)] = terms.get(tuple(new), 0.0) + c * e
        return SparseMultiPolynomial(self.dim, terms)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, SparseMultiPolynomial):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return other
        if isinstance(other, DensePolynomial) and self.dim == 1:
            return other.to_sparse()
        if np.isscalar(other):
            return SparseMultiPolynomial.constant(self.dim, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0.0) + v
        return SparseMultiPolynomial(self.dim, terms)

    __radd__ = __add__

    def __neg__(self):
        return SparseMultiPolynomial(self.dim, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if len(self.terms) * len(other.terms) > 50 * DEFAULT_TERM_CAP:
            raise TermExplosion(
                f"product of {len(self.terms)} x {len(other.terms)} terms exceeds cap")
        terms = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                terms[k] = terms.get(k, 0.0) + v1 * v2
        return SparseMultiPolynomial(self.dim, terms)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = SparseMultiPolynomial.constant(self.dim, 1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        return (isinstance(other, SparseMultiPolynomial) and other.dim == self.dim
                and other.terms == self.terms)

    def __hash__(self):
        return hash((self.dim, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        return f"SparseMultiPolynomial(dim={self.dim}, terms={len(self.terms)})"

    def canonical(self):
        return SparseMultiPolynomial(self.dim, self.terms)

    def key(self):
        """Hashable exact identity, used to merge equal denominator factors."""
        return (self.dim, tuple(sorted(self.terms.items())))

    def substitute(self, inners, term_cap=DEFAULT_TERM_CAP):
        """Replace variable ``k`` by polynomial ``inners[k]`` (all of a common dim)."""
        if len(inners) != self.dim:
            raise ValueError("need one inner polynomial per variable")
        inners = [as_sparse(p) for p in inners]
        e = inners[0].dim
        cache = {}

        def pw(k, n):
            if (k, n) not in cache:
                cache[(k, n)] = inners[k] ** n
            return cache[(k, n)]

        out = SparseMultiPolynomial(e)
        for exps, c in self.terms.items():
            term = SparseMultiPolynomial.constant(e, c)
            for k, n in enumerate(exps):
                if n:
                    term = term * pw(k, n)
            out = out + term
            if out.n_terms > term_cap:
                raise TermExplosion(f"substitution exceeded {term_cap} terms")
        return out

    def to_dense(self):
        if self.dim != 1:
            raise ValueError("only univariate polynomials convert to dense form")
        deg = self.degree() or 0
        c = np.zeros(deg + 1)
        for (k,), v in self.terms.items():
            c[k] += v
        return DensePolynomial(c)

    def to_sparse(self):
        return self

    def to_json(self):
        return {"dim": self.dim,
                "terms": [[list(k), v] for k, v in sorted(self.terms.items())]}


def as_sparse(p):
    return p.to_sparse() if isinstance(p, DensePolynomial) else p


def poly_from_json(obj):
    dim = int(obj["dim"])
    p = SparseMultiPolynomial(dim, {tuple(e): c for e, c in obj["terms"]})
    return p.to_dense() if dim == 1 else p


# --------------------------------------------------------------------------
# rational functions
# --------------------------------------------------------------------------

def _probe_grid(dim, domain, points_per_axis, total_cap):
    lo, hi = domain
    per_axis = points_per_axis
    if per_axis ** dim > total_cap:
        per_axis = max(2, int(total_cap ** (1.0 / dim)))
    axes = [np.linspace(lo, hi, per_axis)] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


class RationalFunction:
    """``num / den`` with a declared degree bound and a probing domain.

    The denominator is certified positive by evaluating it on a grid over
    ``domain`` (a ``(lo, hi)`` pair applied to every axis); pass ``check=False``
    to skip when the caller already knows the sign.
    """

    __slots__ = ("num", "den", "degree_bound", "domain")

    def __init__(self, num, den=None, degree_bound=None, domain=(-1.0, 1.0), check=True,
                 probe_points=DEFAULT_PROBE_POINTS):
        if den is None:
            den = (DensePolynomial([1.0]) if isinstance(num, DensePolynomial)
                   else SparseMultiPolynomial.constant(num.dim, 1.0))
        if num.dim != den.dim:
            raise ValueError("numerator and denominator dimensions differ")
        if den.is_zero():
            raise NonPositiveDenominator("zero denominator")
        actual = max(num.degree() or 0, den.degree() or 0)
        self.num = num
        self.den = den
        self.degree_bound = actual if degree_bound is None else max(int(degree_bound), actual)
        self.domain = (float(domain[0]), float(domain[1]))
        if check:
            self.certify_positive(probe_points)

    @property
    def dim(self):
        return self.num.dim

    @classmethod
    def from_poly(cls, p, **kw):
        return cls(p, None, **kw)

    @classmethod
    def identity(cls, dim=1, axis=0, **kw):
        if dim == 1:
            return cls(DensePolynomial.x(), **kw)
        return cls(SparseMultiPolynomial.variable(dim, axis), **kw)

    def certify_positive(self, points_per_axis=DEFAULT_PROBE_POINTS,
                         total_cap=DEFAULT_PROBE_TOTAL):
        pts = _probe_grid(self.dim, self.domain, points_per_axis, total_cap)
        vals = self.den(pts[:, 0] if self.dim == 1 else pts)
        if not np.all(vals > 0):
            bad = int(np.argmin(vals))
            raise NonPositiveDenominator(
                f"denominator {vals[bad]:.3g} at probe {pts[bad].tolist()}")
        return True

    def __call__(self, x, extended=False):
        if extended:
            if self.dim != 1:
                raise ValueError("extended precision path is univariate only")
            return self.num(x, extended=True) / self.den(x, extended=True)
        return self.num(x) / self.den(x)

    def derivative(self, axis=0):
        """Quotient rule, unreduced: (p' q - p q') / q**2."""
        n, d = self.num, self.den
        num = n.derivative(axis) * d - n * d.derivative(axis)
        return RationalFunction(num, d * d, degree_bound=2 * self.degree_bound,
                                domain=self.domain, check=False)

    def value_and_grad(self, x):
        if self.dim == 1:
            x = np.asarray(x, dtype=float)
            dn = self.num.derivative()
            dd = self.den.derivative()
            n, d = self.num(x), self.den(x)
            return n / d, ((dn(x) * d - n * dd(x)) / (d * d))[..., None]
        n, gn = as_sparse(self.num).value_and_grad(x)
        d, gd = as_sparse(self.den).value_and_grad(x)
        return n / d, (gn * d[..., None] - n[..., None] * gd) / (d * d)[..., None]

    def __add__(self, other):
        return rat_add(self, other)

    def __mul__(self, other):
        return rat_mul(self, other)

    def __repr__(self):
        return (f"RationalFunction(dim={self.dim}, deg_num={self.num.degree()}, "
                f"deg_den={self.den.degree()}, bound={self.degree_bound})")

    def to_json(self):
        return {"num": self.num.to_json(), "den": self.den.to_json(),
                "degree_bound": self.degree_bound}

    @classmethod
    def from_json(cls, obj, **kw):
        return cls(poly_from_json(obj["num"]), poly_from_json(obj["den"]),
                   degree_bound=obj.get("degree_bound"), **kw)


MultiRational = RationalFunction


def _as_rational(r, like):
    if isinstance(r, RationalFunction):
        return r
    if np.isscalar(r):
        if like.dim == 1:
            p = DensePolynomial([r])
        else:
            p = SparseMultiPolynomial.constant(like.dim, r)
        return RationalFunction(p, domain=like.domain, check=False)
    return RationalFunction(r, domain=like.domain, check=False)


def _same_kind(a, b):
    if isinstance(a, DensePolynomial) and isinstance(b, DensePolynomial):
        return a, b
    return as_sparse(a), as_sparse(b)


def rat_add(r1, r2):
    """Cross-multiplied sum; the degree bound adds."""
    r2 = _as_rational(r2, r1)
    if r1.dim != r2.dim:
        raise ValueError("dimension mismatch")
    n1, d2 = _same_kind(r1.num, r2.den)
    n2, d1 = _same_kind(r2.num, r1.den)
    return RationalFunction(n1 * d2 + n2 * d1, d1 * d2,
                            degree_bound=r1.degree_bound + r2.degree_bound,
                            domain=r1.domain, check=False)


def rat_mul(r1, r2):
    r2 = _as_rational(r2, r1)
    if r1.dim != r2.dim:
        raise ValueError("dimension mismatch")
    n1, n2 = _same_kind(r1.num, r2.num)
    d1, d2 = _same_kind(r1.den, r2.den)
    return RationalFunction(n1 * n2, d1 * d2,
                            degree_bound=r1.degree_bound + r2.degree_bound,
                            domain=r1.domain, check=False)


# --------------------------------------------------------------------------
# factored denominators for composition
# --------------------------------------------------------------------------

class FactoredRational:
    """Numerator polynomial over a product of keyed denominator factors.

    Factors with identical exact coefficients share a key, so sums take the
    least common multiple of the denominators instead of their product.
    """

    __slots__ = ("num", "factors", "term_cap")

    def __init__(self, num, factors=None, term_cap=DEFAULT_TERM_CAP):
        self.num = as_sparse(num)
        self.factors = dict(factors or {})  # key -> (poly, multiplicity)
        self.term_cap = term_cap

    @classmethod
    def from_poly(cls, p, term_cap=DEFAULT_TERM_CAP):
        return cls(p, term_cap=term_cap)

    @classmethod
    def constant(cls, dim, value, term_cap=DEFAULT_TERM_CAP):
        return cls(SparseMultiPolynomial.constant(dim, value), term_cap=term_cap)

    @classmethod
    def from_rational(cls, r, term_cap=DEFAULT_TERM_CAP):
        out = cls(r.num, term_cap=term_cap)
        return out.divide_poly(r.den)

    @property
    def dim(self):
        return self.num.dim

    def _check(self, p):
        if p.n_terms > self.term_cap:
            raise TermExplosion(f"{p.n_terms} terms exceed cap {self.term_cap}")
        return p

    def divide_poly(self, p):
        p = as_sparse(p)
        if p.is_constant():
            return FactoredRational(self.num * (1.0 / p.constant_value()), self.factors,
                                    self.term_cap)
        factors = dict(self.factors)
        key = p.key()
        poly, m = factors.get(key, (p, 0))
        factors[key] = (poly, m + 1)
        return FactoredRational(self.num, factors, self.term_cap)

    def __add__(self, other):
        if np.isscalar(other):
            other = FactoredRational.constant(self.dim, other, self.term_cap)
        polys = {k: v[0] for k, v in self.factors.items()}
        polys.update({k: v[0] for k, v in other.factors.items()})
        keys = set(polys)
        lcm = {k: max(self.factors.get(k, (None, 0))[1], other.factors.get(k, (None, 0))[1])
               for k in keys}

        def lift(fr):
            out = fr.num
            for k in keys:
                extra = lcm[k] - fr.factors.get(k, (None, 0))[1]
                if extra:
                    out = self._check(out * polys[k] ** extra)
            return out

        num = self._check(lift(self) + lift(other))
        return FactoredRational(num, {k: (polys[k], lcm[k]) for k in keys if lcm[k]},
                                self.term_cap)

    __radd__ = __add__

    def __mul__(self, other):
        if np.isscalar(other):
            return FactoredRational(self.num * other, self.factors, self.term_cap)
        factors = dict(self.factors)
        for k, (p, m) in other.factors.items():
            factors[k] = (p, factors.get(k, (p, 0))[1] + m)
        return FactoredRational(self._check(self.num * other.num), factors, self.term_cap)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __truediv__(self, other):
        """Divide by another factored rational; its numerator becomes a factor."""
        if np.isscalar(other):
            return self * (1.0 / other)
        num_mult = dict(self.factors)
        den_extra = dict(other.factors)
        # shared factors cancel exactly
        for k in list(den_extra):
            if k in num_mult:
                c = min(num_mult[k][1], den_extra[k][1])
                num_mult[k] = (num_mult[k][0], num_mult[k][1] - c)
                den_extra[k] = (den_extra[k][0], den_extra[k][1] - c)
        num = self.num
        for p, m in den_extra.values():
            if m:
                num = self._check(num * p ** m)
        out = FactoredRational(num, {k: v for k, v in num_mult.items() if v[1]}, self.term_cap)
        return out.divide_poly(other.num)

    def denominator(self):
        out = SparseMultiPolynomial.constant(self.dim, 1.0)
        for p, m in self.factors.values():
            out = self._check(out * p ** m)
        return out

    def den_degree(self):
        return sum((p.degree() or 0) * m for p, m in self.factors.values())

    def __call__(self, x):
        val = self.num(x)
        for p, m in self.factors.values():
            val = val / p(x) ** m
        return val

    def to_rational(self, degree_bound=None, domain=(-1.0, 1.0), check=True):
        num, den = self.num, self.denominator()
        if self.dim == 1:
            num, den = num.to_dense(), den.to_dense()
        return RationalFunction(num, den, degree_bound=degree_bound, domain=domain, check=check)


def eval_poly_factored(poly, args, term_cap=DEFAULT_TERM_CAP):
    """Evaluate polynomial ``poly`` (dim k) on k factored rationals."""
    poly = as_sparse(poly)
    if len(args) != poly.dim:
        raise ValueError("need one argument per variable")
    dim = args[0].dim
    cache = {}

    def pw(k, n):
        if (k, n) not in cache:
            if n == 1:
                cache[(k, n)] = args[k]
            else:
                half = pw(k, n // 2)
                sq = half * half
                cache[(k, n)] = sq * args[k] if n % 2 else sq
        return cache[(k, n)]

    out = FactoredRational.constant(dim, 0.0, term_cap)
    for exps, c in poly.terms.items():
        term = FactoredRational.constant(dim, c, term_cap)
        for k, n in enumerate(exps):
            if n:
                term = term * pw(k, n)
        out = out + term
    return out


def rat_compose(outer, inners, term_cap=DEFAULT_TERM_CAP, domain=None, check=True):
    """Symbolic ``outer(inners[0](x), ..., inners[k-1](x))``.

    Inner denominators are merged by exact identity, so the common denominator
    is the least common multiple of the distinct ones.  The recorded degree
    bound is ``bound(outer) * max bound(inner)`` unless the expanded result
    is larger, in which case the actual degree is recorded.
    """
    if len(inners) != outer.dim:
        raise ValueError(f"outer has dim {outer.dim}, got {len(inners)} inner functions")
    dims = {r.dim for r in inners}
    if len(dims) != 1:
        raise ValueError("inner functions must share a dimension")
    args = [FactoredRational.from_rational(r, term_cap) for r in inners]
    top = eval_poly_factored(outer.num, args, term_cap)
    bot = eval_poly_factored(outer.den, args, term_cap)
    res = top / bot
    bound = outer.degree_bound * max(r.degree_bound for r in inners)
    dom = domain if domain is not None else inners[0].domain
    return res.to_rational(degree_bound=bound, domain=dom, check=check)
