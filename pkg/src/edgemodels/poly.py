"""Sparse multivariate polynomials in variables x_v indexed by count vectors.

Variables are keyed by the count vector itself (a length-d tuple of
nonnegative integers), so no global variable registry is needed.
Coefficients are exact rationals throughout; substituting a model may
downgrade to floats, but only explicitly through `substitute`.
"""

from __future__ import annotations

from fractions import Fraction


def height(cv):
    """Height of a count vector: the sum of its entries."""
    return sum(cv)


def _check_cv(cv, d):
    if len(cv) != d:
        raise ValueError(f"count vector {cv} has length {len(cv)}, expected {d}")
    if any(c < 0 for c in cv):
        raise ValueError(f"count vector {cv} has negative entries")


def monomial_height(mono):
    """Height multiset of a monomial, one entry per variable occurrence."""
    hs = []
    for cv, exp in mono:
        hs.extend([height(cv)] * exp)
    return tuple(sorted(hs))


class Poly:
    """Polynomial over the variables x_v, v in N^d, with Fraction coefficients.

    Terms map a monomial (sorted tuple of (count_vector, exponent) pairs,
    the empty tuple being the constant term) to its coefficient.
    """

    __slots__ = ("d", "terms")

    def __init__(self, d, terms=None):
        self.d = d
        clean = {}
        for mono, coeff in (terms or {}).items():
            coeff = Fraction(coeff)
            if coeff == 0:
                continue
            for cv, exp in mono:
                _check_cv(cv, d)
                if exp <= 0:
                    raise ValueError("exponents must be positive")
            clean[tuple(sorted(mono))] = coeff
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, d, value):
        value = Fraction(value)
        return cls(d, {(): value} if value else {})

    @classmethod
    def variable(cls, cv, d=None):
        cv = tuple(cv)
        d = len(cv) if d is None else d
        _check_cv(cv, d)
        return cls(d, {((cv, 1),): Fraction(1)})

    # -- ring operations ----------------------------------------------------

    def _require_same_d(self, other):
        if self.d != other.d:
            raise ValueError(f"mixed color counts: {self.d} vs {other.d}")

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.d, other)
        self._require_same_d(other)
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            out[mono] = out.get(mono, Fraction(0)) + coeff
        return Poly(self.d, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.d, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.d, other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.d, {m: c * Fraction(other) for m, c in self.terms.items()})
        self._require_same_d(other)
        out = {}
        for m1, c1 in self.terms.items():
            e1 = dict(m1)
            for m2, c2 in other.terms.items():
                merged = dict(e1)
                for cv, exp in m2:
                    merged[cv] = merged.get(cv, 0) + exp
                key = tuple(sorted(merged.items()))
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return Poly(self.d, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly.constant(self.d, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.d == other.d and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, tuple(sorted(self.terms.items()))))

    @property
    def is_zero(self):
        return not self.terms

    # -- substitution and grading -------------------------------------------

    def substitute(self, model):
        """Evaluate under x_v -> model.weight(v); exact for rational models."""
        if model.d != self.d:
            raise ValueError(f"model has {model.d} colors, polynomial {self.d}")
        total = None
        for mono, coeff in self.terms.items():
            term = coeff
            for cv, exp in mono:
                term = term * model.weight(cv) ** exp
            total = term if total is None else total + term
        if total is None:
            from .models import zero_scalar
            return zero_scalar(model.backend)
        return total

    def grade(self):
        """Split into height-graded components; the parts sum to self."""
        parts = {}
        for mono, coeff in self.terms.items():
            key = monomial_height(mono)
            parts.setdefault(key, {})[mono] = coeff
        return {key: Poly(self.d, terms) for key, terms in parts.items()}

    # -- rendering ------------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        def mono_str(mono):
            if not mono:
                return None
            bits = []
            for cv, exp in mono:
                var = "x[" + ",".join(str(c) for c in cv) + "]"
                bits.append(var if exp == 1 else f"{var}^{exp}")
            return " * ".join(bits)
        items = sorted(self.terms.items(),
                       key=lambda kv: (monomial_height(kv[0]), kv[0]))
        rendered = []
        for mono, coeff in items:
            ms = mono_str(mono)
            if ms is None:
                rendered.append(str(coeff))
            elif coeff == 1:
                rendered.append(ms)
            else:
                rendered.append(f"{coeff} * {ms}")
        return " + ".join(rendered)

    def __repr__(self):
        return f"Poly(d={self.d}, {str(self)})"


# Module-level spellings of the core ring operations.

def poly_mul(p, q):
    return p * q


def poly_substitute(p, model):
    return p.substitute(model)


def height_grade(p):
    return p.grade()
