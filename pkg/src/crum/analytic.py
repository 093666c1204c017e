"""Complex-analytic function values on a strip: star conjugation, derivative
jets, Wronskian and Casoratian determinants, inner products.

Everything here is immutable after construction and safe to evaluate
concurrently; evaluation is pure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CapabilityError, StripError
from .jets import Jet
from .quadrature import QuadratureSpec, integrate

MAX_JET_ORDER = 24
_CAUCHY_POINTS = 64


@dataclass(frozen=True)
class AnalyticFn:
    """A complex-analytic function on |Im x| <= strip_halfwidth.

    ``fn`` evaluates the function; ``jet_fn``, when given, produces exact
    truncated Taylor expansions (built-in families wire closed-form
    recurrences here).  Without it, derivatives fall back to Cauchy-circle
    numerical differentiation.  ``is_real`` declares f* = f.
    """

    fn: Callable[[complex], complex]
    strip_halfwidth: float = math.inf
    label: str = ""
    is_real: bool = False
    jet_fn: Optional[Callable[[complex, int], Jet]] = None
    sqrt_fn: Optional[Callable[[complex], complex]] = None

    def check_strip(self, x):
        x = complex(x)
        if abs(x.imag) > self.strip_halfwidth * (1 + 1e-12) + 1e-15:
            raise StripError(x, self.strip_halfwidth, self.label)
        return x

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return np.asarray([self.fn(complex(v)) for v in x])
        return self.fn(self.check_strip(x))

    def jet(self, x, order):
        """Taylor jet of this function at x, coefficients c_k = f^(k)(x)/k!."""
        if order < 0:
            raise CapabilityError("jet order must be >= 0")
        if order > MAX_JET_ORDER:
            raise CapabilityError(f"jet order {order} beyond cap {MAX_JET_ORDER}")
        if not isinstance(x, np.ndarray):
            x = self.check_strip(x)
        if self.jet_fn is not None:
            return self.jet_fn(x, order)
        return self._cauchy_jet(x, order)

    def _cauchy_jet(self, x, order):
        if order == 0:
            return Jet(x, [self(x)])
        r = 0.1
        if math.isfinite(self.strip_halfwidth):
            r = min(r, self.strip_halfwidth / 2.0, self.strip_halfwidth - abs(complex(x).imag))
        if r <= 0:
            raise StripError(x, self.strip_halfwidth, self.label)
        m = _CAUCHY_POINTS
        vals = np.asarray([self.fn(x + r * cmath.exp(2j * math.pi * k / m)) for k in range(m)])
        coeffs = np.fft.fft(vals) / m
        return Jet(x, [complex(coeffs[k]) / r**k for k in range(order + 1)])

    def star(self):
        """The star-conjugate function f*(x) = conj(f(conj x))."""
        if self.is_real:
            return self
        base = self

        def starred(x):
            return complex(base.fn(complex(x).conjugate())).conjugate()

        star_jet = None
        if base.jet_fn is not None:

            def star_jet(x, order):
                j = base.jet_fn(complex(x).conjugate(), order)
                return Jet(x, [complex(c).conjugate() for c in j.coeffs])

        return AnalyticFn(
            starred,
            strip_halfwidth=base.strip_halfwidth,
            label=f"{base.label}*" if base.label else "",
            jet_fn=star_jet,
        )


def from_poly(coeffs, label="", strip_halfwidth=math.inf):
    """AnalyticFn for a polynomial given its coefficients c_0 + c_1 x + ..."""
    cs = [complex(c) for c in coeffs]

    def fn(x):
        acc = 0j
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    def jet_fn(x, order):
        jx = Jet.variable(x, order)
        acc = Jet.const(0.0, x, order)
        for c in reversed(cs):
            acc = acc * jx + c
        return acc

    return AnalyticFn(fn, strip_halfwidth=strip_halfwidth, label=label,
                      is_real=all(c.imag == 0 for c in cs), jet_fn=jet_fn)


def star_eval(f, x):
    """Value of the star-conjugate of f at x: conj(f(conj x))."""
    x = f.check_strip(x)
    f.check_strip(x.conjugate())
    return complex(f.fn(x.conjugate())).conjugate()


def eval_jet(f, x, order):
    return f.jet(x, order)


def lu_det(matrix):
    """Determinant by partially pivoted LU on a complex matrix.

    Returns (det, growth) where growth is the element growth factor
    max|U| / max|A|; chains are shallow so conditioning is tracked,
    not mitigated.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j, 1.0
    scale0 = np.max(np.abs(a))
    if scale0 == 0.0:
        return 0j, 1.0
    det = 1.0 + 0j
    growth = scale0
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[piv, col]) == 0.0:
            return 0j, growth / scale0
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            det = -det
        det *= a[col, col]
        if col + 1 < n:
            factors = a[col + 1 :, col] / a[col, col]
            a[col + 1 :, col:] -= np.outer(factors, a[col, col:])
            growth = max(growth, np.max(np.abs(a[col + 1 :, col:])) if col + 1 < n else 0.0)
    return det, growth / scale0


def wronskian(fs, x, info=False):
    """Determinant of the derivative tower (row j holds the (j-1)-th
    derivatives); an empty list gives 1."""
    n = len(fs)
    if n == 0:
        return (1.0 + 0j, 1.0) if info else 1.0 + 0j
    jets = [f.jet(x, n - 1) for f in fs]
    m = [[jets[k].deriv(j) for k in range(n)] for j in range(n)]
    det, growth = lu_det(m)
    return (det, growth) if info else det


def casoratian(fs, x, gamma, info=False):
    """Shifted-argument determinant i^{n(n-1)/2} det f_k(x + i(n+1-2j) gamma/2).

    Degenerates to 1 for an empty list and to f(x) for a single function;
    raises StripError naming the first shifted point that leaves a strip.
    """
    n = len(fs)
    if n == 0:
        return (1.0 + 0j, 1.0) if info else 1.0 + 0j
    x = complex(x)
    rows = []
    for j in range(1, n + 1):
        pt = x + 0.5j * (n + 1 - 2 * j) * gamma
        row = []
        for f in fs:
            f.check_strip(pt)
            row.append(f(pt))
        rows.append(row)
    det, growth = lu_det(rows)
    det *= 1j ** ((n * (n - 1) // 2) % 4)
    return (det, growth) if info else det


def inner_product(f, g, quad: QuadratureSpec):
    """Integral of conj(f(x)) g(x) over the physical domain."""

    def integrand(x):
        return complex(f.fn(complex(x))).conjugate() * g.fn(complex(x))

    value, _err = integrate(integrand, quad)
    return value

