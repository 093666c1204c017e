"""Catalog of exactly solvable models.

Continuous families (hermite, laguerre, jacobi) carry a pre-potential W with
ground state e^W and classical-orthogonal-polynomial excited states.
Difference families (q_hermite, askey_wilson) carry an analytic potential
function V on the interval (0, pi) whose ground state is a balanced product
of q-shifted factorials; excited states are the ground state times a monic
polynomial in cos x generated by a three-term recurrence.

Every family validates its closed-form energy rule against an independent
oracle at construction time: a finite-difference eigensolver for the
continuous families, least-squares eigenvalue extraction from the difference
equation for the q-families.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .analytic import AnalyticFn, inner_product
from .errors import DomainError, ParameterError, PoleError
from .jets import Jet
from .quadrature import QuadratureSpec
from .special import QPOCH_TAIL

OQM_NAMES = ("hermite", "laguerre", "jacobi")
DQM_NAMES = ("q_hermite", "askey_wilson")

DEFAULT_NMAX = 32
_VALIDATE_POINTS = 20
_ZERO_MODE_TOL = 1e-10
_ENERGY_ORACLE_TOL = 1e-3


class ShapeData:
    """Shape-invariance bookkeeping: parameter map, scale, first gap rule."""

    def __init__(self, si, kappa, e1, delta=None):
        self.si = si          # params dict -> params dict
        self.kappa = kappa    # positive scale constant
        self.e1 = e1          # params dict -> first energy gap
        self.delta = delta if delta is not None else si  # shift used by the A'-zero mode

    def orbit(self, params, n):
        out = [dict(params)]
        for _ in range(n):
            out.append(self.si(out[-1]))
        return out


# --------------------------------------------------------------------------
# continuous families
# --------------------------------------------------------------------------

class OqmFamily:
    """Solvable Schrodinger family on an interval, factorized through W."""

    kind = "oqm"

    def __init__(self, name, params, domain, w_prime_jet, energy_rule,
                 poly_recurrence, eta_jet, shape, label_params):
        self.name = name
        self.params = dict(params)
        self.domain = domain
        self.strip_halfwidth = math.inf
        self.nmax = DEFAULT_NMAX
        self._w_prime_jet = w_prime_jet
        self._energy = energy_rule
        self._recurrence = poly_recurrence  # n -> (b_n, c_n) for monic P in eta
        self._eta_jet = eta_jet
        self.shape = shape
        self.label = f"{name}({label_params})" if label_params else name
        self._h_cache = {}
        a, b = domain
        if math.isinf(a):
            self.quad = QuadratureSpec(kind="full_line", tolerance=1e-12)
        elif math.isinf(b):
            self.quad = QuadratureSpec(kind="half_line", tolerance=1e-12)
        else:
            self.quad = QuadratureSpec(kind="interval", a=a, b=b, tolerance=1e-12)

    # -- core evaluators -----------------------------------------------
    def w_prime(self):
        fam = self

        def fn(x):
            return fam._w_prime_jet(x, 0).value

        return AnalyticFn(fn, label=f"{self.label}.W'", is_real=True,
                          jet_fn=self._w_prime_jet)

    def potential(self):
        fam = self

        def jet_fn(x, order):
            wp = fam._w_prime_jet(x, order + 1)
            return (wp * wp).truncate(order) + wp.derivative()

        return AnalyticFn(lambda x: jet_fn(x, 0).value, label=f"{self.label}.U",
                          is_real=True, jet_fn=jet_fn)

    def phi0_log_jet(self, x, order):
        """Jet of W(x); exponentiate for the ground state."""
        return self._w_log_jet(x, order)

    def phi(self, n):
        """n-th eigenfunction phi_0 * P_n(eta), monic P_n, with exact jets."""
        if n < 0 or n > self.nmax:
            raise DomainError(f"n={n} outside tabulated range 0..{self.nmax}")
        fam = self

        def jet_fn(x, order):
            w = fam._w_log_jet(x, order)
            p = fam._poly_jet(n, x, order)
            return p * w.exp()

        return AnalyticFn(lambda x: jet_fn(x, 0).value,
                          label=f"{self.label}.phi{n}", is_real=True, jet_fn=jet_fn)

    def _poly_jet(self, n, x, order):
        eta = self._eta_jet(x, order)
        pm1 = Jet.const(0.0, x, order)
        p = Jet.const(1.0, x, order)
        for k in range(n):
            bk, ck = self._recurrence(k)
            pm1, p = p, (eta - bk) * p - ck * pm1
        return p

    def eta(self):
        fam = self
        return AnalyticFn(lambda x: fam._eta_jet(x, 0).value, label=f"{self.label}.eta",
                          is_real=True, jet_fn=fam._eta_jet)

    def energy(self, n):
        if n < 0:
            raise DomainError("energy level must be >= 0")
        return float(self._energy(n, self.params))

    def hnorm(self, n):
        """Squared norm of phi_n, cached quadrature."""
        if n not in self._h_cache:
            val = inner_product(self.phi(n), self.phi(n), self.quad)
            self._h_cache[n] = float(val.real)
        return self._h_cache[n]

    def interior(self, fraction=0.9):
        a, b = self.domain
        a = max(a, -8.0)
        b = min(b, 8.0)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return mid - fraction * half, mid + fraction * half

    def virtual_prefactor(self):
        return AnalyticFn(lambda x: 1.0 + 0j, label="1", is_real=True,
                          jet_fn=lambda x, order: Jet.const(1.0, x, order))

    def descriptor(self):
        return {"name": self.name, "params": _plain_params(self.params),
                "gamma": None, "domain": list(self.domain), "nmax": self.nmax}


def _hermite_family():
    def w_prime_jet(x, order):
        return -Jet.variable(x, order)

    def w_log_jet(x, order):
        jx = Jet.variable(x, order)
        return -0.5 * jx * jx

    def eta_jet(x, order):
        return Jet.variable(x, order)

    def recurrence(k):
        return 0.0, 0.5 * k

    shape = ShapeData(si=lambda p: dict(p), kappa=1.0, e1=lambda p: 2.0)
    fam = OqmFamily("hermite", {}, (-math.inf, math.inf), w_prime_jet,
                    lambda n, p: 2.0 * n, recurrence, eta_jet, shape, "")
    fam._w_log_jet = w_log_jet
    return fam


def _laguerre_family(g):
    if not g > 1:
        raise ParameterError(f"laguerre requires g > 1, got g = {g} (violates g > 1)")
    alpha = g - 0.5

    def w_prime_jet(x, order):
        jx = Jet.variable(x, order)
        return -jx + g / jx

    def w_log_jet(x, order):
        jx = Jet.variable(x, order)
        return -0.5 * jx * jx + g * jx.log()

    def eta_jet(x, order):
        jx = Jet.variable(x, order)
        return jx * jx

    def recurrence(k):
        return 2.0 * k + alpha + 1.0, k * (k + alpha)

    shape = ShapeData(si=lambda p: {"g": p["g"] + 1.0}, kappa=1.0, e1=lambda p: 4.0)
    fam = OqmFamily("laguerre", {"g": float(g)}, (0.0, math.inf), w_prime_jet,
                    lambda n, p: 4.0 * n, recurrence, eta_jet, shape, f"g={g}")
    fam._w_log_jet = w_log_jet
    return fam


def _jacobi_family(g):
    if not g > 1:
        raise ParameterError(f"jacobi requires g > 1, got g = {g} (violates g > 1)")

    def w_prime_jet(x, order):
        s, c = Jet.variable(x, order + 1).sincos()
        return (g * c / s).truncate(order)

    def w_log_jet(x, order):
        return g * Jet.variable(x, order).sin().log()

    def eta_jet(x, order):
        return Jet.variable(x, order).cos()

    def recurrence(k):
        # monic ultraspherical with weight sin^{2g}
        if k == 0:
            return 0.0, 0.0
        return 0.0, 0.25 * k * (k + 2.0 * g - 1.0) / ((k + g) * (k + g - 1.0))

    shape = ShapeData(si=lambda p: {"g": p["g"] + 1.0}, kappa=1.0,
                      e1=lambda p: 1.0 + 2.0 * p["g"])
    fam = OqmFamily("jacobi", {"g": float(g)}, (0.0, math.pi), w_prime_jet,
                    lambda n, p: n * (n + 2.0 * g), recurrence, eta_jet, shape, f"g={g}")
    fam._w_log_jet = w_log_jet
    return fam


# --------------------------------------------------------------------------
# difference families (pure imaginary shifts)
# --------------------------------------------------------------------------

def _conjugation_closed(avals, tol=1e-12):
    pool = list(avals)
    for a in avals:
        target = complex(a).conjugate()
        hit = None
        for k, b in enumerate(pool):
            if abs(b - target) <= tol * (1.0 + abs(target)):
                hit = k
                break
        if hit is None:
            return False
        pool.pop(hit)
    return True


class _FactorLogSum:
    """Sum of principal logs of q-Pochhammer factors log(1 - c e^{i m x} q^k).

    Each term is (coefficient c, integer direction m in {-2,-1,1,2}); the sum
    runs factors down to the truncation threshold.  With all evaluation
    points kept inside the open vertical strip 0 < Re x < pi and away from
    the factor zeros the per-factor principal branch is single-valued, so
    exp(half the sum) is the analytic square root that is positive on the
    real segment.
    """

    def __init__(self, q, terms):
        self.q = float(q)
        self.terms = []  # (c, m, sign) with sign +1 numerator / -1 denominator
        depth = int(math.ceil(math.log(QPOCH_TAIL) / math.log(self.q))) + 1
        for c, m, sign in terms:
            if c == 0:
                continue
            ck = complex(c)
            for _ in range(depth):
                if abs(ck) < QPOCH_TAIL:
                    break
                self.terms.append((ck, m, sign))
                ck *= self.q

    def __call__(self, x):
        s = 0j
        for c, m, sign in self.terms:
            s += sign * cmath.log(1.0 - c * cmath.exp(1j * m * x))
        return s

    def jet(self, x, order):
        jx = Jet.variable(x, order)
        s = Jet.const(0.0, x, order)
        for c, m, sign in self.terms:
            s = s + sign * (1.0 - c * (1j * m * jx).exp()).log()
        return s


class DqmFamily:
    """Solvable difference-Schrodinger family on (0, pi) with shift i*gamma."""

    kind = "dqm"

    def __init__(self, name, params, q, avals, label_params):
        self.name = name
        self.params = dict(params)
        self.q = float(q)
        self.gamma = math.log(self.q)
        self.avals = [complex(a) for a in avals]
        self.domain = (0.0, math.pi)
        self.nmax = DEFAULT_NMAX
        self.label = f"{name}({label_params})" if label_params else name
        # analyticity over the open strip 0 < Re x < pi: factors of real
        # parameters vanish only on the boundary lines Re x in {0, pi}, so
        # only parameters with a genuine phase bound the strip height
        nonreal = [abs(a) for a in self.avals if abs(a) > 0 and abs(a.imag) > 1e-14]
        self.strip_halfwidth = min((-math.log(r) for r in nonreal), default=math.inf)
        self._h_cache = {}
        self.quad = QuadratureSpec(kind="interval", a=0.0, b=math.pi, tolerance=1e-12)

        # potential: product of (1 - a_j e^{ix}) over ((1-e^{2ix})(1-q e^{2ix}))
        self._logV = _VLogSum(self.q, self.avals)
        # ground state: balanced q-factorial product, as half-log sum
        gterms = [(1.0, 2, +1), (1.0, -2, +1)]
        gterms += [(a, 1, -1) for a in self.avals if a != 0]
        gterms += [(a, -1, -1) for a in self.avals if a != 0]
        self._logphi0sq = _FactorLogSum(self.q, gterms)

        b4 = complex(np.prod(self.avals)) if self.avals else 0j
        self._b4 = b4
        self._bc = _aw_monic_coefficients(self.avals, self.q, self.nmax)

        qhalf = math.sqrt(self.q)
        self.shape = ShapeData(
            si=lambda p, s=qhalf: _shift_avals(p, s),
            kappa=1.0 / self.q,
            e1=lambda p: (1.0 / self.q - 1.0) * (1.0 - _prod_avals(p).real),
        )

    # -- potential side ---------------------------------------------------
    def sqrt_v(self):
        fam = self

        def fn(x):
            return cmath.exp(0.5 * fam._logV(complex(x)))

        return AnalyticFn(fn, strip_halfwidth=self.strip_halfwidth,
                          label=f"{self.label}.sqrtV")

    def v(self):
        fam = self
        return AnalyticFn(lambda x: cmath.exp(fam._logV(complex(x))),
                          strip_halfwidth=self.strip_halfwidth,
                          label=f"{self.label}.V",
                          sqrt_fn=lambda x: cmath.exp(0.5 * fam._logV(complex(x))))

    # -- wavefunction side --------------------------------------------------
    def phi0(self):
        fam = self

        def fn(x):
            return cmath.exp(0.5 * fam._logphi0sq(complex(x)))

        def jet_fn(x, order):
            return (0.5 * fam._logphi0sq.jet(x, order)).exp()

        return AnalyticFn(fn, strip_halfwidth=self.strip_halfwidth,
                          label=f"{self.label}.phi0", is_real=True, jet_fn=jet_fn)

    def poly_value(self, n, y):
        """Monic P_n(y) by the three-term recurrence."""
        bs, cs = self._bc
        pm1, p = 0j, 1.0 + 0j
        for k in range(n):
            pm1, p = p, (y - bs[k]) * p - cs[k] * pm1
        return p

    def phi(self, n):
        if n < 0 or n > self.nmax:
            raise DomainError(f"n={n} outside tabulated range 0..{self.nmax}")
        fam = self
        phi0 = self.phi0()

        def fn(x):
            x = complex(x)
            return phi0.fn(x) * fam.poly_value(n, cmath.cos(x))

        def jet_fn(x, order):
            w = (0.5 * fam._logphi0sq.jet(x, order)).exp()
            eta = Jet.variable(x, order).cos()
            bs, cs = fam._bc
            pm1 = Jet.const(0.0, x, order)
            p = Jet.const(1.0, x, order)
            for k in range(n):
                pm1, p = p, (eta - bs[k]) * p - cs[k] * pm1
            return w * p

        return AnalyticFn(fn, strip_halfwidth=self.strip_halfwidth,
                          label=f"{self.label}.phi{n}", is_real=True, jet_fn=jet_fn)

    def eta(self):
        return AnalyticFn(lambda x: cmath.cos(complex(x)), label="cos",
                          is_real=True,
                          jet_fn=lambda x, order: Jet.variable(x, order).cos())

    def energy(self, n):
        if n < 0:
            raise DomainError("energy level must be >= 0")
        val = (self.q ** (-n) - 1.0) * (1.0 - self._b4 * self.q ** (n - 1))
        return float(val.real)

    def hnorm(self, n):
        if n not in self._h_cache:
            val = inner_product(self.phi(n), self.phi(n), self.quad)
            self._h_cache[n] = float(val.real)
        return self._h_cache[n]

    def interior(self, fraction=0.9):
        half = 0.5 * math.pi
        return half - fraction * half, half + fraction * half

    def virtual_prefactor(self):
        return AnalyticFn(lambda x: cmath.sin(complex(x)), label="sin",
                          is_real=True,
                          jet_fn=lambda x, order: Jet.variable(x, order).sin())

    def shifted(self, params=None):
        """Same family at shifted parameters (ground-state shift by default)."""
        p = self.shape.delta(self.params) if params is None else params
        return make_family(self.name, **p)

    def descriptor(self):
        return {"name": self.name, "params": _plain_params(self.params),
                "gamma": self.gamma, "domain": list(self.domain), "nmax": self.nmax}


class _VLogSum:
    """Principal-log representation of the difference potential."""

    def __init__(self, q, avals):
        self.q = float(q)
        self.avals = [complex(a) for a in avals]

    def __call__(self, x):
        z = cmath.exp(1j * x)
        s = 0j
        for a in self.avals:
            if a != 0:
                s += cmath.log(1.0 - a * z)
        s -= cmath.log(1.0 - z * z) + cmath.log(1.0 - self.q * z * z)
        return s


def _shift_avals(params, factor):
    out = dict(params)
    for key in ("a1", "a2", "a3", "a4"):
        if key in out:
            out[key] = complex(out[key]) * factor
    return out


def _prod_avals(params):
    prod = 1.0 + 0j
    for key in ("a1", "a2", "a3", "a4"):
        prod *= complex(params.get(key, 0.0))
    return prod


def _aw_monic_coefficients(avals, q, nmax):
    """Monic three-term recurrence for the polynomial part in cos x.

    Evaluated through one reference parameter; the result is a symmetric
    function of the four parameters, so any nonzero reference gives the same
    (real) coefficients.  All parameters zero degenerates to b_n = 0,
    c_n = (1-q^n)/4.
    """
    if all(abs(a) == 0 for a in avals):
        return [0.0] * (nmax + 1), [0.0] + [(1.0 - q**n) / 4.0 for n in range(1, nmax + 1)]
    idx = max(range(len(avals)), key=lambda j: abs(avals[j]))
    a = avals[idx]
    b, c, d = [avals[j] for j in range(len(avals)) if j != idx]
    s4 = a * b * c * d

    def big_a(n):
        if n == 0:
            return (1 - a * b) * (1 - a * c) * (1 - a * d) / (a * (1 - s4))
        return ((1 - a * b * q**n) * (1 - a * c * q**n) * (1 - a * d * q**n)
                * (1 - s4 * q ** (n - 1))
                / (a * (1 - s4 * q ** (2 * n - 1)) * (1 - s4 * q ** (2 * n))))

    def big_c(n):
        return (a * (1 - q**n) * (1 - b * c * q ** (n - 1)) * (1 - b * d * q ** (n - 1))
                * (1 - c * d * q ** (n - 1))
                / ((1 - s4 * q ** (2 * n - 2)) * (1 - s4 * q ** (2 * n - 1))))

    bs, cs = [], [0.0]
    for n in range(nmax + 1):
        bn = 0.5 * (a + 1.0 / a - big_a(n) - big_c(n))
        if abs(bn.imag) > 1e-10 * (1.0 + abs(bn)):
            raise ParameterError(f"recurrence coefficient b_{n} not real: {bn}")
        bs.append(bn.real)
        if n >= 1:
            cn = 0.25 * big_a(n - 1) * big_c(n)
            if abs(cn.imag) > 1e-10 * (1.0 + abs(cn)):
                raise ParameterError(f"recurrence coefficient c_{n} not real: {cn}")
            cs.append(cn.real)
    return bs, cs


# --------------------------------------------------------------------------
# construction and validation
# --------------------------------------------------------------------------

def make_family(name, validate=True, **params):
    """Build a named family after checking its parameter constraints.

    Raises ParameterError quoting the violated inequality; runs the family's
    self-consistency suite (potential identity or zero mode, energy oracle)
    unless validate=False.
    """
    if name == "hermite":
        fam = _hermite_family()
    elif name == "laguerre":
        fam = _laguerre_family(float(params.get("g", 0.0)))
    elif name == "jacobi":
        fam = _jacobi_family(float(params.get("g", 0.0)))
    elif name in ("q_hermite", "askey_wilson"):
        q = float(params.get("q", 0.0))
        if not 0.0 < q < 1.0:
            raise ParameterError(f"{name} requires 0 < q < 1, got q = {q}")
        if name == "q_hermite":
            avals = [0.0, 0.0, 0.0, 0.0]
            fam = DqmFamily(name, {"q": q}, q, avals, f"q={q}")
        else:
            avals = [complex(params.get(k, 0.0)) for k in ("a1", "a2", "a3", "a4")]
            for k, a in zip(("a1", "a2", "a3", "a4"), avals):
                if not abs(a) < 1.0:
                    raise ParameterError(f"askey_wilson requires |{k}| < 1, got |{k}| = {abs(a):g}")
            if not _conjugation_closed(avals):
                raise ParameterError(
                    "askey_wilson requires the parameter set to be closed under "
                    "complex conjugation ({a*} = {a} as a set)")
            p = {"q": q, "a1": avals[0], "a2": avals[1], "a3": avals[2], "a4": avals[3]}
            fam = DqmFamily(name, p, q, avals,
                            "a=" + ",".join(f"{a:g}" for a in avals) + f",q={q}")
    else:
        raise ParameterError(f"unknown family {name!r}; see catalog()")
    if validate:
        _validate_family(fam)
    return fam


def catalog():
    """Names and constraints of the built-in families."""
    return {
        "hermite": "no parameters; full line",
        "laguerre": "g > 1; half line (0, inf)",
        "jacobi": "g > 1; interval (0, pi)",
        "q_hermite": "0 < q < 1; interval (0, pi); shift gamma = log q",
        "askey_wilson": "|a_j| < 1, {a*}={a} as a set, 0 < q < 1; interval (0, pi)",
    }


def family_eval(fam, part, n=None, x=None):
    """Uniform access to family data: V, Vstar, phi0, phi_n, eta, energy."""
    if part == "energy":
        return fam.energy(n)
    if part == "eta":
        return fam.eta()(x)
    if part == "phi0":
        return (fam.phi(0) if fam.kind == "oqm" else fam.phi0())(x)
    if part == "phi_n":
        return fam.phi(n)(x)
    if fam.kind != "dqm":
        raise DomainError(f"part {part!r} requires a difference family")
    if part == "V":
        return fam.v()(x)
    if part == "Vstar":
        return fam.v().star()(x)
    raise DomainError(f"unknown part {part!r}")


def virtual_state(fam):
    """The zero mode removed from the spectrum: annihilated by the raising
    factor, excluded from the Hilbert space.

    Continuous families: e^{-W}.  Difference families: the prefactor
    (sin x here) over the ground state at shifted parameters.
    """
    if fam.kind == "oqm":
        def jet_fn(x, order):
            return (-fam._w_log_jet(x, order)).exp()

        return AnalyticFn(lambda x: jet_fn(x, 0).value,
                          label=f"{fam.label}.virtual", is_real=True, jet_fn=jet_fn)
    shifted = fam.shifted()
    phi0s = shifted.phi0()
    pref = fam.virtual_prefactor()
    xs = np.linspace(0.05 * math.pi, 0.95 * math.pi, 11)
    for xr in xs:
        if abs(phi0s.fn(complex(xr))) < 1e-13:
            raise PoleError(f"shifted ground state vanishes at x={xr:g}; "
                            "virtual state would be singular")

    def fn(x):
        return pref.fn(complex(x)) / phi0s.fn(complex(x))

    return AnalyticFn(fn, strip_halfwidth=min(fam.strip_halfwidth, shifted.strip_halfwidth),
                      label=f"{fam.label}.virtual", is_real=True)


def _plain_params(params):
    out = {}
    for k, v in params.items():
        v = complex(v)
        out[k] = v.real if v.imag == 0 else [v.real, v.imag]
    return out


# -- construction-time validation -------------------------------------------

def _validate_family(fam):
    if fam.kind == "oqm":
        _validate_oqm(fam)
    else:
        _validate_dqm(fam)


def _validate_oqm(fam):
    lo, hi = fam.interior()
    xs = np.linspace(lo, hi, _VALIDATE_POINTS)
    u = fam.potential()
    wp = fam.w_prime()
    for xr in xs:
        j = wp.jet(complex(xr), 1)
        lhs = j.value**2 + j.deriv(1)
        rhs = u(complex(xr))
        if abs(lhs - rhs) > 1e-10 * (1.0 + abs(rhs)):
            raise ParameterError(f"{fam.label}: potential/pre-potential mismatch at x={xr:g}")
        phi0 = cmath.exp(fam._w_log_jet(complex(xr), 0).value)
        if not phi0.real > 0:
            raise ParameterError(f"{fam.label}: ground state not positive at x={xr:g}")
    _oqm_energy_oracle(fam)


def _oqm_energy_oracle(fam, k=3):
    from .verify import grid_eigensolve  # deferred: verify imports families

    u = fam.potential()
    lo, hi = _oracle_box(fam)
    levels = grid_eigensolve(lambda x: u(complex(x)).real, (lo, hi), 1400, k)
    for n in range(k):
        if abs(levels[n] - fam.energy(n)) > _ENERGY_ORACLE_TOL * (1 + abs(fam.energy(n))):
            raise ParameterError(
                f"{fam.label}: closed-form energy E_{n}={fam.energy(n)} disagrees with "
                f"grid oracle {levels[n]:.6f}")


def _oracle_box(fam):
    a, b = fam.domain
    if math.isinf(a) or math.isinf(b):
        hi = 1.0
        while math.isinf(b) and fam.potential()(complex(hi)).real < 40 * (1 + fam.energy(4)):
            hi *= 1.25
        if math.isinf(a):
            return (-hi, hi) if math.isinf(b) else (a, hi)
        return (max(a, 1e-4), hi)
    return (a + 1e-9, b - 1e-9)


def _validate_dqm(fam):
    xs = np.linspace(0.08 * math.pi, 0.92 * math.pi, _VALIDATE_POINTS)
    sqv = fam.sqrt_v()
    phi0 = fam.phi0()
    g = fam.gamma
    for xr in xs:
        x = complex(xr)
        # star of sqrtV evaluated at the shifted point x - ig/2
        lhs = complex(sqv.fn((x - 0.5j * g).conjugate())).conjugate() * phi0.fn(x - 0.5j * g)
        rhs = sqv.fn(x + 0.5j * g) * phi0.fn(x + 0.5j * g)
        if abs(lhs - rhs) > _ZERO_MODE_TOL * (1.0 + abs(rhs)):
            raise ParameterError(f"{fam.label}: ground-state zero mode fails at x={xr:g}")
    _dqm_energy_oracle(fam)


def _dqm_energy_oracle(fam, nmax=4):
    """Least-squares eigenvalue extraction from the difference equation."""
    sqv = fam.sqrt_v()
    g = fam.gamma
    xs = np.linspace(0.15 * math.pi, 0.85 * math.pi, 10)
    for n in range(nmax + 1):
        phi = fam.phi(n)
        num = 0j
        den = 0.0
        for xr in xs:
            x = complex(xr)
            sv = sqv.fn(x)
            svs = complex(sqv.fn(x.conjugate())).conjugate()
            hval = (sv * complex(sqv.fn((x - 1j * g).conjugate())).conjugate() * phi.fn(x - 1j * g)
                    + svs * sqv.fn(x + 1j * g) * phi.fn(x + 1j * g)
                    - (sv * sv + svs * svs) * phi.fn(x))
            pv = phi.fn(x)
            num += hval * pv.conjugate()
            den += abs(pv) ** 2
        e_fit = (num / den).real
        if abs(e_fit - fam.energy(n)) > 1e-8 * (1.0 + abs(fam.energy(n))):
            raise ParameterError(
                f"{fam.label}: closed-form energy E_{n}={fam.energy(n):.8f} disagrees "
                f"with difference-equation fit {e_fit:.8f}")
