"""Iterated factorization chains for the difference (imaginary-shift) families.

The deformed potential of each level is assembled from three branch-anchored
square roots:

  * g_s, the square root of V^[s-1](x-ig/2) V^[s-1]*(x-ig/2), anchored
    positive on the line Im x = gamma/2 (where the radicand is |V|^2 of a
    real point) and continued vertically;
  * chi_s, the square root of the (sign-fixed) seed function phi^[s]_s,
    anchored positive on the real axis;
  * their star conjugates, defined by coefficient conjugation.

With sqrtV_s := g_s(x) chi_s(x-ig)/chi_s(x) the level-s lowering factor
annihilates the seed identically and (sqrtV_s)^2 reproduces the deformed
potential, so no per-point phase guessing is ever needed.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .analytic import AnalyticFn, casoratian
from .errors import BranchError, ChainBreakError, DomainError, PoleError

NODE_SCAN_POINTS = 301
_BRANCH_MAX_SEGMENTS = 512
_BRANCH_PHASE_CAP = math.pi / 2


class BranchedSqrt:
    """Analytic square root of a computed function, fixed on an anchor line.

    The branch is positive where the radicand is positive on Im x =
    anchor_im and extended by stepwise continuation along the vertical
    segment to the target; a step whose phase jump cannot be brought under
    pi/2 by refinement raises BranchError.
    """

    def __init__(self, radicand, anchor_im=0.0, label=""):
        self.radicand = radicand
        self.anchor_im = float(anchor_im)
        self.label = label
        self._memo = {}

    def __call__(self, x):
        x = complex(x)
        hit = self._memo.get(x)
        if hit is not None:
            return hit
        val = self._continue_to(x)
        self._memo[x] = val
        return val

    def _continue_to(self, x):
        if abs(x.imag - self.anchor_im) < 1e-14:
            return cmath.sqrt(self.radicand(x))
        x0 = complex(x.real, self.anchor_im)
        nseg = 4
        while nseg <= _BRANCH_MAX_SEGMENTS:
            pts = [x0 + (x - x0) * k / nseg for k in range(nseg + 1)]
            vals = [self.radicand(p) for p in pts]
            if any(v == 0 for v in vals):
                raise PoleError(f"branch path of {self.label or 'sqrt'} hits a zero near {x}")
            jumps = [abs(cmath.phase(vals[k + 1] / vals[k])) for k in range(nseg)]
            if max(jumps) < _BRANCH_PHASE_CAP:
                w = cmath.sqrt(vals[0])
                for k in range(nseg):
                    w *= cmath.sqrt(vals[k + 1] / vals[k])
                return w
            nseg *= 2
        raise BranchError(
            f"square-root branch of {self.label or 'sqrt'} could not be tracked to {x}")


class DqmChainLevel:
    """One rung of the difference chain."""

    def __init__(self, family, s, e_s, sqrt_v, sqrt_v_star, phi_fn, parent=None,
                 branch_anchor=None):
        self.family = family
        self.s = s
        self.E_s = e_s
        self.gamma = family.gamma
        self.sqrt_v = sqrt_v            # callable complex -> complex
        self.sqrt_v_star = sqrt_v_star
        self._phi_fn = phi_fn           # (n, x) -> complex, memoized
        self.parent = parent
        self.branch_anchor = branch_anchor  # records (anchor_im, sign) choices

    def phi(self, n, x=None):
        if n < self.s:
            raise DomainError(f"level {self.s} has phi_n only for n >= {self.s}")
        if x is None:
            lvl = self
            return AnalyticFn(lambda xx: lvl._phi_fn(n, complex(xx)),
                              strip_halfwidth=self.family.strip_halfwidth,
                              label=f"phi[{self.s}]_{n}", is_real=True)
        return self._phi_fn(n, complex(x))

    def v(self, x):
        return self.sqrt_v(complex(x)) ** 2

    def v_star(self, x):
        return self.sqrt_v_star(complex(x)) ** 2

    def interior(self, fraction=0.9):
        return self.family.interior(fraction)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def apply_A(level, f):
    """Annihilation-side factor: i (sqrtV*(x-ig/2) f(x-ig/2) - sqrtV(x+ig/2) f(x+ig/2))."""
    g = level.gamma
    fv = _as_callable(f)

    def out(x):
        x = complex(x)
        return 1j * (level.sqrt_v_star(x - 0.5j * g) * fv(x - 0.5j * g)
                     - level.sqrt_v(x + 0.5j * g) * fv(x + 0.5j * g))

    return out


def apply_Adag(level, f):
    """Creation-side factor: -i (sqrtV(x) f(x-ig/2) - sqrtV*(x) f(x+ig/2))."""
    g = level.gamma
    fv = _as_callable(f)

    def out(x):
        x = complex(x)
        return -1j * (level.sqrt_v(x) * fv(x - 0.5j * g)
                      - level.sqrt_v_star(x) * fv(x + 0.5j * g))

    return out


def generic_apply_A(v_fn, gamma, f):
    """Lowering factor for a standalone analytic potential (principal or
    attached square root); used by the continuum-limit checks."""
    sq = _sqrt_of(v_fn)

    def sqs(x):
        return complex(sq(complex(x).conjugate())).conjugate()

    fv = _as_callable(f)

    def out(x):
        x = complex(x)
        return 1j * (sqs(x - 0.5j * gamma) * fv(x - 0.5j * gamma)
                     - sq(x + 0.5j * gamma) * fv(x + 0.5j * gamma))

    return out


def generic_hamiltonian_apply(v_fn, gamma, f, x):
    sq = _sqrt_of(v_fn)

    def sqs(xx):
        return complex(sq(complex(xx).conjugate())).conjugate()

    fv = _as_callable(f)
    x = complex(x)
    return (sq(x) * sqs(x - 1j * gamma) * fv(x - 1j * gamma)
            + sqs(x) * sq(x + 1j * gamma) * fv(x + 1j * gamma)
            - (sq(x) ** 2 + sqs(x) ** 2) * fv(x))


def _sqrt_of(v_fn):
    if isinstance(v_fn, AnalyticFn) and v_fn.sqrt_fn is not None:
        return v_fn.sqrt_fn
    fv = _as_callable(v_fn)
    return lambda x: cmath.sqrt(fv(x))


def _as_callable(f):
    if isinstance(f, AnalyticFn):
        return f.fn
    return f


def hamiltonian_apply(level, f, x):
    """Difference-operator action plus the level constant.

    sqrt(V V*-shifted) coefficients are products of the level's anchored
    square roots, which keeps the factorized and expanded forms identical.
    """
    g = level.gamma
    fv = _as_callable(f)
    x = complex(x)
    term_down = level.sqrt_v(x) * level.sqrt_v_star(x - 1j * g) * fv(x - 1j * g)
    term_up = level.sqrt_v_star(x) * level.sqrt_v(x + 1j * g) * fv(x + 1j * g)
    diag = (level.v(x) + level.v_star(x)) * fv(x)
    return term_down + term_up - diag + level.E_s * fv(x)


# ---------------------------------------------------------------------------
# chain construction
# ---------------------------------------------------------------------------

def level0(family):
    sqv = family.sqrt_v()
    sqv_fn = sqv.fn

    def sqv_star(x):
        return complex(sqv_fn(complex(x).conjugate())).conjugate()

    memo = {}
    phi_cache = {}

    def phi_fn(n, x):
        key = (n, x)
        hit = memo.get(key)
        if hit is None:
            if n not in phi_cache:
                phi_cache[n] = family.phi(n).fn
            hit = phi_cache[n](x)
            memo[key] = hit
        return hit

    return DqmChainLevel(family, 0, family.energy(0), sqv_fn, sqv_star, phi_fn)


def next_potential(level):
    """Anchored square root of the next deformed potential.

    Returns (sqrt_v, sqrt_v_star, seed_sign); refuses when the new seed
    changes sign on the sampled physical region.
    """
    s_new = level.s + 1
    g = level.gamma
    fam = level.family
    lift = apply_A(level, lambda x: level._phi_fn(s_new, x))

    memo = {}

    def psi(x):
        x = complex(x)
        hit = memo.get(x)
        if hit is None:
            hit = lift(x)
            memo[x] = hit
        return hit

    lo, hi = fam.interior()
    xs = np.linspace(lo, hi, NODE_SCAN_POINTS)
    vals = np.asarray([psi(complex(t)).real for t in xs])
    if np.any(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        raise ChainBreakError(
            f"phi[{s_new}]_{s_new} changes sign on the physical region; the deformed "
            "potential would develop singularities")
    sigma = 1.0 if vals[len(vals) // 2] > 0 else -1.0

    chi = BranchedSqrt(lambda x: sigma * psi(x), anchor_im=0.0, label=f"chi[{s_new}]")

    def radicand(x):
        return level.sqrt_v(x - 0.5j * g) * level.sqrt_v_star(x - 0.5j * g)

    g_anchor = BranchedSqrt(radicand, anchor_im=0.5 * g, label=f"g[{s_new}]")

    def sqrt_v(x):
        x = complex(x)
        return g_anchor(x) * chi(x - 1j * g) / chi(x)

    def sqrt_v_star(x):
        return complex(sqrt_v(complex(x).conjugate())).conjugate()

    return sqrt_v, sqrt_v_star, sigma, psi


def step_chain(level, nmax=None):
    s_new = level.s + 1
    sqrt_v, sqrt_v_star, sigma, psi = next_potential(level)
    memo = {}

    def phi_fn(n, x):
        key = (n, x)
        hit = memo.get(key)
        if hit is None:
            hit = apply_A(level, lambda xx: level._phi_fn(n, xx))(x)
            memo[key] = hit
        return hit

    new = DqmChainLevel(level.family, s_new, level.family.energy(s_new),
                        sqrt_v, sqrt_v_star, phi_fn, parent=level,
                        branch_anchor={"anchor_im": 0.5 * level.gamma, "seed_sign": sigma})
    return new


DEPTH_CAP = 4


def build_chain(family, depth):
    if depth > DEPTH_CAP:
        from .errors import CapabilityError
        raise CapabilityError(
            f"chain depth {depth} exceeds the double-precision cap {DEPTH_CAP}; "
            "deeper chains need a wider-mantissa backend")
    levels = [level0(family)]
    for _ in range(depth):
        levels.append(step_chain(levels[-1]))
    return levels


def downshift(level, n):
    """Parent eigenfunction reconstructed as Adag phi / (E_n - E_{s-1})."""
    if level.parent is None:
        raise DomainError("level 0 has no parent")
    if n < level.s:
        raise DomainError(f"downshift needs n >= s = {level.s}")
    gap = level.family.energy(n) - level.parent.E_s
    raise_fn = apply_Adag(level.parent, lambda x: level._phi_fn(n, x))

    def out(x):
        return raise_fn(x) / gap

    return out


# ---------------------------------------------------------------------------
# determinant formulas
# ---------------------------------------------------------------------------

def _sqrt_v_prefactor(levels, s, x, gamma):
    """Product of sqrt V^[l] (x + i (s-l) gamma / 2) over levels l < s."""
    pref = 1.0 + 0j
    for lvl in range(s):
        pref *= levels[lvl].sqrt_v(x + 0.5j * (s - lvl) * gamma)
    return pref


def phi_via_casoratian(levels, s, n, x):
    """Determinant route to phi^[s]_n: prefactor times a ratio of shifted
    determinants of level-0 eigenfunctions."""
    base = levels[0]
    fam = base.family
    g = fam.gamma
    x = complex(x)
    fs = [fam.phi(k) for k in range(s)]
    den = casoratian(fs, x - 0.5j * g, g)
    if abs(den) < 1e-280:
        raise PoleError(f"denominator determinant vanishes at x={x}")
    num = casoratian(fs + [fam.phi(n)], x, g)
    return _sqrt_v_prefactor(levels, s, x, g) * num / den


def check_function(levels, s, n, x):
    """Eigenfunction normalized by the square-root prefactor (the form whose
    shifted products build the plain determinants)."""
    x = complex(x)
    g = levels[0].family.gamma
    val = levels[s]._phi_fn(n, x) if s > 0 else levels[0]._phi_fn(n, x)
    return val / _sqrt_v_prefactor(levels, s, x, g)


# ---------------------------------------------------------------------------
# identity residuals
# ---------------------------------------------------------------------------

def relation_residual(kind, levels, samples, ns=None, generic_fns=None, last_only=False):
    """Max normalized residual of a chain identity over the sample points.

    kinds: zero_mode, quadratic, linear, intertwine, factorization,
    step_determinant, casoratian_jacobi, check_product, casoratian_ratio,
    downshift_roundtrip, iso_spectral, realness.  `last_only` restricts the
    determinant-prefix identities to the deepest level of the given chain.
    """
    table = {
        "zero_mode": _res_zero_mode,
        "quadratic": _res_quadratic,
        "linear": _res_linear,
        "intertwine": _res_intertwine,
        "factorization": _res_factorization,
        "step_determinant": _res_step_determinant,
        "downshift_roundtrip": _res_downshift,
        "iso_spectral": _res_iso_spectral,
        "realness": _res_realness,
    }
    if kind == "casoratian_jacobi":
        return _res_casoratian_jacobi(levels, samples, generic_fns=generic_fns)
    if kind in ("check_product", "casoratian_ratio"):
        fn = _res_check_product if kind == "check_product" else _res_casoratian_ratio
        s_values = [len(levels) - 1] if last_only else None
        return fn(levels, samples, ns=ns, s_values=s_values)
    if kind not in table:
        raise DomainError(f"unknown relation kind {kind!r}")
    return table[kind](levels, samples, ns=ns)


def _norm(lhs, rhs):
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def _level_ns(level, ns, count=2):
    if ns is not None:
        return [n for n in ns if n >= level.s]
    return [level.s + 1, level.s + 2][:count]


def _res_zero_mode(levels, samples, ns=None):
    worst = 0.0
    for level in levels:
        low = apply_A(level, lambda x, lvl=level: lvl._phi_fn(lvl.s, x))
        for x in samples:
            scale = 1.0 + abs(level._phi_fn(level.s, complex(x)))
            worst = max(worst, abs(low(x)) / scale)
    return worst


def _res_quadratic(levels, samples, ns=None):
    worst = 0.0
    g = levels[0].gamma
    for level in levels[1:]:
        par = level.parent
        for x in samples:
            x = complex(x)
            lhs = par.v(x - 0.5j * g) * par.v_star(x - 0.5j * g)
            rhs = level.v(x) * level.v_star(x - 1j * g)
            worst = max(worst, _norm(lhs, rhs))
    return worst


def _res_linear(levels, samples, ns=None):
    worst = 0.0
    g = levels[0].gamma
    for level in levels[1:]:
        par = level.parent
        gap = level.E_s - par.E_s
        for x in samples:
            x = complex(x)
            lhs = par.v(x + 0.5j * g) + par.v_star(x - 0.5j * g)
            rhs = level.v(x) + level.v_star(x) - gap
            worst = max(worst, _norm(lhs, rhs))
    return worst


def _res_intertwine(levels, samples, ns=None):
    worst = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        for n in _level_ns(hi, ns):
            f = lambda x, nn=n, lvl=lo: lvl._phi_fn(nn, x)
            hf = lambda x, lvl=lo, ff=f: hamiltonian_apply(lvl, ff, x)
            af = apply_A(lo, f)
            lhs_fn = apply_A(lo, hf)
            for x in samples:
                lhs = lhs_fn(x)
                rhs = hamiltonian_apply(hi, af, x)
                worst = max(worst, _norm(lhs, rhs))
    return worst


def _res_factorization(levels, samples, ns=None):
    """A^[s-1] A^[s-1]dag + E_{s-1} equals the level-s difference operator."""
    worst = 0.0
    for level in levels[1:]:
        par = level.parent
        for n in _level_ns(level, ns):
            f = lambda x, nn=n, lvl=level: lvl._phi_fn(nn, x)
            lowered = apply_Adag(par, f)
            lifted = apply_A(par, lowered)
            for x in samples:
                lhs = lifted(x) + par.E_s * f(complex(x))
                rhs = hamiltonian_apply(level, f, x)
                worst = max(worst, _norm(lhs, rhs))
    return worst


def _res_step_determinant(levels, samples, ns=None):
    """One-step 2x2 determinant route to phi^[s]_n."""
    worst = 0.0
    g = levels[0].gamma
    for level in levels[1:]:
        par = level.parent
        s = level.s
        for n in _level_ns(level, ns):
            for x in samples:
                x = complex(x)
                up, dn = x + 0.5j * g, x - 0.5j * g
                det = (par._phi_fn(s - 1, up) * par._phi_fn(n, dn)
                       - par._phi_fn(n, up) * par._phi_fn(s - 1, dn))
                lhs = 1j * par.sqrt_v(up) / par._phi_fn(s - 1, dn) * det
                rhs = level._phi_fn(n, x)
                worst = max(worst, _norm(lhs, rhs))
    return worst


def _res_check_product(levels, samples, ns=None, s_values=None):
    """Plain determinant equals the shifted product of check functions."""
    worst = 0.0
    fam = levels[0].family
    g = fam.gamma
    for s in s_values or range(1, len(levels)):
        for n in _level_ns(levels[s], ns):
            fs = [fam.phi(k) for k in range(s)] + [fam.phi(n)]
            for x in samples:
                x = complex(x)
                lhs = casoratian(fs, x, g)
                rhs = check_function(levels, s, n, x)
                for k in range(s):
                    rhs *= check_function(levels, k, k, x + 0.5j * (k - s) * g)
                worst = max(worst, _norm(lhs, rhs))
    return worst


def _res_casoratian_ratio(levels, samples, ns=None, s_values=None):
    worst = 0.0
    for s in s_values or range(1, len(levels)):
        for n in _level_ns(levels[s], ns):
            for x in samples:
                lhs = phi_via_casoratian(levels, s, n, complex(x))
                rhs = levels[s]._phi_fn(n, complex(x))
                worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    return worst


def _res_casoratian_jacobi(levels, samples, generic_fns=None):
    """Two-determinant contraction identity, on eigenfunction lists and on
    generic analytic test functions."""
    fam = levels[0].family
    g = fam.gamma
    worst = 0.0
    lists = []
    smax = len(levels) - 1
    if smax >= 1:
        ns = _level_ns(levels[smax], None, count=1)
        lists.append(([fam.phi(k) for k in range(smax)], fam.phi(smax), fam.phi(ns[0])))
    if generic_fns is None:
        generic_fns = _default_generic_fns()
    if len(generic_fns) >= 3:
        lists.append((list(generic_fns[:-2]), generic_fns[-2], generic_fns[-1]))
    for head, f_s, f_n in lists:
        for x in samples:
            x = complex(x)
            m11 = casoratian(head + [f_s], x + 0.5j * g, g)
            m12 = casoratian(head + [f_n], x + 0.5j * g, g)
            m21 = casoratian(head + [f_s], x - 0.5j * g, g)
            m22 = casoratian(head + [f_n], x - 0.5j * g, g)
            lhs = m11 * m22 - m12 * m21
            rhs = -1j * casoratian(head, x, g) * casoratian(head + [f_s, f_n], x, g)
            worst = max(worst, _norm(lhs, rhs))
    return worst


def _default_generic_fns():
    mk = lambda fn, lbl: AnalyticFn(fn, label=lbl)
    return [mk(lambda x: 1.0 + 0j, "1"), mk(lambda x: x, "x"),
            mk(lambda x: x * x, "x^2"), mk(lambda x: cmath.exp(1j * x), "e^{ix}")]


def _res_downshift(levels, samples, ns=None):
    worst = 0.0
    for level in levels[1:]:
        for n in _level_ns(level, ns):
            rebuilt = downshift(level, n)
            for x in samples:
                lhs = rebuilt(x)
                rhs = level.parent._phi_fn(n, complex(x))
                worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    return worst


def _res_iso_spectral(levels, samples, ns=None):
    worst = 0.0
    for level in levels:
        for n in _level_ns(level, ns, count=3):
            f = lambda x, nn=n, lvl=level: lvl._phi_fn(nn, x)
            e_n = level.family.energy(n)
            for x in samples:
                lhs = hamiltonian_apply(level, f, x)
                rhs = e_n * f(complex(x))
                worst = max(worst, abs(lhs - rhs) / ((1.0 + abs(e_n)) * (1.0 + abs(f(complex(x))))))
    return worst


def _res_realness(levels, samples, ns=None):
    """phi^[s]_n star-equals itself at strip points."""
    worst = 0.0
    for level in levels:
        for n in _level_ns(level, ns):
            for x in samples:
                x = complex(x)
                direct = level._phi_fn(n, x)
                starred = complex(level._phi_fn(n, x.conjugate())).conjugate()
                worst = max(worst, abs(direct - starred) / (1.0 + abs(direct)))
    return worst


# ---------------------------------------------------------------------------
# continuum-limit transfer
# ---------------------------------------------------------------------------

def casoratian_limit_transfer(oqm_family, c_values, n=2, x=0.4, a=1.0, gamma=1.0):
    """Depth-1 determinant formula with shift gamma/c against the
    derivative-determinant value, scaled by c/(sqrt(a) gamma).

    The potential 1 + i (gamma/c) w with w(x) = x + 0.3 i x^2 carries a
    genuine first-order tail, so the error decays like 1/c.
    """
    from .analytic import wronskian
    from .oqm import level0 as oqm_level0

    base = oqm_level0(oqm_family, nmax=max(3, n))
    f0, fn = base.phi(0), base.phi(n)
    target = wronskian([f0, fn], complex(x)) / f0(complex(x))
    rows = []
    for c in c_values:
        gc = gamma / c
        sq = lambda xx: cmath.sqrt(1.0 + 1j * gamma * (xx + 0.3j * xx * xx) / c)
        num = casoratian([f0, fn], complex(x), gc)
        den = casoratian([f0], complex(x) - 0.5j * gc, gc)
        pref = sq(complex(x) + 0.5j * gc)
        val = (c / (math.sqrt(a) * gamma)) * pref * num / den
        rows.append((float(c), abs(val - target)))
    return rows, abs(target)
