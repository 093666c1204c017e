import cmath
import math

import numpy as np
import pytest

from crum import family_eval, make_family, virtual_state
from crum.errors import DomainError, ParameterError
from crum.quadrature import refinement_sequence
from crum import dqm as dqm_mod
from crum import oqm as oqm_mod


# -- construction and constraints ---------------------------------------------

def test_hermite_prepotential_and_potential(hermite):
    u = hermite.potential()
    wp = hermite.w_prime()
    for x in (-1.5, 0.0, 2.0):
        assert abs(u(x) - (x * x - 1.0)) < 1e-12
        assert abs(wp(x) - (-x)) < 1e-13


def test_laguerre_constraint():
    with pytest.raises(ParameterError, match="g > 1"):
        make_family("laguerre", g=0.5)


def test_jacobi_constraint():
    with pytest.raises(ParameterError, match="g > 1"):
        make_family("jacobi", g=1.0)


def test_askey_wilson_zero_parameters_potential():
    fam = make_family("askey_wilson", a1=0, a2=0, a3=0, a4=0, q=0.5)
    v = fam.v()
    for xr in (0.5, 1.3, 2.4):
        z2 = cmath.exp(2j * xr)
        expected = 1.0 / ((1 - z2) * (1 - 0.5 * z2))
        assert abs(v(xr) - expected) < 1e-13


def test_askey_wilson_modulus_constraint():
    with pytest.raises(ParameterError, match=r"\|a1\| < 1"):
        make_family("askey_wilson", a1=1.2, a2=0, a3=0, a4=0, q=0.5)


def test_askey_wilson_conjugation_closure_constraint():
    with pytest.raises(ParameterError, match="closed"):
        make_family("askey_wilson", a1=0.1 + 0.2j, a2=0.3, a3=-0.2, a4=0.15, q=0.5)


def test_q_range_constraint():
    with pytest.raises(ParameterError, match="0 < q < 1"):
        make_family("q_hermite", q=1.5)


def test_unknown_family():
    with pytest.raises(ParameterError):
        make_family("wilson")


# -- family_eval surface --------------------------------------------------------

def test_energy_examples(hermite, q_hermite, jacobi):
    assert family_eval(hermite, "energy", n=3) == 6.0
    assert abs(family_eval(q_hermite, "energy", n=1) - 1.0) < 1e-14
    assert abs(family_eval(jacobi, "eta", x=math.pi / 2)) < 1e-15


def test_phi_n_out_of_range(hermite):
    with pytest.raises(DomainError):
        hermite.phi(50)


def test_aw_potential_star_pair(askey_wilson):
    for xr in (0.6, 1.2, 2.2):
        v = family_eval(askey_wilson, "V", x=xr)
        vs = family_eval(askey_wilson, "Vstar", x=xr)
        assert abs((v + vs).imag) < 1e-13 * (1 + abs(v))


# -- self-consistency invariants ------------------------------------------------

@pytest.mark.parametrize("name", ["hermite", "laguerre", "jacobi", "q_hermite", "askey_wilson"])
def test_orthogonality(name, request):
    fam = request.getfixturevalue(name)
    ns = range(7)
    fns = [fam.phi(n) for n in ns]
    from crum.verify import gram_matrix
    g = gram_matrix(fns, fam.quad)
    h = np.real(np.diag(g))
    assert np.all(h > 0)
    for i in ns:
        for j in ns:
            if i != j:
                assert abs(g[i, j]) <= 1e-8 * math.sqrt(h[i] * h[j])


@pytest.mark.parametrize("name", ["hermite", "laguerre", "jacobi"])
def test_oqm_eigen_residual(name, request):
    fam = request.getfixturevalue(name)
    level = oqm_mod.level0(fam, nmax=6)
    lo, hi = fam.interior()
    for n in range(5):
        f = fam.phi(n)
        e = fam.energy(n)
        for x in np.linspace(lo, hi, 20):
            r = oqm_mod.hamiltonian_apply(level, f, complex(x)) - e * f(complex(x))
            assert abs(r) <= 1e-8 * max(1.0, abs(e)) * (1.0 + abs(f(complex(x))))


@pytest.mark.parametrize("name", ["q_hermite", "askey_wilson"])
def test_dqm_zero_mode_residual(name, request):
    fam = request.getfixturevalue(name)
    level = dqm_mod.level0(fam)
    low = dqm_mod.apply_A(level, fam.phi0().fn)
    for x in np.linspace(0.2, math.pi - 0.2, 20):
        assert abs(low(complex(x))) <= 1e-10 * (1 + abs(fam.phi0()(complex(x))))


@pytest.mark.parametrize("name", ["q_hermite", "askey_wilson"])
def test_dqm_realness(name, request):
    fam = request.getfixturevalue(name)
    eta = fam.eta()
    rng = np.random.default_rng(5)
    h = min(fam.strip_halfwidth, 1.0)
    for _ in range(10):
        x = complex(rng.uniform(0.4, 2.7), rng.uniform(-0.4, 0.4) * h)
        for n in (0, 1, 3):
            f = fam.phi(n)
            assert abs(f(x) - complex(f(x.conjugate())).conjugate()) < 1e-12 * (1 + abs(f(x)))
        assert abs(eta(x) - complex(eta(x.conjugate())).conjugate()) < 1e-14


def test_dqm_polynomial_degree(q_hermite):
    # P_n has degree exactly n: n-th divided structure via leading growth
    ys = np.linspace(-0.9, 0.9, 12)
    for n in range(5):
        vals = [q_hermite.poly_value(n, y) for y in ys]
        fit = np.polyfit(ys, np.real(vals), n)
        assert abs(fit[0]) > 1e-3         # monic-ish leading coefficient present
        if n >= 1:
            fit_lower = np.polyfit(ys, np.real(vals), n - 1)
            resid = np.max(np.abs(np.polyval(fit_lower, ys) - np.real(vals)))
            assert resid > 1e-6           # cannot be represented one degree lower


# -- virtual states --------------------------------------------------------------

def test_hermite_virtual_state(hermite):
    phi_prime = virtual_state(hermite)
    for x in (-1.0, 0.3, 1.5):
        assert abs(phi_prime(x) - math.exp(0.5 * x * x)) < 1e-12
    level = oqm_mod.level0(hermite, nmax=2)
    up = oqm_mod.apply_Adag(level, phi_prime)
    for x in (-1.2, 0.4, 2.0):
        assert abs(up(complex(x))) < 1e-12 * (1 + abs(phi_prime(x)))


def test_aw_virtual_state_annihilated(askey_wilson):
    phi_prime = virtual_state(askey_wilson)
    level = dqm_mod.level0(askey_wilson)
    up = dqm_mod.apply_Adag(level, phi_prime.fn)
    for x in np.linspace(0.3, math.pi - 0.3, 12):
        assert abs(up(complex(x))) <= 1e-8 * (1 + abs(phi_prime(complex(x))))


def test_aw_virtual_state_shape(askey_wilson):
    # prefactor sin x over the ground state at shifted parameters
    shifted = askey_wilson.shifted()
    assert abs(complex(shifted.params["a1"]) - 0.3 * math.sqrt(0.6)) < 1e-12
    phi_prime = virtual_state(askey_wilson)
    x = 1.1
    expect = math.sin(x) / shifted.phi0()(complex(x))
    assert abs(phi_prime(complex(x)) - expect) < 1e-12 * (1 + abs(expect))


def test_oqm_virtual_norm_diverges(hermite):
    phi_prime = virtual_state(hermite)
    _vals, diverging = refinement_sequence(
        lambda x: abs(phi_prime.fn(complex(x))) ** 2, hermite.quad)
    assert diverging


def test_dqm_virtual_norm_is_finite(q_hermite):
    # on the compact interval the excluded mode is bounded; exclusion from
    # the Hilbert space is spectral (it would sit at energy 0 < E_1), not
    # a norm divergence
    phi_prime = virtual_state(q_hermite)
    vals, diverging = refinement_sequence(
        lambda x: abs(phi_prime.fn(complex(x))) ** 2, q_hermite.quad)
    assert not diverging
    assert abs(vals[-1]) < 50.0


@pytest.mark.parametrize("name", ["hermite", "laguerre", "jacobi", "q_hermite", "askey_wilson"])
def test_double_star_at_strip_points(name, request):
    from crum.analytic import AnalyticFn, star_eval
    fam = request.getfixturevalue(name)
    rng = np.random.default_rng(17)
    lo, hi = fam.interior(0.8)
    h = 0.3 if fam.kind == "oqm" else 0.3 * min(fam.strip_halfwidth, 1.0)
    # build a genuinely complex function on the family's strip so the double
    # star is not trivially the identity
    f = fam.phi(2)
    g = AnalyticFn(lambda x: (1 + 0.7j) * f.fn(x) + 0.2j,
                   strip_halfwidth=f.strip_halfwidth)
    for _ in range(10):
        x = complex(rng.uniform(lo, hi), rng.uniform(-h, h))
        assert abs(star_eval(g.star(), x) - g.fn(x)) < 1e-12 * (1 + abs(g.fn(x)))


@pytest.mark.parametrize("name", ["hermite", "laguerre", "jacobi", "q_hermite", "askey_wilson"])
def test_real_flag_means_real_on_axis(name, request):
    fam = request.getfixturevalue(name)
    lo, hi = fam.interior(0.8)
    for n in (0, 2):
        f = fam.phi(n)
        assert f.is_real
        for x in np.linspace(lo, hi, 9):
            v = f.fn(complex(x))
            assert abs(v.imag) <= 1e-12 * (1 + abs(v))


def test_descriptor_round_trip(askey_wilson):
    import json
    d = askey_wilson.descriptor()
    loaded = json.loads(json.dumps(d))
    assert loaded["name"] == "askey_wilson"
    assert loaded["gamma"] == pytest.approx(math.log(0.6))
    fam2 = make_family(loaded["name"], **_params_from(loaded["params"]))
    assert fam2.energy(3) == pytest.approx(askey_wilson.energy(3))


def _params_from(plain):
    out = {}
    for k, v in plain.items():
        out[k] = complex(v[0], v[1]) if isinstance(v, list) else v
    return out
