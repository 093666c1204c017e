import math

import numpy as np
import pytest

from crum.analytic import AnalyticFn, inner_product
from crum.errors import ChainBreakError, DomainError, StripError
from crum import dqm
from crum.verify import gram_matrix


def _pts(fam, count=10, im=0.0):
    lo, hi = fam.interior()
    return [complex(t, im) for t in np.linspace(lo, hi, count)]


def _strip_pts(fam, count=10):
    g = fam.gamma
    base = _pts(fam, count)
    return base[:4] + [p + 0.4j * g for p in base[4:7]] + [p - 0.4j * g for p in base[7:]]


# -- operators -------------------------------------------------------------------

@pytest.mark.parametrize("name", ["q_hermite", "askey_wilson"])
def test_apply_A_annihilates_ground_state(name, request):
    fam = request.getfixturevalue(name)
    level = dqm.level0(fam)
    low = dqm.apply_A(level, fam.phi0().fn)
    for x in _strip_pts(fam):
        assert abs(low(x)) <= 1e-10 * (1 + abs(fam.phi0().fn(x)))


def test_apply_A_linearity(q_hermite):
    level = dqm.level0(q_hermite)
    f = q_hermite.phi(2).fn
    a1 = dqm.apply_A(level, lambda x: 2.5 * f(x))
    a2 = dqm.apply_A(level, f)
    for x in _pts(q_hermite, 5):
        assert abs(a1(x) - 2.5 * a2(x)) < 1e-13 * (1 + abs(a2(x)))


def test_ladder_consistency(q_hermite):
    # raising after lowering rebuilds E_n times the state
    level = dqm.level0(q_hermite)
    for n in (1, 2, 4):
        f = q_hermite.phi(n).fn
        lifted = dqm.apply_Adag(level, dqm.apply_A(level, f))
        e_n = q_hermite.energy(n)
        for x in _pts(q_hermite, 6):
            assert abs(lifted(x) - e_n * f(x)) <= 1e-8 * (1 + abs(e_n * f(x)))


def test_adjointness_under_quadrature(q_hermite):
    level = dqm.level0(q_hermite)
    f, g = q_hermite.phi(1), q_hermite.phi(2)
    af = AnalyticFn(dqm.apply_A(level, f.fn), strip_halfwidth=f.strip_halfwidth)
    adg = AnalyticFn(dqm.apply_Adag(level, g.fn), strip_halfwidth=g.strip_halfwidth)
    lhs = inner_product(af, g, q_hermite.quad)
    rhs = inner_product(f, adg, q_hermite.quad)
    assert abs(lhs - rhs.conjugate() * 0 - rhs) < 1e-9 * (1 + abs(lhs))


def test_hamiltonian_zero_on_ground_state(askey_wilson):
    level = dqm.level0(askey_wilson)
    phi0 = askey_wilson.phi0().fn
    for x in _pts(askey_wilson, 8):
        assert abs(dqm.hamiltonian_apply(level, phi0, x)) <= 1e-10 * (1 + abs(phi0(x)))


def test_hamiltonian_first_excited_q_hermite(q_hermite):
    level = dqm.level0(q_hermite)
    f = q_hermite.phi(1).fn
    for x in _pts(q_hermite, 10):
        lhs = dqm.hamiltonian_apply(level, f, x)
        assert abs(lhs - 1.0 * f(x)) <= 1e-10 * (1 + abs(f(x)))   # E_1 = 1/q - 1 = 1


def test_hamiltonian_matches_factor_product(q_hermite):
    level = dqm.level0(q_hermite)
    f = q_hermite.phi(3).fn
    lifted = dqm.apply_Adag(level, dqm.apply_A(level, f))
    for x in _pts(q_hermite, 10):
        assert abs(dqm.hamiltonian_apply(level, f, x) - (lifted(x) + level.E_s * f(x))) \
            <= 1e-10 * (1 + abs(f(x)))


# -- next potential / chain --------------------------------------------------------

def test_quadratic_relation(q_hermite_chain, q_hermite):
    res = dqm.relation_residual("quadratic", q_hermite_chain, _strip_pts(q_hermite, 20))
    assert res <= 1e-9


def test_linear_relation(q_hermite_chain, q_hermite):
    res = dqm.relation_residual("linear", q_hermite_chain, _strip_pts(q_hermite, 20))
    assert res <= 1e-8


def test_aw_shape_invariant_next_potential(askey_wilson, askey_wilson_chain):
    # level-1 potential equals (1/q) times the base potential at shifted
    # parameters, pointwise
    from crum import make_family
    shifted = make_family("askey_wilson", validate=False,
                          **askey_wilson.shape.si(askey_wilson.params))
    v1 = askey_wilson_chain[1].v
    v_sh = shifted.v()
    kappa = 1.0 / askey_wilson.q
    for x in _strip_pts(askey_wilson, 12):
        lhs = v1(x)
        rhs = kappa * v_sh.fn(x)
        assert abs(lhs - rhs) <= 1e-8 * (1 + abs(rhs))


@pytest.mark.parametrize("name,tol", [("q_hermite", 1e-8), ("askey_wilson", 1e-8)])
def test_iso_spectrality_level1(name, tol, request):
    fam = request.getfixturevalue(name)
    levels = request.getfixturevalue(name + "_chain")
    lvl1 = levels[1]
    for n in range(1, 5):
        f = lambda x, nn=n: lvl1._phi_fn(nn, x)
        e_n = fam.energy(n)
        for x in _pts(fam, 6):
            lhs = dqm.hamiltonian_apply(lvl1, f, x)
            assert abs(lhs - e_n * f(x)) <= tol * (1 + abs(e_n)) * (1 + abs(f(x)))


@pytest.mark.parametrize("name", ["q_hermite", "askey_wilson"])
def test_level1_gram_diagonal(name, request):
    fam = request.getfixturevalue(name)
    levels = request.getfixturevalue(name + "_chain")
    fns = [levels[1].phi(n) for n in range(1, 5)]
    g = gram_matrix(fns, fam.quad)
    for i, n in enumerate(range(1, 5)):
        expected = fam.energy(n) * fam.hnorm(n)
        assert abs(g[i, i].real - expected) <= 1e-7 * expected
        for j in range(len(fns)):
            if j != i:
                assert abs(g[i, j]) <= 1e-7 * math.sqrt(abs(g[i, i].real) * abs(g[j, j].real))


def test_realness_of_chain_states(q_hermite_chain, q_hermite):
    res = dqm.relation_residual("realness", q_hermite_chain, _strip_pts(q_hermite))
    assert res <= 1e-10


def test_branch_anchor_positive(askey_wilson, askey_wilson_chain):
    # the radicand of the square-root prefactor is positive on Im x = gamma/2
    g = askey_wilson.gamma
    for level in askey_wilson_chain[1:]:
        par = level.parent
        for alpha in np.linspace(0.3, math.pi - 0.3, 20):
            x = complex(alpha, 0.5 * g)
            rad = par.sqrt_v(x - 0.5j * g) * par.sqrt_v_star(x - 0.5j * g)
            assert rad.real > 0
            assert abs(rad.imag) <= 1e-12 * rad.real


def test_chain_break_on_sign_changing_seed(q_hermite):
    level = dqm.level0(q_hermite)
    # pretend the next seed is the second excited state (which has nodes)
    fake_phi = lambda n, x: level._phi_fn(n + 1, x)
    fake = dqm.DqmChainLevel(q_hermite, 0, 0.0, level.sqrt_v, level.sqrt_v_star, fake_phi)
    with pytest.raises(ChainBreakError):
        dqm.step_chain(fake)


# -- determinant formulas -------------------------------------------------------------

def test_phi_via_casoratian_s0(q_hermite, q_hermite_chain):
    for x in _pts(q_hermite, 5):
        lhs = dqm.phi_via_casoratian(q_hermite_chain, 0, 3, x)
        rhs = q_hermite.phi(3).fn(x)
        assert abs(lhs - rhs) < 1e-13 * (1 + abs(rhs))


def test_phi_via_casoratian_depth1(q_hermite, q_hermite_chain):
    for x in _strip_pts(q_hermite, 10):
        lhs = dqm.phi_via_casoratian(q_hermite_chain, 1, 2, x)
        rhs = q_hermite_chain[1]._phi_fn(2, x)
        assert abs(lhs - rhs) <= 1e-8 * (1 + abs(rhs))


def test_phi_via_casoratian_depth2_aw(askey_wilson, askey_wilson_chain):
    for x in _pts(askey_wilson, 8):
        lhs = dqm.phi_via_casoratian(askey_wilson_chain, 2, 3, x)
        rhs = askey_wilson_chain[2]._phi_fn(3, x)
        assert abs(lhs - rhs) <= 1e-7 * (1 + abs(rhs))


def test_casoratian_jacobi_on_polynomials():
    from crum.analytic import casoratian, from_poly
    fs = [from_poly([1.0]), from_poly([0.0, 1.0]), from_poly([0.0, 0.0, 1.0]),
          from_poly([0.0, 0.0, 0.0, 1.0])]
    x, gam = 0.7 + 0j, 0.4
    m11 = casoratian(fs[:3], x + 0.5j * gam, gam)
    m12 = casoratian(fs[:2] + [fs[3]], x + 0.5j * gam, gam)
    m21 = casoratian(fs[:3], x - 0.5j * gam, gam)
    m22 = casoratian(fs[:2] + [fs[3]], x - 0.5j * gam, gam)
    lhs = m11 * m22 - m12 * m21
    rhs = -1j * casoratian(fs[:2], x, gam) * casoratian(fs, x, gam)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(rhs))


def test_casoratian_jacobi_residual(q_hermite_chain, q_hermite):
    res = dqm.relation_residual("casoratian_jacobi", q_hermite_chain, _pts(q_hermite, 6))
    assert res <= 1e-8


def test_step_determinant_residual(q_hermite_chain, q_hermite):
    res = dqm.relation_residual("step_determinant", q_hermite_chain[:2],
                                _strip_pts(q_hermite), ns=[2])
    assert res <= 1e-9


def test_check_product_aw(askey_wilson_chain, askey_wilson):
    res = dqm.relation_residual("check_product", askey_wilson_chain,
                                _pts(askey_wilson, 8), ns=[3], last_only=True)
    assert res <= 1e-7


# -- downshift -------------------------------------------------------------------------

def test_downshift_roundtrip_q_hermite(q_hermite_chain):
    rebuilt = dqm.downshift(q_hermite_chain[1], 2)
    target = q_hermite_chain[0]._phi_fn
    for x in _pts(q_hermite_chain[0].family, 10):
        assert abs(rebuilt(x) - target(2, x)) <= 1e-9 * (1 + abs(target(2, x)))


def test_downshift_roundtrip_aw_deep(askey_wilson_chain):
    rebuilt = dqm.downshift(askey_wilson_chain[2], 3)
    target = askey_wilson_chain[1]._phi_fn
    for x in _pts(askey_wilson_chain[0].family, 8):
        assert abs(rebuilt(x) - target(3, x)) <= 1e-7 * (1 + abs(target(3, x)))


def test_downshift_gap_is_energy_for_s1(q_hermite_chain, q_hermite):
    lvl1 = q_hermite_chain[1]
    up = dqm.apply_Adag(q_hermite_chain[0], lambda x: lvl1._phi_fn(2, x))
    rebuilt = dqm.downshift(lvl1, 2)
    x = 1.1 + 0j
    assert abs(rebuilt(x) * q_hermite.energy(2) - up(x)) < 1e-12 * (1 + abs(up(x)))


def test_downshift_index_error(q_hermite_chain):
    with pytest.raises(DomainError):
        dqm.downshift(q_hermite_chain[2], 1)
    with pytest.raises(DomainError):
        dqm.downshift(q_hermite_chain[0], 1)


# -- strips and limits ---------------------------------------------------------------

def test_strip_guard_on_family_functions(askey_wilson):
    f = askey_wilson.phi(1)
    with pytest.raises(StripError):
        f(complex(1.3, 5.0))


def test_casoratian_limit_transfer(hermite):
    rows, target = dqm.casoratian_limit_transfer(hermite, [10.0, 100.0, 1000.0])
    errs = [e for _, e in rows]
    assert errs[2] < errs[1] < errs[0]
    slope = -np.polyfit(np.log10([10.0, 100.0, 1000.0]), np.log10(errs), 1)[0]
    assert abs(slope - 1.0) < 0.25
