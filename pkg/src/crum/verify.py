"""Independent oracles and the orchestration of all residual suites.

The suite builds a chain for one family, evaluates every applicable identity
per level at seeded low-discrepancy sample points, runs the spectral oracles,
and assembles a total report: every identity appears with a residual and a
verdict, or with an explicit skip reason.  Identical seeds give bit-identical
reports (wall time aside).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .analytic import inner_product, casoratian, wronskian
from .errors import AccuracyError, CrumError, StripError
from .families import make_family, virtual_state
from .quadrature import QuadratureSpec, refinement_sequence
from . import dqm as dqm_mod
from . import oqm as oqm_mod
from . import structure as structure_mod

GOLDEN = 0.6180339887498949

DEFAULT_TOLERANCES = {
    "zero_mode": 1e-9,
    "iso_spectral": 1e-8,
    "realness": 1e-9,
    "intertwine": 1e-9,
    "riccati": 1e-9,
    "factorization": 1e-9,
    "potential_wronskian": 1e-7,
    "wronskian_product": 1e-8,
    "wronskian_ratio": 1e-8,
    "downshift_roundtrip": 1e-8,
    "node_count": 0.0,
    "quadratic": 1e-9,
    "linear": 1e-8,
    "step_determinant": 1e-9,
    "check_product": 1e-7,
    "casoratian_ratio": 1e-7,
    "casoratian_jacobi": 1e-8,
    "gram": 1e-7,
    "oracle_spectrum": 1e-5,
    "virtual_zero_mode": 1e-8,
}

OQM_LEVEL_IDENTITIES = ("zero_mode", "iso_spectral", "realness", "node_count")
OQM_STEP_IDENTITIES = ("intertwine", "riccati", "factorization",
                       "potential_wronskian", "wronskian_product",
                       "wronskian_ratio", "downshift_roundtrip")
DQM_LEVEL_IDENTITIES = ("zero_mode", "iso_spectral", "realness")
DQM_STEP_IDENTITIES = ("quadratic", "linear", "intertwine", "factorization",
                       "step_determinant", "check_product", "casoratian_ratio",
                       "casoratian_jacobi", "downshift_roundtrip")


@dataclass
class RunConfig:
    """Everything a suite run depends on; JSON round-trips losslessly."""

    family: str = "hermite"
    params: dict = field(default_factory=dict)
    depth: int = 2
    nmax: int = 5
    samples: int = 20
    tolerances: dict = field(default_factory=dict)
    precision: str = "double"
    seed: int = 2021
    out: str = ""
    check_limits: bool = False

    def tolerance(self, name):
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @staticmethod
    def from_json(text):
        return RunConfig(**json.loads(text))


@dataclass
class VerificationReport:
    schema: str
    family: str
    params: dict
    gamma: object
    depth: int
    seed: int
    levels: list
    oracle: dict
    shape_invariance: dict
    eta_relations: dict
    virtual_state: dict
    status: str
    lu_growth: float
    wall_time_s: float

    def to_dict(self):
        return asdict(self)

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @property
    def passed(self):
        return self.status == "pass"


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def grid_eigensolve(u_fn, domain, n_points, k):
    """Lowest k eigenvalues of -d^2/dx^2 + U with Dirichlet walls.

    Three-point finite differences on n_points interior nodes, Richardson
    extrapolated against the doubled grid (the h^2 error term cancels).
    """
    if n_points < 200:
        raise ValueError("grid too coarse for the oracle (need n_points >= 200)")

    def eigs(npts):
        x = np.linspace(domain[0], domain[1], npts + 2)[1:-1]
        h = x[1] - x[0]
        diag = 2.0 / h**2 + np.asarray([u_fn(float(t)) for t in x])
        off = -np.ones(npts - 1) / h**2
        return eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, k - 1))

    coarse = eigs(n_points)
    fine = eigs(2 * n_points)
    return (4.0 * fine - coarse) / 3.0


def gram_matrix(fns, quad: QuadratureSpec):
    """Hermitian matrix of pairwise inner products."""
    m = len(fns)
    g = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(i, m):
            val = inner_product(fns[i], fns[j], quad)
            g[i, j] = val
            g[j, i] = val.conjugate()
    return g


def norm_divergence_flag(fn, quad: QuadratureSpec, levels=6):
    """Refine the squared-norm integral; report whether it settles or grows."""

    def integrand(x):
        v = fn.fn(complex(x))
        return (v.conjugate() * v).real

    values, diverging = refinement_sequence(integrand, quad, levels=levels)
    finite = [v for v in values if math.isfinite(abs(v))]
    return {
        "estimates": [float(abs(v)) for v in values[-3:]],
        "diverging": bool(diverging),
        "final": float(abs(finite[-1])) if finite else float("inf"),
    }


def sample_points(family, count, seed, lines=(0.0,)):
    """Low-discrepancy (golden-rotation) points on the central 90% of the
    domain, replicated on the requested horizontal lines."""
    lo, hi = family.interior(0.9)
    offset = (seed % 1000) / 1000.0
    base = [(lo + ((offset + GOLDEN * k) % 1.0) * (hi - lo)) for k in range(count)]
    pts = []
    for im in lines:
        pts.extend(complex(t, im) for t in base)
    return pts


# ---------------------------------------------------------------------------
# the suite
# ---------------------------------------------------------------------------

def run_suite(config: RunConfig):
    t0 = time.perf_counter()
    family = make_family(config.family, **config.params)
    if family.kind == "oqm":
        report = _suite_oqm(family, config)
    else:
        report = _suite_dqm(family, config)
    report.wall_time_s = time.perf_counter() - t0
    return report


def _entry(residual, tol, samples):
    ok = bool(residual <= tol)
    return {"residual": float(residual), "tol": float(tol), "pass": ok,
            "samples": int(samples)}, ok


def _skip(reason):
    return {"residual": None, "tol": None, "pass": None, "skipped": reason}, True


def _suite_oqm(family, config):
    levels = oqm_mod.build_chain(family, config.depth, nmax=config.nmax)
    pts = sample_points(family, config.samples, config.seed)
    all_ok = True
    level_blocks = []
    worst_growth = 1.0

    for s, level in enumerate(levels):
        identities = {}
        for kind in OQM_LEVEL_IDENTITIES:
            if kind == "node_count":
                mismatch = _node_mismatch(levels, s, config.nmax)
                entry, ok = _entry(mismatch, config.tolerance(kind), 1)
            elif kind == "realness":
                res = _oqm_realness(level, pts, config)
                entry, ok = _entry(res, config.tolerance(kind), len(pts))
            else:
                res = oqm_mod.relation_residual(kind, [level], pts)
                entry, ok = _entry(res, config.tolerance(kind), len(pts))
            identities[kind] = entry
            all_ok &= ok
        if s >= 1:
            pair = [levels[s - 1], levels[s]]
            prefix = levels[: s + 1]
            for kind in OQM_STEP_IDENTITIES:
                chain_arg = prefix if kind in ("potential_wronskian", "wronskian_product",
                                               "wronskian_ratio") else pair
                try:
                    res = oqm_mod.relation_residual(kind, chain_arg, pts)
                    entry, ok = _entry(res, config.tolerance(kind), len(pts))
                except CrumError as exc:
                    entry, ok = _skip(f"{type(exc).__name__}: {exc}")
                identities[kind] = entry
                all_ok &= ok
        gram_block, g_ok, growth = _gram_block(family, levels, s, config)
        worst_growth = max(worst_growth, growth)
        all_ok &= g_ok
        level_blocks.append({"s": s, "E_s": float(level.E_s),
                             "identities": identities, "gram": gram_block})

    oracle, o_ok = _oracle_oqm(family, levels, config)
    all_ok &= o_ok
    shape = _shape_block(family, levels, config)
    all_ok &= shape.get("pass", True)
    eta_rel = _eta_block(family, levels, config, pts)
    all_ok &= eta_rel.get("pass", True)
    virt = _virtual_block(family, levels, config, pts)
    all_ok &= virt["pass"]
    worst_growth = max(worst_growth, _wronskian_growth(family, levels, pts))

    return VerificationReport(
        schema="crum-report/1", family=family.name,
        params=family.descriptor()["params"], gamma=None, depth=config.depth,
        seed=config.seed, levels=level_blocks, oracle=oracle,
        shape_invariance=shape, eta_relations=eta_rel, virtual_state=virt,
        status="pass" if all_ok else "fail", lu_growth=float(worst_growth),
        wall_time_s=0.0)


def _wronskian_growth(family, levels, pts):
    """Largest LU element-growth factor seen in the deepest determinants."""
    s = len(levels) - 1
    if s < 1:
        return 1.0
    fs = [family.phi(k) for k in range(s)]
    worst = 1.0
    for x in pts[:5]:
        _val, growth = wronskian(fs, x, info=True)
        worst = max(worst, growth)
    return worst


def _suite_dqm(family, config):
    levels = dqm_mod.build_chain(family, config.depth)
    g = family.gamma
    lines = (0.0, 0.5 * g, -0.5 * g, g, -g)
    pts_lines = sample_points(family, max(4, config.samples // len(lines)), config.seed, lines)
    pts_axis = sample_points(family, config.samples, config.seed)
    all_ok = True
    level_blocks = []

    def run_identity(kind, chain_arg, level):
        # strip-line samples first; on a strip violation fall back to the
        # real axis, and only then record a skip with the reason
        for pts in (pts_lines, pts_axis):
            try:
                res = dqm_mod.relation_residual(kind, chain_arg, pts,
                                                ns=_ns_for(level, config),
                                                last_only=True)
                return _entry(res, config.tolerance(kind), len(pts))
            except StripError:
                continue
            except CrumError as exc:
                return _skip(f"{type(exc).__name__}: {exc}")
        return _skip("no strip-feasible sample points at this depth")

    for s, level in enumerate(levels):
        identities = {}
        for kind in DQM_LEVEL_IDENTITIES:
            entry, ok = run_identity(kind, [level], level)
            identities[kind] = entry
            all_ok &= ok
        if s >= 1:
            for kind in DQM_STEP_IDENTITIES:
                chain_arg = levels[: s + 1]
                if kind in ("quadratic", "linear", "intertwine", "factorization",
                            "step_determinant", "downshift_roundtrip"):
                    chain_arg = [levels[s - 1], levels[s]]
                entry, ok = run_identity(kind, chain_arg, level)
                identities[kind] = entry
                all_ok &= ok
        gram_block, g_ok, _growth = _gram_block(family, levels, s, config)
        all_ok &= g_ok
        level_blocks.append({"s": s, "E_s": float(level.E_s),
                             "identities": identities, "gram": gram_block})

    oracle, o_ok = _oracle_dqm(family, config)
    all_ok &= o_ok
    shape = _shape_block(family, levels, config)
    all_ok &= shape.get("pass", True)
    eta_rel = _eta_block(family, levels, config, pts_axis)
    all_ok &= eta_rel.get("pass", True)
    virt = _virtual_block(family, levels, config, pts_axis)
    all_ok &= virt["pass"]
    growth = _casoratian_growth(family, levels, pts_axis)

    return VerificationReport(
        schema="crum-report/1", family=family.name,
        params=family.descriptor()["params"], gamma=float(g), depth=config.depth,
        seed=config.seed, levels=level_blocks, oracle=oracle,
        shape_invariance=shape, eta_relations=eta_rel, virtual_state=virt,
        status="pass" if all_ok else "fail", lu_growth=float(growth), wall_time_s=0.0)


def _casoratian_growth(family, levels, pts):
    s = len(levels) - 1
    if s < 1:
        return 1.0
    fs = [family.phi(k) for k in range(s + 1)]
    worst = 1.0
    for x in pts[:5]:
        try:
            _val, growth = casoratian(fs, x, family.gamma, info=True)
        except StripError:
            continue
        worst = max(worst, growth)
    return worst


def _ns_for(level, config):
    lo = level.s + 1
    return [n for n in range(lo, min(config.nmax, lo + 2) + 1)]


def _node_mismatch(levels, s, nmax):
    level = levels[s]
    lo, hi = level.interior()
    worst = 0
    for n in range(s, min(nmax, s + 3) + 1):
        count = oqm_mod.node_count(level.phi(n), (lo, hi))
        worst = max(worst, abs(count - (n - s)))
    return worst


def _oqm_realness(level, pts, config):
    worst = 0.0
    for n in range(level.s, min(config.nmax, level.s + 2) + 1):
        f = level.phi(n)
        for x in pts:
            x = complex(x.real, 0.15)
            direct = f(x)
            starred = complex(f(x.conjugate())).conjugate()
            worst = max(worst, abs(direct - starred) / (1.0 + abs(direct)))
    return worst


def _gram_block(family, levels, s, config):
    nmax = min(config.nmax, s + 3)
    ns = list(range(s, nmax + 1))
    if len(ns) < 2:
        return {"skipped": "fewer than two levels in range"}, True, 1.0
    level = levels[s]
    if family.kind == "oqm":
        fns = [level.phi(n) for n in ns]
    else:
        fns = [level.phi(n) for n in ns]
    try:
        g = gram_matrix(fns, family.quad)
    except AccuracyError as exc:
        return {"skipped": f"quadrature: {exc}"}, True, 1.0
    herm_defect = float(np.max(np.abs(g - g.conj().T)))
    expected = np.asarray([family.hnorm(n) * _gap_product(family, s, n) for n in ns])
    diag = np.real(np.diag(g))
    off = g - np.diag(np.diag(g))
    scale = np.sqrt(np.outer(np.abs(diag), np.abs(diag)))
    off_rel = float(np.max(np.abs(off) / (1e-300 + scale)))
    diag_rel = float(np.max(np.abs(diag - expected) / np.abs(expected)))
    tol = config.tolerance("gram")
    ok = off_rel <= tol and diag_rel <= tol and herm_defect <= 1e-12 * (1 + float(np.max(np.abs(g))))
    return {
        "ns": ns,
        "diag": [float(d) for d in diag],
        "expected_diag": [float(e) for e in expected],
        "max_offdiag_rel": off_rel,
        "max_diag_rel_err": diag_rel,
        "hermiticity_defect": herm_defect,
        "tol": tol,
        "pass": bool(ok),
    }, bool(ok), 1.0


def _gap_product(family, s, n):
    """Norm scaling along the chain: product of (E_n - E_k) for k < s."""
    prod = 1.0
    for k in range(s):
        prod *= family.energy(n) - family.energy(k)
    return prod


def _oracle_oqm(family, levels, config):
    block = {}
    ok = True
    tol = config.tolerance("oracle_spectrum")
    from .families import _oracle_box

    for s in (0, 1):
        if s >= len(levels):
            break
        u = levels[s].potential()
        lo, hi = _oracle_box(family)
        grid = grid_eigensolve(lambda t: u(complex(t)).real, (lo + (0.02 if s else 0.0), hi), 2000, 3)
        shifted = [float(e + levels[s].E_s) for e in grid]
        expected = [family.energy(n) for n in range(s, s + 3)]
        errs = [abs(a - b) / (1.0 + abs(b)) for a, b in zip(shifted, expected)]
        this_ok = max(errs) <= tol
        parent_ground_absent = True
        if s == 1:
            parent_ground_absent = abs(shifted[0] - family.energy(0)) > 0.5 * abs(
                family.energy(1) - family.energy(0))
        block[f"level{s}"] = {
            "grid_spectrum": shifted, "closed_form": expected,
            "max_rel_err": float(max(errs)), "tol": tol,
            "parent_ground_absent": bool(parent_ground_absent),
            "pass": bool(this_ok and parent_ground_absent),
        }
        ok &= this_ok and parent_ground_absent
    return block, ok


def _oracle_dqm(family, config):
    """Least-squares eigenvalue extraction from the difference equation."""
    level = dqm_mod.level0(family)
    xs = sample_points(family, 10, config.seed)
    block = {"levels": {}}
    ok = True
    for n in range(0, min(config.nmax, 4) + 1):
        f = lambda x, nn=n: level._phi_fn(nn, x)
        num = 0j
        den = 0.0
        for x in xs:
            hval = dqm_mod.hamiltonian_apply(level, f, x)
            pv = f(complex(x))
            num += hval * pv.conjugate()
            den += abs(pv) ** 2
        e_fit = float((num / den).real)
        e_closed = family.energy(n)
        err = abs(e_fit - e_closed) / (1.0 + abs(e_closed))
        this_ok = err <= config.tolerance("oracle_spectrum")
        block["levels"][str(n)] = {"fit": e_fit, "closed_form": e_closed,
                                   "rel_err": float(err), "pass": bool(this_ok)}
        ok &= this_ok
    return block, ok


def _shape_block(family, levels, config):
    fit = structure_mod.shape_invariance_residual(family, levels)
    block = {
        "converged": fit.converged,
        "kappa": fit.kappa if math.isfinite(fit.kappa) else None,
        "fitted_params": {k: _jsonable(v) for k, v in fit.params.items()},
        "max_residual": fit.max_residual if math.isfinite(fit.max_residual) else None,
        "tol": 1e-7,
    }
    spec_ok = True
    rows = {}
    for n in range(0, 9):
        closed = family.energy(n)
        summed = structure_mod.si_spectrum(family, n)
        err = abs(summed - closed) / (1.0 + abs(closed))
        rows[str(n)] = float(err)
        spec_ok &= err <= 1e-10
    block["spectrum_rel_err"] = rows
    block["spectrum_pass"] = bool(spec_ok)
    block["pass"] = bool(fit.converged and fit.max_residual <= 1e-7 and spec_ok)
    return block


def _eta_block(family, levels, config, pts):
    if family.kind != "dqm":
        res = structure_mod.eta_relations_residual("eta_affine", family, levels, pts)
        ok = res <= 1e-8
        return {"eta_affine": float(res), "tol": 1e-7, "pass": bool(ok)}
    block = {}
    ok = True
    for kind in ("eta_affine", "V1_from_eta", "eta_level", "Vs_product"):
        try:
            res = structure_mod.eta_relations_residual(kind, family, levels, pts)
        except StripError as exc:
            block[kind] = f"skipped: {exc}"
            continue
        block[kind] = float(res)
        ok &= res <= 1e-7
    block["tol"] = 1e-7
    block["pass"] = bool(ok)
    return block


def _virtual_block(family, levels, config, pts):
    """The excluded zero mode: annihilated by the raising factor, flagged out
    of the Hilbert space by the norm-refinement scan."""
    phi_prime = virtual_state(family)
    if family.kind == "oqm":
        lvl0 = levels[0]
        up = oqm_mod.apply_Adag(lvl0, phi_prime)
        res = max(abs(up(x)) / (1.0 + abs(phi_prime(x))) for x in pts)
    else:
        lvl0 = levels[0]
        up = dqm_mod.apply_Adag(lvl0, phi_prime.fn)
        res = max(abs(up(x)) / (1.0 + abs(phi_prime.fn(complex(x)))) for x in pts)
    flag = norm_divergence_flag(phi_prime, family.quad)
    tol = config.tolerance("virtual_zero_mode")
    ok = res <= tol
    return {
        "annihilation_residual": float(res),
        "tol": tol,
        "norm_refinement": flag,
        "norm_divergence_flag": bool(flag["diverging"]),
        "pass": bool(ok),
    }


def _jsonable(v):
    if isinstance(v, complex):
        return v.real if v.imag == 0 else [v.real, v.imag]
    return v
