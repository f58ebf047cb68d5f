"""The twelve acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line; the lines are printed as each test runs
and again together in the terminal summary.  Run on its own with
``pytest tests/test_acceptance.py -v``.
"""

import itertools
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from nlham.atom import chi2, chi2_component, chi2_from_oracle, random_atom
from nlham.effham import (CouplingTensor, ModeGrid, hamiltonian_matrix, k_tensor_factored, k_tensor_sum,
                          vanishing_absorption_limit)
from nlham.fitting import loglog_slope
from nlham.green import helmholtz_residual
from nlham.kk import (FrequencyGrid, TTermParams, linear_kk_residual, nonlinear_kk_residual, t_term,
                      t_term_residue_identity)
from nlham.lfc import (ctilde, dtilde, mie_C_exact, mie_C_expansion, mie_D_exact, noise_lfc_factor,
                       onsager_factors, refractive_index)
from nlham.media import PermittivityModel, Resonance, susceptibility
from nlham.terms import derive_k_structure, k_structure, render

GOLDEN = __import__("pathlib").Path(__file__).parent / "golden" / "rwa_derive.txt"


class Outcome:
    def __init__(self):
        self.ok = True
        self.detail = ""


@contextmanager
def criterion(n: int, title: str, budget: float, capsys):
    out = Outcome()
    t0 = time.perf_counter()
    try:
        yield out
    except Exception as exc:
        out.ok = False
        if not (isinstance(exc, AssertionError) and out.detail):
            out.detail = f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        raise
    finally:
        dt = time.perf_counter() - t0
        in_time = dt < budget
        status = "PASS" if out.ok and in_time else "FAIL"
        line = f"[{status}] #{n:2d} {title}: {out.detail} ({dt:.2f} s, budget {budget:g} s)"
        ACCEPTANCE_LINES[n] = line
        with capsys.disabled():
            print("\n" + line)
    assert in_time, f"runtime {dt:.2f} s exceeds {budget} s"


def test_01_vacuum_degeneracy(capsys):
    with criterion(1, "vacuum degeneracy", 1.0, capsys) as o:
        worst = 0.0
        for z0 in (1e-3, 1e-2, 1e-1):
            worst = max(worst, abs(mie_C_exact(1.0, z0)), abs(mie_D_exact(1.0, z0) - 1))
        worst = max(worst, abs(ctilde(1.0)), abs(dtilde(1.0) - 1), abs(noise_lfc_factor(1.0)))
        o.ok = worst <= 1e-12
        o.detail = f"max deviation {worst:.2e} (tol 1e-12)"
        assert o.ok


def test_02_mie_expansion_order(capsys):
    with criterion(2, "Mie expansion order", 5.0, capsys) as o:
        z0 = np.logspace(-4, -1.5, 11)
        slopes = []
        for eps in (2.0, 2.25 + 0.1j, 3 + 0.2j):
            c = [abs(mie_C_exact(eps, z) - mie_C_expansion(eps, z)) / abs(mie_C_exact(eps, z)) for z in z0]
            d = [abs(mie_D_exact(eps, z) - dtilde(eps)) / abs(dtilde(eps)) for z in z0]
            slopes.append((loglog_slope(z0, c), loglog_slope(z0, d)))
        o.ok = all(abs(s - 1.0) <= 0.3 for pair in slopes for s in pair)
        o.detail = "slopes (C, D) " + ", ".join(f"({a:.2f}, {b:.2f})" for a, b in slopes) + " (target 1.0 +- 0.3)"
        assert o.ok, o.detail


def test_03_linear_kk(capsys):
    with criterion(3, "linear Kramers-Kronig", 10.0, capsys) as o:
        grid = FrequencyGrid.symmetric(50.0, 20001)
        m = PermittivityModel.single(1.0, 1.0, 0.1)
        r = linear_kk_residual(lambda w: susceptibility(m, w), grid)
        rc = linear_kk_residual(lambda w: np.full_like(w, 1.0), grid, check_decay=False)
        o.ok = r <= 1e-3 and rc >= 0.9
        o.detail = f"Drude-Lorentz {r:.2e} (tol 1e-3), constant control {rc:.3f} (min 0.9)"
        assert o.ok


def test_04_t_term_residue_identity(capsys):
    with criterion(4, "T-term residue identity", 1.0, capsys) as o:
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(100):
            p = TTermParams(complex(*rng.normal(size=2)), rng.uniform(-3, 3), rng.uniform(0.05, 1.0),
                            rng.uniform(-3, 3), rng.uniform(0.05, 1.0))
            w, wp = rng.uniform(-3, 3, 2)
            t = t_term(p, w, wp)
            worst = max(worst, abs(t_term_residue_identity(p, w, wp) - t) / abs(t))
        o.ok = worst <= 1e-12
        o.detail = f"max relative error {worst:.2e} over 100 draws (tol 1e-12)"
        assert o.ok


def test_05_nonlinear_kk(capsys):
    with criterion(5, "nonlinear Kramers-Kronig by quadrature", 300.0, capsys) as o:
        grid = FrequencyGrid.symmetric(40.0, 4001)
        p = TTermParams(1.0, 1.0, 0.2, 1.5, 0.2)
        rt = [nonlinear_kk_residual(lambda a, b: t_term(p, a, b), w, wp, grid)
              for w, wp in ((0.7, 0.5), (1.0, 0.5), (0.8, 0.7))]
        atom = random_atom(np.random.default_rng(42))
        c = chi2(atom, 0.7, 0.5)
        idx = tuple(int(i) for i in np.unravel_index(np.abs(c).argmax(), c.shape))
        ra = nonlinear_kk_residual(lambda a, b: chi2_component(atom, idx, a, b), 0.7, 0.5, grid)
        o.ok = max(rt) <= 1e-2 and ra <= 2e-2
        o.detail = f"T-term {', '.join(f'{r:.2e}' for r in rt)} (tol 1e-2), 3-level atom {ra:.2e} (tol 2e-2)"
        assert o.ok


def test_06_chi2_oracle_equivalence(capsys):
    with criterion(6, "chi2 time-domain oracle equivalence", 600.0, capsys) as o:
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(3):
            atom = random_atom(rng)
            for _ in range(5):
                w, wp = rng.uniform(-2, 2, 2)
                ref = chi2(atom, w, wp)
                err = np.linalg.norm(chi2_from_oracle(atom, w, wp) - ref) / np.linalg.norm(ref)
                worst = max(worst, err)
        o.ok = worst <= 1e-3
        o.detail = f"max relative Frobenius error {worst:.2e} over 15 cases (tol 1e-3)"
        assert o.ok


def test_07_two_route_k(capsys):
    with criterion(7, "two-route coupling tensor", 30.0, capsys) as o:
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(20):
            atom = random_atom(rng)
            host = PermittivityModel(tuple(Resonance(rng.uniform(0.2, 2), rng.uniform(0.3, 3), rng.uniform(0.05, 1))
                                           for _ in range(rng.integers(1, 3))))
            rA = rng.normal(size=3)
            pts = [rA + rng.normal(size=3) for _ in range(3)]
            w, wp = rng.uniform(0.1, 2.0, 2)
            a = k_tensor_sum(atom, host, None, *pts, rA, w, wp)
            b = k_tensor_factored(atom, host, None, *pts, rA, w, wp)
            worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(a))
        o.ok = worst <= 1e-10
        o.detail = f"max relative gap {worst:.2e} over 20 scenarios (tol 1e-10)"
        assert o.ok


def test_08_derivation_replay(capsys):
    with criterion(8, "derivation replay", 1.0, capsys) as o:
        s = derive_k_structure()
        golden = render(s).encode("utf-8") == GOLDEN.read_bytes()
        o.ok = len(s) == 4 and s == k_structure() and golden
        o.detail = f"{len(s)} terms, matches K: {s == k_structure()}, golden identical: {golden}"
        assert o.ok


def test_09_helmholtz(capsys):
    with criterion(9, "Helmholtz residual", 10.0, capsys) as o:
        probes = [(0.5, 0.2, 0.1), (1.0, 1.0, 0.0), (2.0, -1.0, 0.5), (0.0, 0.0, 3.0), (-2.5, 1.5, -1.0)]
        worst_r, slopes = 0.0, []
        for eps in (1.0, 2.25 + 0.1j):
            k = abs(refractive_index(eps))
            hs = np.array([4e-3, 2e-3, 1e-3]) / k
            for p in probes:
                r = [helmholtz_residual(1.0, eps, np.zeros(3), p, h) for h in hs]
                worst_r = max(worst_r, r[-1])
                slopes.append(loglog_slope(hs, r))
        o.ok = worst_r <= 1e-3 and all(abs(s - 2) <= 0.3 for s in slopes)
        o.detail = f"max residual {worst_r:.2e} (tol 1e-3), slopes {min(slopes):.3f}..{max(slopes):.3f} (2.0 +- 0.3)"
        assert o.ok


def test_10_vanishing_absorption(capsys):
    with criterion(10, "vanishing-absorption limit", 30.0, capsys) as o:
        atom = random_atom(np.random.default_rng(42))
        host = PermittivityModel.single(1.0, 2.0, 0.3)
        rep = vanishing_absorption_limit(atom, host, 0.4, 0.6, (1e-1, 1e-2, 1e-3, 1e-4))
        tol = {1: 0.05, 2: 0.1, 3: 0.1}
        by = rep.exponents_by_noise_legs()
        fits = all(abs(e - n / 2) <= tol[n] for n, es in by.items() for e in es)
        o.ok = fits and rep.zero_scale_noise_max == 0.0 and rep.channel000_gap <= 1e-12
        o.detail = ("exponents " + ", ".join(f"n={n}: {min(es):.4f}..{max(es):.4f}" for n, es in sorted(by.items()))
                    + f"; noise at t=0 {rep.zero_scale_noise_max:.1e}; channel 000 gap {rep.channel000_gap:.1e}")
        assert o.ok


def test_11_hermiticity(capsys):
    with criterion(11, "Hamiltonian Hermiticity", 5.0, capsys) as o:
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(20):
            w1, w2 = np.sort(rng.uniform(0.2, 1.0, 2))
            grid = ModeGrid(rng.normal(size=(1, 3)), np.array([w1, w2, w1 + w2]), (0,))
            entries = {t: complex(*rng.normal(size=2)) for t in itertools.product(range(3), repeat=3)
                       if grid.energy_conserving(*t)}
            H = hamiltonian_matrix(CouplingTensor(grid, entries), int(rng.integers(2, 5)))
            worst = max(worst, abs(H - H.conj().T).max() / abs(H).max())
        o.ok = worst <= 1e-12
        o.detail = f"max |H - H^dag| / |H| {worst:.1e} over 20 grids (tol 1e-12)"
        assert o.ok


def test_12_onsager(capsys):
    with criterion(12, "Onsager equivalence", 1.0, capsys) as o:
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(100):
            eps = complex(rng.uniform(1, 10), rng.uniform(0, 5))
            e_f, p_f = onsager_factors(eps)
            worst = max(worst, abs(e_f - dtilde(eps)), abs(p_f - ctilde(eps)))
        o.ok = worst <= 1e-14
        o.detail = f"max deviation {worst:.1e} over 100 draws (tol 1e-14)"
        assert o.ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
