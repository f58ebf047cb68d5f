"""Command line entry point: ``nlham <subcommand> --scenario FILE --out DIR``.

Each subcommand writes ``<name>.csv`` and ``<name>.meta.json`` into the output
directory.  The exit status is 0 when every check passes, 1 when a check
fails and 2 when the run aborts on an error (an ``error.json`` record is
written and echoed to stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import effham, kk, lfc, terms
from .atom import chi2, chi2_component, random_atom
from .errors import DomainError
from .fitting import loglog_slope
from .green import helmholtz_residual
from .media import PermittivityModel, susceptibility
from .scenario import Scenario, ScenarioError, parse_scenario

FLOAT_FMT = "{:.16e}"


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    return str(v)


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError("row length does not match the header")
        self.rows.append(list(row))

    def text(self) -> str:
        lines = [",".join(self.columns)] + [",".join(fmt(v) for v in r) for r in self.rows]
        return "\n".join(lines) + "\n"


@dataclass
class Result:
    table: Table
    checks: dict[str, dict] = field(default_factory=dict)
    extra_files: dict[str, str] = field(default_factory=dict)

    def check(self, name: str, value: float, ok: bool, **limits):
        self.checks[name] = {"value": float(value), "pass": bool(ok), **{k: float(v) for k, v in limits.items()}}

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks.values())


def _lossy_host(sc: Scenario) -> PermittivityModel:
    # K and noise channels vanish without absorption; fall back to a fixed lossy host
    return sc.media if not sc.media.is_vacuum else PermittivityModel.single(1.0, 2.0, 0.3)


def cmd_chi2(sc: Scenario, rng) -> Result:
    t = Table(["omega", "omega_p", "alpha", "beta", "gamma", "re_chi2", "im_chi2", "re_chi2_lfc", "im_chi2_lfc"])
    res = Result(t)
    finite = True
    for w in sc.grids.chi2_omega:
        for wp in sc.grids.chi2_omega_p:
            c = chi2(sc.atom, w, wp, sc.units)
            f = lfc.lfc_factor(sc.media, w, wp) * c
            finite &= bool(np.all(np.isfinite(c)) and np.all(np.isfinite(f)))
            for idx in np.ndindex(3, 3, 3):
                t.add(w, wp, *idx, c[idx].real, c[idx].imag, f[idx].real, f[idx].imag)
    res.check("finite", float(finite), finite)
    return res


def cmd_mie(sc: Scenario, rng) -> Result:
    eps = sc.grids.mie_eps
    t = Table(["z0", "ReC_exact", "ImC_exact", "ReC_series", "ImC_series", "rel_err",
               "ReD_exact", "ImD_exact", "ReD_series", "ImD_series", "d_rel_err"])
    res = Result(t)
    z = np.array(sc.grids.mie_z0)
    ec, ed = [], []
    dt = lfc.dtilde(eps)
    for z0 in z:
        c_ex = lfc.mie_C_exact(eps, z0)
        c_se = lfc.mie_C_expansion(eps, z0)
        d_ex = lfc.mie_D_exact(eps, z0)
        ec.append(abs(c_ex - c_se) / abs(c_ex))
        ed.append(abs(d_ex - dt) / abs(d_ex))
        t.add(z0, c_ex.real, c_ex.imag, c_se.real, c_se.imag, ec[-1], d_ex.real, d_ex.imag, dt.real, dt.imag, ed[-1])
    target = sc.tolerances["mie_slope_target"]
    hw = sc.tolerances["mie_slope_halfwidth"]
    for name, err in (("slope_C", ec), ("slope_D", ed)):
        s = loglog_slope(z, err)
        res.check(name, s, abs(s - target) <= hw, target=target, halfwidth=hw)
    return res


def cmd_kk_lin(sc: Scenario, rng) -> Result:
    g = sc.grids.kk_linear
    host = _lossy_host(sc)
    t = Table(["case", "residual"])
    res = Result(t)
    r = kk.linear_kk_residual(lambda w: susceptibility(host, w), g)
    t.add("drude_lorentz", r)
    res.check("drude_lorentz", r, r <= sc.tolerances["kk_linear"], tol=sc.tolerances["kk_linear"])
    rc = kk.linear_kk_residual(lambda w: np.full_like(w, 1.0), g, check_decay=False)
    t.add("constant_control", rc)
    res.check("constant_control", rc, rc >= sc.tolerances["kk_control_min"], min=sc.tolerances["kk_control_min"])
    return res


def cmd_kk_nl(sc: Scenario, rng) -> Result:
    g = sc.grids.kk_nonlinear
    p = sc.grids.t_term
    t = Table(["source", "omega", "omega_p", "residual"])
    res = Result(t)
    tol = sc.tolerances["kk_nonlinear"]
    for w, wp in sc.grids.kk_points:
        r = kk.nonlinear_kk_residual(lambda a, b: kk.t_term(p, a, b), w, wp, g)
        t.add("t_term", w, wp, r)
        res.check(f"t_term_{w}_{wp}", r, r <= tol, tol=tol)
    w, wp = sc.grids.kk_points[0]
    c = chi2(sc.atom, w, wp, sc.units)
    idx = tuple(int(i) for i in np.unravel_index(np.abs(c).argmax(), c.shape))
    r = kk.nonlinear_kk_residual(lambda a, b: chi2_component(sc.atom, idx, a, b, sc.units), w, wp, g)
    t.add("atom_" + "".join("xyz"[i] for i in idx), w, wp, r)
    tol = sc.tolerances["kk_nonlinear_atom"]
    res.check("atom", r, r <= tol, tol=tol)
    return res


def cmd_green_check(sc: Scenario, rng) -> Result:
    t = Table(["re_eps", "im_eps", "probe_x", "probe_y", "probe_z", "h", "residual", "slope"])
    res = Result(t)
    tol = sc.tolerances["helmholtz_residual"]
    hw = sc.tolerances["helmholtz_slope_halfwidth"]
    w = 1.0
    for eps in sc.grids.green_eps:
        k = abs(lfc.refractive_index(eps)) * w / sc.units.c
        hs = np.array([4e-3, 2e-3, 1e-3]) / k
        for p in sc.grids.green_probes:
            r = [helmholtz_residual(w, eps, np.zeros(3), p, h, sc.units) for h in hs]
            s = loglog_slope(hs, r)
            t.add(eps.real, eps.imag, *p, hs[-1], r[-1], s)
            ok = r[-1] <= tol and abs(s - 2.0) <= hw
            res.check(f"eps_{eps.real}_{eps.imag}_probe_{p[0]}_{p[1]}_{p[2]}", r[-1], ok, tol=tol, slope=s)
    return res


def cmd_k_tensor(sc: Scenario, rng) -> Result:
    host = _lossy_host(sc)
    t = Table(["case", "omega", "omega_p", "norm_sum", "norm_factored", "rel_gap"])
    res = Result(t)
    tol = sc.tolerances["k_two_route"]
    cases = [("scenario", sc.atom, sc.atom_position)]
    for k in range(sc.grids.k_random_scenarios):
        cases.append((f"random_{k}", random_atom(rng), rng.normal(size=3)))
    for name, atom, rA in cases:
        pts = [rA + rng.normal(size=3) for _ in range(3)]
        for w, wp in sc.grids.k_pairs:
            a = effham.k_tensor_sum(atom, host, None, *pts, rA, w, wp, sc.units)
            b = effham.k_tensor_factored(atom, host, None, *pts, rA, w, wp, sc.units)
            na = float(np.linalg.norm(a))
            gap = float(np.linalg.norm(a - b) / na) if na > 0 else float(np.linalg.norm(b))
            t.add(name, w, wp, na, float(np.linalg.norm(b)), gap)
            res.check(f"{name}_{w}_{wp}", gap, gap <= tol, tol=tol)
    return res


def cmd_channels(sc: Scenario, rng) -> Result:
    host = _lossy_host(sc)
    w, wp = sc.grids.k_pairs[0]
    cw = effham.channel_decompose(sc.atom, host, w, wp, sc.units)
    rep = effham.vanishing_absorption_limit(sc.atom, host, w, wp, sc.grids.absorption_scales, sc.units)
    t = Table(["mask", "noise_legs", "magnitude", "exponent"])
    res = Result(t)
    for mask in effham.MASKS:
        n = mask.count("1")
        e = rep.exponents.get(mask, 0.0)
        t.add(mask, n, cw.magnitude(mask), e)
        if n:
            tol = sc.tolerances[f"absorption_exponent_{n}"]
            res.check(f"exponent_{mask}", e, abs(e - n / 2) <= tol, target=n / 2, tol=tol)
    res.check("zero_scale_noise", rep.zero_scale_noise_max, rep.zero_scale_noise_max == 0.0)
    res.check("channel000_limit", rep.channel000_gap, rep.channel000_gap <= 1e-12, tol=1e-12)
    if sc.grids.modes is not None:
        K = effham.coupling_tensor_from_atom(sc.grids.modes, sc.atom, host, sc.atom_position, sc.units)
        H = effham.hamiltonian_matrix(K, 2, sc.units)
        nh = float(abs(H).max()) or 1.0
        herm = float(abs(H - H.conj().T).max()) / nh
        tol = sc.tolerances["hermiticity"]
        res.check("hermiticity", herm, herm <= tol, tol=tol)
    return res


def cmd_rwa_derive(sc: Scenario, rng) -> Result:
    derived = terms.derive_k_structure()
    text = terms.render(derived)
    t = Table(["summand", "sign", "rho", "lambda", "mu", "nu", "den_1", "den_2"])
    res = Result(t, extra_files={"rwa_derive.txt": text})
    for k, s in enumerate(derived):
        t.add(k, s.sign, s.rho, *("".join(p) for p in s.pairs), *("".join(d[1]) for d in s.denominators))
    same = derived == terms.k_structure()
    res.check("matches_K", float(same), same)
    res.check("term_count", float(len(derived)), len(derived) == 4)
    return res


COMMANDS: dict[str, Callable[[Scenario, np.random.Generator], Result]] = {
    "chi2": cmd_chi2,
    "mie": cmd_mie,
    "kk-lin": cmd_kk_lin,
    "kk-nl": cmd_kk_nl,
    "green-check": cmd_green_check,
    "k-tensor": cmd_k_tensor,
    "channels": cmd_channels,
    "rwa-derive": cmd_rwa_derive,
}


def _write(out: Path, name: str, res: Result, sc: Scenario, seed: int):
    stem = name.replace("-", "_")
    (out / f"{stem}.csv").write_bytes(res.table.text().encode("utf-8"))
    for fname, text in res.extra_files.items():
        (out / fname).write_bytes(text.encode("utf-8"))
    meta = {
        "subcommand": name,
        "scenario_sha256": sc.sha256,
        "seed": seed,
        "tolerances": sc.tolerances,
        "checks": res.checks,
        "pass": res.passed,
    }
    (out / f"{stem}.meta.json").write_bytes((json.dumps(meta, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def _parse_tol(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ScenarioError(f"tolerances.{item}", "expected name=value")
        try:
            out[name] = float(value)
        except ValueError:
            raise ScenarioError(f"tolerances.{name}", f"not a number: {value!r}") from None
    return out


def run(subcommand: str, sc: Scenario, out: Path, seed: int = 42) -> int:
    out.mkdir(parents=True, exist_ok=True)
    names = list(COMMANDS) if subcommand == "all" else [subcommand]
    ok = True
    for name in names:
        res = COMMANDS[name](sc, np.random.default_rng(seed))
        _write(out, name, res, sc, seed)
        ok &= res.passed
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlham", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=[*COMMANDS, "all"])
    p.add_argument("--scenario", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    return p


def _error(out: Path | None, exc: Exception) -> int:
    record = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ScenarioError):
        record["key_path"] = exc.key_path
    text = json.dumps(record, sort_keys=True)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(text + "\n", encoding="utf-8")
        except OSError:
            pass
    print(text, file=sys.stderr)
    return 2


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = parse_scenario(args.scenario)
        overrides = _parse_tol(args.tol)
        for k in overrides:
            if k not in sc.tolerances:
                raise ScenarioError(f"tolerances.{k}", "unknown tolerance name")
        sc.tolerances.update(overrides)
        return run(args.subcommand, sc, args.out, args.seed)
    except (ScenarioError, DomainError, OSError, ValueError) as exc:
        return _error(args.out, exc)


if __name__ == "__main__":
    sys.exit(main())
