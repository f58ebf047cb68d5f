"""TOML scenario files: parsing, defaults and key-path validation."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import tomli

from .atom import AtomModel
from .effham import ModeGrid
from .kk import FrequencyGrid, TTermParams
from .lfc import CavityConfig
from .media import PermittivityModel, Resonance
from .units import UnitSystem, natural_units, si_units

DEFAULT_TOLERANCES: dict[str, float] = {
    "mie_slope_target": 1.0,
    "mie_slope_halfwidth": 0.3,
    "kk_linear": 1e-3,
    "kk_control_min": 0.9,
    "kk_nonlinear": 1e-2,
    "kk_nonlinear_atom": 2e-2,
    "helmholtz_residual": 1e-3,
    "helmholtz_slope_halfwidth": 0.3,
    "k_two_route": 1e-10,
    "absorption_exponent_1": 0.05,
    "absorption_exponent_2": 0.1,
    "absorption_exponent_3": 0.1,
    "hermiticity": 1e-12,
}


class ScenarioError(ValueError):
    def __init__(self, key_path: str, message: str):
        super().__init__(f"{key_path}: {message}" if key_path else message)
        self.key_path = key_path
        self.message = message


@dataclass(frozen=True, eq=False)
class Grids:
    chi2_omega: tuple[float, ...] = (0.3, 0.5, 0.7)
    chi2_omega_p: tuple[float, ...] = (0.4, 0.6)
    mie_eps: complex = 2.25 + 0.1j
    mie_z0: tuple[float, ...] = tuple(np.logspace(-4, -1.5, 11))
    kk_linear: FrequencyGrid = field(default_factory=lambda: FrequencyGrid.symmetric(50.0, 20001))
    kk_nonlinear: FrequencyGrid = field(default_factory=lambda: FrequencyGrid.symmetric(40.0, 4001))
    kk_points: tuple[tuple[float, float], ...] = ((0.7, 0.5), (1.0, 0.5), (0.8, 0.7))
    t_term: TTermParams = TTermParams(1.0, 1.0, 0.2, 1.5, 0.2)
    green_eps: tuple[complex, ...] = (1.0, 2.25 + 0.1j)
    green_probes: tuple[tuple[float, float, float], ...] = (
        (0.5, 0.2, 0.1), (1.0, 1.0, 0.0), (2.0, -1.0, 0.5), (0.0, 0.0, 3.0), (-2.5, 1.5, -1.0))
    k_pairs: tuple[tuple[float, float], ...] = ((0.4, 0.6), (0.3, 0.9))
    k_random_scenarios: int = 5
    modes: ModeGrid | None = None
    absorption_scales: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass(frozen=True, eq=False)
class Scenario:
    units: UnitSystem
    media: PermittivityModel
    atom: AtomModel
    atom_position: np.ndarray
    cavity: CavityConfig | None
    grids: Grids
    tolerances: dict[str, float]
    sha256: str = ""


def _get(table: dict, key: str, path: str, default: Any = ...):
    if key in table:
        return table[key]
    if default is ...:
        raise ScenarioError(f"{path}.{key}" if path else key, "required key missing")
    return default


def _float(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(path, f"expected a number, got {v!r}")
    return float(v)


def _complex(v, path: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2:
        return complex(_float(v[0], path + "[0]"), _float(v[1], path + "[1]"))
    raise ScenarioError(path, "expected a number or [re, im]")


def _floats(v, path: str) -> tuple[float, ...]:
    if not isinstance(v, list):
        raise ScenarioError(path, "expected an array")
    return tuple(_float(x, f"{path}[{k}]") for k, x in enumerate(v))


def _matrix(v, n: int, path: str) -> np.ndarray:
    if not isinstance(v, list) or len(v) != n:
        raise ScenarioError(path, f"expected {n} rows")
    rows = [_floats(r, f"{path}[{k}]") for k, r in enumerate(v)]
    if any(len(r) != n for r in rows):
        raise ScenarioError(path, f"expected an {n}x{n} matrix")
    return np.array(rows)


def _units(doc: dict) -> UnitSystem:
    name = doc.get("units", "natural")
    if name == "natural":
        return natural_units()
    if name == "si":
        return si_units()
    raise ScenarioError("units", f"unknown unit system {name!r}; use 'natural' or 'si'")


_RESONANCE_KEYS = {"wp": "plasma_freq", "wr": "resonance_freq", "gamma": "damping"}


def _media(doc: dict) -> PermittivityModel:
    table = doc.get("media", {})
    res = []
    for k, r in enumerate(table.get("resonances", [])):
        path = f"media.resonances[{k}]"
        vals = {}
        for key in _RESONANCE_KEYS:
            vals[key] = _float(_get(r, key, path), f"{path}.{key}")
        if vals["wp"] < 0:
            raise ScenarioError(f"{path}.wp", "plasma frequency must be >= 0")
        if vals["wr"] <= 0:
            raise ScenarioError(f"{path}.wr", "resonance frequency must be > 0")
        if vals["gamma"] <= 0:
            raise ScenarioError(f"{path}.gamma", "damping must be > 0")
        res.append(Resonance(vals["wp"], vals["wr"], vals["gamma"]))
    return PermittivityModel(tuple(res))


def _atom(doc: dict) -> tuple[AtomModel, np.ndarray]:
    t = _get(doc, "atom", "")
    n = _get(t, "levels", "atom")
    if not isinstance(n, int) or n < 2:
        raise ScenarioError("atom.levels", "need an integer >= 2")
    bare = _floats(_get(t, "bare_freqs", "atom"), "atom.bare_freqs")
    if len(bare) != n:
        raise ScenarioError("atom.bare_freqs", f"expected {n} entries")
    gamma = _matrix(_get(t, "gamma", "atom"), n, "atom.gamma")
    shift = _matrix(t.get("shift", [[0.0] * n for _ in range(n)]), n, "atom.shift")
    dip = _get(t, "dipole", "atom")
    d = np.zeros((n, n, 3), complex)
    if not isinstance(dip, list) or len(dip) != n:
        raise ScenarioError("atom.dipole", f"expected {n} rows")
    for i in range(n):
        if not isinstance(dip[i], list) or len(dip[i]) != n:
            raise ScenarioError(f"atom.dipole[{i}]", f"expected {n} entries")
        for j in range(n):
            v = _floats(dip[i][j], f"atom.dipole[{i}][{j}]")
            if len(v) != 6:
                raise ScenarioError(f"atom.dipole[{i}][{j}]", "expected [re_x, im_x, re_y, im_y, re_z, im_z]")
            d[i, j] = np.array(v[0::2]) + 1j * np.array(v[1::2])
    for i in range(n):
        for j in range(i, n):
            if not np.allclose(d[i, j], np.conj(d[j, i]), rtol=0, atol=1e-12):
                raise ScenarioError(f"atom.dipole[{i}][{j}]",
                                    f"dipole matrix not Hermitian: d[{i}][{j}] != conj(d[{j}][{i}])")
    pops = _floats(t.get("populations", [1.0] + [0.0] * (n - 1)), "atom.populations")
    pos = np.array(_floats(t.get("position", [0.0, 0.0, 0.0]), "atom.position"))
    try:
        atom = AtomModel(bare, d, gamma, shift, pops)
    except ValueError as e:
        raise ScenarioError("atom", str(e)) from e
    return atom, pos


def _cavity(doc: dict, media: PermittivityModel) -> CavityConfig | None:
    if "cavity" not in doc:
        return None
    t = doc["cavity"]
    radius = _float(_get(t, "radius", "cavity"), "cavity.radius")
    pos = np.array(_floats(t.get("position", [0.0, 0.0, 0.0]), "cavity.position"))
    try:
        return CavityConfig(radius, media, pos)
    except ValueError as e:
        raise ScenarioError("cavity.radius", str(e)) from e


def _pairs(v, path: str) -> tuple[tuple[float, float], ...]:
    if not isinstance(v, list):
        raise ScenarioError(path, "expected an array of pairs")
    out = []
    for k, p in enumerate(v):
        f = _floats(p, f"{path}[{k}]")
        if len(f) != 2:
            raise ScenarioError(f"{path}[{k}]", "expected [w, w']")
        out.append(f)
    return tuple(out)


def _grid(t: dict, key: str, default: FrequencyGrid) -> FrequencyGrid:
    if key not in t:
        return default
    g = t[key]
    path = f"grids.{key}"
    hw = _float(_get(g, "half_width", path), path + ".half_width")
    n = _get(g, "points", path)
    try:
        return FrequencyGrid.symmetric(hw, int(n))
    except ValueError as e:
        raise ScenarioError(path, str(e)) from e


def _grids(doc: dict) -> Grids:
    t = doc.get("grids", {})
    d = Grids()
    kw: dict[str, Any] = {}
    for key in ("chi2_omega", "chi2_omega_p", "mie_z0", "absorption_scales"):
        if key in t:
            kw[key] = _floats(t[key], f"grids.{key}")
    if "mie_eps" in t:
        kw["mie_eps"] = _complex(t["mie_eps"], "grids.mie_eps")
    if "green_eps" in t:
        kw["green_eps"] = tuple(_complex(v, f"grids.green_eps[{k}]") for k, v in enumerate(t["green_eps"]))
    if "green_probes" in t:
        probes = []
        for k, p in enumerate(t["green_probes"]):
            f = _floats(p, f"grids.green_probes[{k}]")
            if len(f) != 3:
                raise ScenarioError(f"grids.green_probes[{k}]", "expected a 3-vector")
            probes.append(f)
        kw["green_probes"] = tuple(probes)
    for key in ("kk_points", "k_pairs"):
        if key in t:
            kw[key] = _pairs(t[key], f"grids.{key}")
    kw["kk_linear"] = _grid(t, "kk_linear", d.kk_linear)
    kw["kk_nonlinear"] = _grid(t, "kk_nonlinear", d.kk_nonlinear)
    if "t_term" in t:
        tt = t["t_term"]
        path = "grids.t_term"
        try:
            kw["t_term"] = TTermParams(
                _complex(tt.get("amplitude", 1.0), path + ".amplitude"),
                *(_float(_get(tt, k, path), f"{path}.{k}") for k in ("w_ab", "g_ab", "w_ad", "g_ad")))
        except ValueError as e:
            raise ScenarioError(path, str(e)) from e
    if "k_random_scenarios" in t:
        kw["k_random_scenarios"] = int(t["k_random_scenarios"])
    if "modes" in t:
        m = t["modes"]
        path = "grids.modes"
        try:
            kw["modes"] = ModeGrid(
                np.array([_floats(p, f"{path}.positions[{k}]") for k, p in enumerate(_get(m, "positions", path))]),
                np.array(_floats(_get(m, "frequencies", path), path + ".frequencies")),
                tuple(int(x) for x in m.get("polarizations", [0, 1, 2])),
            )
        except ValueError as e:
            if isinstance(e, ScenarioError):
                raise
            raise ScenarioError(path, str(e)) from e
    return Grids(**{**d.__dict__, **kw})


def _tolerances(doc: dict) -> dict[str, float]:
    tol = dict(DEFAULT_TOLERANCES)
    for k, v in doc.get("tolerances", {}).items():
        if k not in tol:
            raise ScenarioError(f"tolerances.{k}", "unknown tolerance name")
        tol[k] = _float(v, f"tolerances.{k}")
    return tol


def scenario_from_dict(doc: dict, sha256: str = "") -> Scenario:
    units = _units(doc)
    media = _media(doc)
    atom, pos = _atom(doc)
    return Scenario(units, media, atom, pos, _cavity(doc, media), _grids(doc), _tolerances(doc), sha256)


def parse_scenario(path: str | Path) -> Scenario:
    raw = Path(path).read_bytes()
    try:
        doc = tomli.loads(raw.decode("utf-8"))
    except tomli.TOMLDecodeError as e:
        raise ScenarioError("", f"parse error: {e}") from e
    return scenario_from_dict(doc, hashlib.sha256(raw).hexdigest())
