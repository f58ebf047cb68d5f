"""Nonlinear coupling tensor, channel structure and finite Hamiltonian matrices.

Legs are ordered (w, w', w'') throughout; the first two are created photons
and carry complex conjugates, the third is annihilated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .atom import AtomModel, chi2, coupling_g
from .errors import DomainError
from .fitting import loglog_slope
from .green import green_homogeneous
from .lfc import chi2_lfc, dtilde, noise_lfc_factor
from .media import PermittivityModel, noise_amplitude, permittivity
from .units import UnitSystem, natural_units

GreenFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]
MAX_DIMENSION = 10_000


@dataclass(frozen=True)
class BulkGreen:
    """G(r_field, r_source, w) of the homogeneous host."""

    host: PermittivityModel
    u: UnitSystem = field(default_factory=natural_units)

    def __call__(self, r_field, r_source, omega: float) -> np.ndarray:
        return green_homogeneous(r_field, r_source, omega, permittivity(self.host, omega), self.u).tensor


def _legs(omega: float, omega_p: float) -> tuple[float, float, float]:
    if not (omega > 0 and omega_p > 0):
        raise DomainError("leg frequencies must be positive")
    return omega, omega_p, omega + omega_p


def _leg_data(host, green, r_A, points, omega, omega_p):
    freqs = _legs(omega, omega_p)
    r_A = np.asarray(r_A, float)
    for pt in points:
        if np.allclose(np.asarray(pt, float), r_A):
            raise DomainError("mode positions must differ from the atom position")
    greens = [np.asarray(green(r_A, np.asarray(pt, float), w)) for pt, w in zip(points, freqs)]
    eps_im = [permittivity(host, w).imag for w in freqs]
    return freqs, greens, eps_im


def k_tensor_sum(atom: AtomModel, host: PermittivityModel, green: GreenFn | None, s, s_p, r, r_A,
                 omega: float, omega_p: float, u: UnitSystem | None = None) -> np.ndarray:
    """K[lambda, mu, nu] as the four-term sum over levels of g* g* g / denominators."""
    u = u or natural_units()
    green = green or BulkGreen(host, u)
    if atom.min_width <= 0:
        raise DomainError("all widths must be > 0")
    freqs, greens, eps_im = _leg_data(host, green, r_A, (s, s_p, r), omega, omega_p)
    n = atom.n_levels
    g = []
    for G, e, w in zip(greens, eps_im, freqs):
        g.append(np.array([[coupling_g(atom, x, y, G, e, w, u) for y in range(n)] for x in range(n)]))
    g1, g2, g3 = np.conj(g[0]), np.conj(g[1]), g[2]
    W = atom.dressed_matrix()
    d1 = omega_p - W
    d2 = freqs[2] - W
    if np.abs(d1).min() < 1e-12 or np.abs(d2).min() < 1e-12:
        raise DomainError("near-singular denominator in K")
    i1, i2 = 1 / d1, 1 / d2
    rho = atom.populations
    t1 = np.einsum("i,kjl,ikm,ijn,ik,ij->lmn", rho, g1, g2, g3, i1, i2)
    t2 = np.einsum("i,ijl,kim,kjn,ki,kj->lmn", rho, g1, g2, g3, i1, i2)
    t3 = np.einsum("i,kil,ijm,kjn,ij,kj->lmn", rho, g1, g2, g3, i1, i2)
    t4 = np.einsum("i,jkl,kim,jin,ki,ji->lmn", rho, g1, g2, g3, i1, i2)
    return t1 - t2 - t3 + t4


def k_tensor_factored(atom: AtomModel, host: PermittivityModel, green: GreenFn | None, s, s_p, r, r_A,
                      omega: float, omega_p: float, u: UnitSystem | None = None) -> np.ndarray:
    """K from chi2 contracted with G* G* G and the scalar prefactors.

    ``chi2`` here is the causal tensor, which is minus the sum with a
    1/(i hbar)^2 prefactor; hence the leading -i/hbar.
    """
    u = u or natural_units()
    green = green or BulkGreen(host, u)
    freqs, greens, eps_im = _leg_data(host, green, r_A, (s, s_p, r), omega, omega_p)
    chi = chi2(atom, omega, omega_p, u)
    w1, w2, w3 = freqs
    pref = (-1j / u.hbar) * (u.hbar * u.eps0 / np.pi) ** 1.5 \
        * (w1 * w2 * w3) ** 2 / (u.c**6 * u.eps0**2) * np.sqrt(eps_im[0] * eps_im[1] * eps_im[2])
    G1, G2, G3 = np.conj(greens[0]), np.conj(greens[1]), greens[2]
    return pref * np.einsum("abc,al,bm,cn->lmn", chi, G1, G2, G3)


MASKS = tuple("".join(b) for b in itertools.product("01", repeat=3))


@dataclass(frozen=True, eq=False)
class ChannelWeights:
    """Eight channel tensors keyed by mask; bit k set means leg k is a noise leg."""

    weights: dict[str, np.ndarray]
    noise_amplitudes: tuple[float, float, float]

    def magnitude(self, mask: str) -> float:
        """Frobenius norm of the channel tensor times the noise amplitudes of its noise legs."""
        m = float(np.linalg.norm(self.weights[mask]))
        for bit, a in zip(mask, self.noise_amplitudes):
            if bit == "1":
                m *= a
        return m

    def magnitudes(self) -> dict[str, float]:
        return {k: self.magnitude(k) for k in MASKS}


def channel_decompose(atom: AtomModel, host: PermittivityModel, omega: float, omega_p: float,
                      u: UnitSystem | None = None) -> ChannelWeights:
    u = u or natural_units()
    freqs = _legs(omega, omega_p)
    base = u.eps0 * chi2_lfc(atom, host, omega, omega_p, u)
    lf = [noise_lfc_factor(permittivity(host, w), u) for w in freqs]
    lf = [np.conj(lf[0]), np.conj(lf[1]), lf[2]]
    weights = {}
    for mask in MASKS:
        f = 1.0 + 0j
        for bit, l in zip(mask, lf):
            if bit == "1":
                f *= l
        weights[mask] = f * base
    amps = tuple(noise_amplitude(host, w, u) for w in freqs)
    return ChannelWeights(weights, amps)


def heffE_contraction(chi: np.ndarray, e1, e2, e3, u: UnitSystem | None = None) -> complex:
    """eps0 chi[a, b, c] conj(E1_a) conj(E2_b) E3_c."""
    u = u or natural_units()
    return complex(u.eps0 * np.einsum("abc,a,b,c->", chi, np.conj(e1), np.conj(e2), e3))


@dataclass(frozen=True)
class AbsorptionReport:
    scales: tuple[float, ...]
    exponents: dict[str, float]
    zero_scale_noise_max: float
    channel000_gap: float

    def exponents_by_noise_legs(self) -> dict[int, list[float]]:
        out: dict[int, list[float]] = {}
        for mask, e in self.exponents.items():
            n = mask.count("1")
            if n:
                out.setdefault(n, []).append(e)
        return out


def vanishing_absorption_limit(atom: AtomModel, host: PermittivityModel, omega: float, omega_p: float,
                               scales: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
                               u: UnitSystem | None = None, probe_fields=None) -> AbsorptionReport:
    """Scale eps'' of the host by t and fit channel magnitudes against t.

    At t = 0 every noise channel must vanish and channel 000 must match the
    contraction of the embedded polarizability with three field legs.
    """
    u = u or natural_units()
    if any(not (0 < t <= 1) for t in scales):
        raise ValueError("absorption scales must lie in (0, 1]")
    mags = {m: [] for m in MASKS}
    for t in scales:
        cw = channel_decompose(atom, host.with_absorption_scale(t), omega, omega_p, u)
        for m, v in cw.magnitudes().items():
            mags[m].append(v)
    exps = {m: loglog_slope(scales, v) for m, v in mags.items() if m != "000"}
    host0 = host.with_absorption_scale(0.0)
    cw0 = channel_decompose(atom, host0, omega, omega_p, u)
    noise0 = max(cw0.magnitude(m) for m in MASKS if m != "000")
    if probe_fields is None:
        probe_fields = (np.array([1.0, 0.5j, -0.25]), np.array([0.3, -1.0, 0.2j]), np.array([0.1j, 0.7, 1.0]))
    e1, e2, e3 = probe_fields
    # reference built independently from the bare tensor and the D~ factors
    d = [dtilde(permittivity(host0, w)) for w in _legs(omega, omega_p)]
    chi_t = np.conj(d[0]) * np.conj(d[1]) * d[2] * chi2(atom, omega, omega_p, u)
    ref = heffE_contraction(chi_t, e1, e2, e3, u)
    got = complex(np.einsum("abc,a,b,c->", cw0.weights["000"], np.conj(e1), np.conj(e2), e3))
    gap = abs(got - ref) / max(abs(ref), np.finfo(float).tiny)
    return AbsorptionReport(tuple(scales), exps, noise0, gap)


@dataclass(frozen=True, eq=False)
class ModeGrid:
    """Modes are (position, frequency, polarization) triples, enumerated in that nesting order."""

    positions: np.ndarray
    frequencies: np.ndarray
    polarizations: tuple[int, ...] = (0, 1, 2)

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, float))
        f = np.asarray(self.frequencies, float)
        if pos.shape[1] != 3:
            raise ValueError("positions must be 3-vectors")
        if np.any(f <= 0) or np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be positive and strictly increasing")
        if not set(self.polarizations) <= {0, 1, 2} or not self.polarizations:
            raise ValueError("polarizations must be a non-empty subset of {0, 1, 2}")
        tol = 1e-12 * f.max()
        if not any(abs(c - a - b) <= tol for a in f for b in f for c in f):
            raise ValueError("no frequency on the grid is the sum of two others")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "frequencies", f)

    @property
    def modes(self) -> list[tuple[int, int, int]]:
        return [(p, k, l) for p in range(len(self.positions))
                for k in range(len(self.frequencies)) for l in self.polarizations]

    def frequency(self, mode: int) -> float:
        return float(self.frequencies[self.modes[mode][1]])

    def energy_conserving(self, a: int, b: int, c: int) -> bool:
        wa, wb, wc = self.frequency(a), self.frequency(b), self.frequency(c)
        return abs(wc - wa - wb) <= 1e-12 * max(wa, wb, wc)


@dataclass(frozen=True, eq=False)
class CouplingTensor:
    """K entries keyed by mode triples (created, created, annihilated)."""

    grid: ModeGrid
    entries: dict[tuple[int, int, int], complex]

    def __post_init__(self):
        n = len(self.grid.modes)
        for (a, b, c) in self.entries:
            if not all(0 <= x < n for x in (a, b, c)):
                raise ValueError(f"mode triple {(a, b, c)} outside the grid")
            if not self.grid.energy_conserving(a, b, c):
                raise ValueError(f"mode triple {(a, b, c)} violates w'' = w + w'")


def coupling_tensor_from_atom(grid: ModeGrid, atom: AtomModel, host: PermittivityModel, r_A,
                              u: UnitSystem | None = None, weight: float = 1.0) -> CouplingTensor:
    """Fill every energy-conserving triple with k_tensor_sum times a quadrature weight."""
    u = u or natural_units()
    green = BulkGreen(host, u)
    modes = grid.modes
    entries = {}
    for a, b, c in itertools.product(range(len(modes)), repeat=3):
        if not grid.energy_conserving(a, b, c):
            continue
        (pa, _, la), (pb, _, lb), (pc, _, lc) = modes[a], modes[b], modes[c]
        K = k_tensor_sum(atom, host, green, grid.positions[pa], grid.positions[pb], grid.positions[pc],
                         r_A, grid.frequency(a), grid.frequency(b), u)
        entries[(a, b, c)] = weight * K[la, lb, lc]
    return CouplingTensor(grid, entries)


def fock_basis(n_modes: int, truncation: int) -> list[tuple[int, ...]]:
    """Occupation tuples with total excitation <= truncation, in lexicographic order."""
    out: list[tuple[int, ...]] = []

    def grow(prefix: tuple[int, ...], left: int):
        if len(out) > MAX_DIMENSION:
            return
        if len(prefix) == n_modes:
            out.append(prefix)
            return
        for k in range(left + 1):
            grow(prefix + (k,), left - k)

    grow((), truncation)
    return out


def hamiltonian_matrix(K: CouplingTensor, truncation: int, u: UnitSystem | None = None) -> sp.csr_matrix:
    """-hbar sum K_abc f_a^dag f_b^dag f_c + h.c. on the truncated number basis.

    The raising part is projected onto the basis first and the conjugate is
    added afterwards, so the result is Hermitian by construction.
    """
    u = u or natural_units()
    if truncation < 2:
        raise ValueError("truncation must be >= 2")
    n_modes = len(K.grid.modes)
    basis = fock_basis(n_modes, truncation)
    if len(basis) > MAX_DIMENSION:
        raise ValueError("Fock space dimension exceeds the supported size")
    index = {s: k for k, s in enumerate(basis)}
    rows, cols, vals = [], [], []
    for col, state in enumerate(basis):
        for (a, b, c), k in K.entries.items():
            if k == 0:
                continue
            occ = list(state)
            amp = np.sqrt(occ[c])
            if amp == 0:
                continue
            occ[c] -= 1
            for m in (b, a):
                occ[m] += 1
                amp *= np.sqrt(occ[m])
            row = index.get(tuple(occ))
            if row is None:
                continue
            rows.append(row)
            cols.append(col)
            vals.append(-u.hbar * k * amp)
    dim = len(basis)
    A = sp.csr_matrix((np.asarray(vals, complex), (rows, cols)), shape=(dim, dim))
    return (A + A.conj().T).tocsr()
