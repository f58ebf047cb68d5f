"""N-level atom: dressed transition frequencies, second-order polarizability, couplings.

Conventions
-----------
``dipoles[i, j, a]`` is the Cartesian component ``a`` of <i|d|j>.
The dressed frequency of transition i -> j is
``w_ij = (w_i - w_j) + shift[i, j] + 1j * width[i, j]`` with the width symmetric
and positive, so every coherence decays regardless of ordering.

``chi2`` is the causal sum-over-states tensor, i.e. the double transform of the
commutator-trace response (``chi2_time_oracle``) over the wedge
``tau2 >= tau1 >= 0`` with kernel ``exp(-i w tau1 - i w' tau2)``.  In that
transform a coherence rho_xy created by an interaction evolves as
``exp(i w_yx s)`` and decays at rate ``width[x, y]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .units import UnitSystem, natural_units

DENOMINATOR_FLOOR = 1e-12


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AtomModel:
    bare_freqs: np.ndarray
    dipoles: np.ndarray
    widths: np.ndarray
    shifts: np.ndarray
    populations: np.ndarray

    def __post_init__(self):
        w = _frozen(self.bare_freqs, float)
        n = w.shape[0]
        if w.ndim != 1 or n < 2:
            raise ValueError("an atom needs at least two levels")
        d = _frozen(self.dipoles, complex)
        g = _frozen(self.widths, float)
        s = _frozen(self.shifts, float)
        p = _frozen(self.populations, float)
        if d.shape != (n, n, 3):
            raise ValueError(f"dipoles must have shape {(n, n, 3)}, got {d.shape}")
        if g.shape != (n, n) or s.shape != (n, n):
            raise ValueError(f"widths and shifts must have shape {(n, n)}")
        if p.shape != (n,):
            raise ValueError(f"populations must have shape {(n,)}")
        scale = max(1.0, float(np.abs(d).max()))
        bad = np.argwhere(np.abs(d - np.conj(d.transpose(1, 0, 2))).max(axis=2) > 1e-12 * scale)
        if bad.size:
            i, j = bad[0]
            raise ValueError(f"dipole matrix not Hermitian at pair ({i}, {j})")
        off = ~np.eye(n, dtype=bool)
        if np.any(g[off] <= 0):
            i, j = np.argwhere((g <= 0) & off)[0]
            raise ValueError(f"width ({i}, {j}) must be > 0")
        if np.any(np.abs(g - g.T) > 1e-12 * max(1.0, g.max())):
            raise ValueError("widths must be symmetric")
        if np.any(np.abs(s + s.T) > 1e-12 * max(1.0, np.abs(s).max())):
            raise ValueError("shifts must be antisymmetric")
        if np.any(p < 0) or np.any(p > 1) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("populations must lie in [0, 1] and sum to 1")
        for name, arr in [("bare_freqs", w), ("dipoles", d), ("widths", g), ("shifts", s), ("populations", p)]:
            object.__setattr__(self, name, arr)

    @property
    def n_levels(self) -> int:
        return self.bare_freqs.shape[0]

    @classmethod
    def build(cls, bare_freqs, dipoles, width=0.01, shift=0.0, populations=None) -> "AtomModel":
        """Convenience constructor with uniform width/shift and ground-state population."""
        n = len(bare_freqs)
        g = np.full((n, n), float(width))
        np.fill_diagonal(g, 0.0)
        s = np.zeros((n, n)) if np.isscalar(shift) and shift == 0 else np.asarray(shift, float)
        if populations is None:
            populations = np.eye(n)[0]
        return cls(bare_freqs, dipoles, g, s, populations)

    def scaled_dipoles(self, factor: float) -> "AtomModel":
        return AtomModel(self.bare_freqs, factor * self.dipoles, self.widths, self.shifts, self.populations)

    def dressed_matrix(self) -> np.ndarray:
        """All dressed frequencies w_ij; the diagonal is set to 0 (populations do not rotate)."""
        w = self.bare_freqs
        out = (w[:, None] - w[None, :]) + self.shifts + 1j * self.widths
        np.fill_diagonal(out, 0.0)
        return out

    @property
    def min_width(self) -> float:
        off = ~np.eye(self.n_levels, dtype=bool)
        return float(self.widths[off].min())

    @property
    def has_permanent_dipoles(self) -> bool:
        return bool(np.any(np.abs(np.einsum("iia->ia", self.dipoles)) > 0))


def dressed_frequency(atom: AtomModel, i: int, j: int) -> complex:
    if i == j:
        raise ValueError("dressed frequency is only defined for i != j")
    return complex(atom.bare_freqs[i] - atom.bare_freqs[j] + atom.shifts[i, j] + 1j * atom.widths[i, j])


def random_atom(rng: np.random.Generator, n_levels: int = 3, width_range=(0.05, 0.2),
                freq_span: float = 2.0, permanent: bool = False) -> AtomModel:
    """Random atom with a non-degenerate ladder, Hermitian dipoles and a mixed diagonal state."""
    w = np.sort(rng.uniform(0.0, freq_span, n_levels))
    w = w - w[0] + np.arange(n_levels) * 0.3
    d = rng.normal(size=(n_levels, n_levels, 3)) + 1j * rng.normal(size=(n_levels, n_levels, 3))
    d = 0.5 * (d + np.conj(d.transpose(1, 0, 2)))
    if not permanent:
        for i in range(n_levels):
            d[i, i] = 0.0
    g = rng.uniform(*width_range, size=(n_levels, n_levels))
    g = 0.5 * (g + g.T)
    np.fill_diagonal(g, 0.0)
    s = rng.uniform(-0.05, 0.05, size=(n_levels, n_levels))
    s = s - s.T
    p = rng.uniform(size=n_levels) * np.geomspace(1.0, 0.1, n_levels)
    p /= p.sum()
    return AtomModel(w, d, g, s, p)


def _chi2_prefactor(u: UnitSystem) -> float:
    # causal response: 1/((i hbar)^2 eps0) times the (1/i)^2 of the two time integrals
    return 1.0 / (u.hbar**2 * u.eps0)


def _inverse(den: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    use = np.ones(den.shape, bool) if mask is None else mask
    if np.any(np.abs(den[use]) < DENOMINATOR_FLOOR):
        raise DomainError("near-singular energy denominator in chi2")
    out = np.zeros_like(den)
    out[use] = 1.0 / den[use]
    return out


def chi2(atom: AtomModel, omega: float, omega_p: float, u: UnitSystem | None = None) -> np.ndarray:
    """Second-order polarizability tensor chi2[alpha, beta, gamma](omega, omega').

    ``alpha`` is the field leg at ``omega`` (later interaction), ``beta`` the leg
    at ``omega'`` (earlier interaction) and ``gamma`` the emitted polarization at
    ``omega + omega'``.
    """
    u = u or natural_units()
    n = atom.n_levels
    W = atom.dressed_matrix()
    off = ~np.eye(n, dtype=bool)
    # population terms after the first interaction cancel pairwise (term 1 vs 3, 2 vs 4)
    inv1 = _inverse(omega_p - W, off)
    # the diagonal of the second denominator multiplies d_ii, absent without permanent dipoles
    inv2 = _inverse(omega + omega_p - W, None if atom.has_permanent_dipoles else off)
    d, rho = atom.dipoles, atom.populations
    t1 = np.einsum("i,jka,kib,ijc,ik,ij->abc", rho, d, d, d, inv1, inv2, optimize=True)
    t2 = np.einsum("i,ija,kib,jkc,ik,jk->abc", rho, d, d, d, inv1, inv2, optimize=True)
    t3 = np.einsum("i,kia,ijb,jkc,ji,jk->abc", rho, d, d, d, inv1, inv2, optimize=True)
    t4 = np.einsum("i,jka,ijb,kic,ji,ki->abc", rho, d, d, d, inv1, inv2, optimize=True)
    return _chi2_prefactor(u) * (t1 - t2 - t3 + t4)


def chi2_pole_terms(atom: AtomModel, u: UnitSystem | None = None) -> list[tuple[np.ndarray, complex, complex]]:
    """chi2 as a list of ``(coef, p1, p2)`` with chi2 = sum coef / ((w' - p1)(w + w' - p2)).

    Terms sharing a pole pair are merged.  Every pole has positive imaginary
    part unless the atom carries permanent dipoles.
    """
    u = u or natural_units()
    n = atom.n_levels
    W = atom.dressed_matrix()
    d, rho = atom.dipoles, atom.populations
    pref = _chi2_prefactor(u)
    acc: dict[tuple[complex, complex], np.ndarray] = {}

    def add(coef, p1, p2):
        key = (complex(p1), complex(p2))
        acc[key] = acc.get(key, 0) + pref * coef

    for i in range(n):
        if rho[i] == 0:
            continue
        for j in range(n):
            for k in range(n):
                if i != k:
                    add(rho[i] * np.einsum("a,b,c->abc", d[j, k], d[k, i], d[i, j]), W[i, k], W[i, j])
                    add(-rho[i] * np.einsum("a,b,c->abc", d[i, j], d[k, i], d[j, k]), W[i, k], W[j, k])
                if j != i:
                    add(-rho[i] * np.einsum("a,b,c->abc", d[k, i], d[i, j], d[j, k]), W[j, i], W[j, k])
                    add(rho[i] * np.einsum("a,b,c->abc", d[j, k], d[i, j], d[k, i]), W[j, i], W[k, i])
    return [(c, p1, p2) for (p1, p2), c in acc.items() if np.any(c != 0)]


def chi2_component(atom: AtomModel, index: tuple[int, int, int], omega, omega_p,
                   u: UnitSystem | None = None):
    """One tensor component of chi2, broadcast over array-valued frequencies."""
    a, b, c = index
    w = np.asarray(omega, float)
    wp = np.asarray(omega_p, float)
    out = np.zeros(np.broadcast(w, wp).shape, complex)
    for coef, p1, p2 in chi2_pole_terms(atom, u):
        amp = coef[a, b, c]
        if amp != 0:
            out += amp / ((wp - p1) * (w + wp - p2))
    return out


def _propagator(W: np.ndarray, s: float) -> np.ndarray:
    # coherence x,y evolves as exp(i w_yx s); w_yx carries +width, so it decays
    return np.exp(1j * W.T * s)


def chi2_time_oracle(atom: AtomModel, tau1: float, tau2: float, u: UnitSystem | None = None) -> np.ndarray:
    """Time-domain response Tr{rho [[d_gamma(0), d_alpha(-tau1)], d_beta(-tau2)]} / ((i hbar)^2 eps0).

    Evaluated by explicit matrix algebra: commutator with d_beta, free damped
    evolution over tau2 - tau1, commutator with d_alpha, evolution over tau1,
    trace against d_gamma.  Without widths this is identical to inserting the
    Heisenberg-picture matrix elements d_ij exp(i w_ij t).
    """
    if tau1 < 0 or tau2 < tau1:
        raise ValueError("need 0 <= tau1 <= tau2")
    u = u or natural_units()
    W = atom.dressed_matrix()
    d = np.moveaxis(atom.dipoles, 2, 0)  # (3, n, n)
    rho = np.diag(atom.populations).astype(complex)
    x1 = d @ rho - rho @ d  # [beta]
    x2 = x1 * _propagator(W, tau2 - tau1)
    x3 = d[:, None] @ x2[None] - x2[None] @ d[:, None]  # [alpha, beta]
    x4 = x3 * _propagator(W, tau1)
    out = np.einsum("abxy,cyx->abc", x4, d)
    return -out / (u.hbar**2 * u.eps0)


def oracle_steps(atom: AtomModel, omega: float, omega_p: float) -> tuple[float, float]:
    """Step and truncation for the wedge quadrature: exp(-width_min T) < 1e-8."""
    gmin = atom.min_width
    if gmin <= 0:
        raise DomainError("oracle transform needs every width > 0")
    W = atom.dressed_matrix()
    wmax = max(abs(omega_p), abs(omega + omega_p), abs(omega)) + float(np.abs(W.real).max())
    step = min(0.01 / wmax, 0.1 / gmin)
    horizon = np.log(1e8) / gmin * 1.0001
    return step, horizon


def _trapezoid_kernel(W: np.ndarray, freq: float, step: float, horizon: float) -> np.ndarray:
    """Trapezoid sum of exp(-i freq s) * exp(i W_yx s) over s in [0, horizon], per entry."""
    m = int(np.ceil(horizon / step))
    s = np.arange(m + 1) * step
    wts = np.full(m + 1, step)
    wts[0] = wts[-1] = step / 2
    rate = 1j * (W.T - freq)  # (n, n)
    out = np.empty(W.shape, complex)
    for idx in np.ndindex(W.shape):
        out[idx] = np.dot(wts, np.exp(rate[idx] * s))
    return out


def chi2_from_oracle(atom: AtomModel, omega: float, omega_p: float, u: UnitSystem | None = None,
                     step: float | None = None, horizon: float | None = None) -> np.ndarray:
    """Numerical double transform of ``chi2_time_oracle`` over tau2 >= tau1 >= 0.

    With u = tau1 and s = tau2 - tau1 the wedge becomes a quadrant and the
    integrand is bilinear in the two evolution factors, so the 2-D trapezoid
    rule on the (u, s) lattice is carried out as two nested sums over
    matrix-valued samples.  The result is exactly the 2-D trapezoid sum.
    """
    u = u or natural_units()
    if atom.has_permanent_dipoles:
        raise DomainError("permanent dipoles create undamped population terms; the transform does not converge")
    d_step, d_horizon = oracle_steps(atom, omega, omega_p)
    step = step or d_step
    horizon = horizon or d_horizon
    W = atom.dressed_matrix()
    n = atom.n_levels
    off = ~np.eye(n, dtype=bool)
    d = np.moveaxis(atom.dipoles, 2, 0)
    rho = np.diag(atom.populations).astype(complex)
    ks = _trapezoid_kernel(W, omega_p, step, horizon)
    ku = _trapezoid_kernel(W, omega + omega_p, step, horizon)
    # populations never carry a factor that survives: x1 has zero diagonal, and
    # the trace against a dipole with zero diagonal discards x3's diagonal
    ks[~off] = 0.0
    ku[~off] = 0.0
    x1 = d @ rho - rho @ d
    y = x1 * ks
    x3 = d[:, None] @ y[None] - y[None] @ d[:, None]
    z = x3 * ku
    out = np.einsum("abxy,cyx->abc", z, d)
    return -out / (u.hbar**2 * u.eps0)


def coupling_g(atom: AtomModel, i: int, j: int, green_value: np.ndarray, eps_im: float, omega: float,
               u: UnitSystem | None = None) -> np.ndarray:
    """g_{lambda,ij} = i / sqrt(hbar eps0 pi) (w^2/c^2) sqrt(eps'') d_{mu,ij} G_{mu lambda}."""
    u = u or natural_units()
    if eps_im < 0:
        raise DomainError("eps_im must be >= 0")
    pref = 1j / np.sqrt(u.hbar * u.eps0 * np.pi) * omega**2 / u.c**2 * np.sqrt(eps_im)
    return pref * (atom.dipoles[i, j] @ np.asarray(green_value))
