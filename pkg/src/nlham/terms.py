"""Symbolic replay of the second-order expansion that produces the coupling tensor K.

The flip operator sigma_ab obeys

    d/dt sigma_ab = i w_ab sigma_ab + i^q sum_p [bracket_f] f + i^q sum_p [bracket_fdag] f^dag

and its formal solution is substituted into itself.  Level labels are
symbols; an atomic frequency w_xy is kept as the energy difference E_x - E_y
so that resonance checks are exact cancellations.  Each substitution
introduces a fresh dummy label and a fresh time variable.

Three bracket rules are available.  ``commutator`` is derived from
H_int = -hbar sum sigma_ij g_ij f + h.c.  ``swapped_first`` transposes the
coupling index pair in the first creation bracket term and ``swapped_both``
transposes it in both; they are kept to show that only ``commutator``
reproduces the K structure (see ``k_structure``).
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

LABELS = ("i", "j", "k", "p")
SLOTS = ("w", "wp", "wpp")
_SLOT_TEXT = {"w": "w", "wp": "w'", "wpp": "w''"}

Signature = tuple[tuple[str, int], ...]


def _sig(counter: Counter) -> Signature:
    return tuple(sorted((s, c) for s, c in counter.items() if c != 0))


def _energy(label: str) -> str:
    return "E_" + label


def _omega(a: str, b: str) -> Counter:
    """Transition frequency w_ab as E_a - E_b."""
    c = Counter()
    c[_energy(a)] += 1
    c[_energy(b)] -= 1
    return c


@dataclass(frozen=True)
class Factor:
    conjugated: bool
    pair: tuple[str, str]
    slot: str
    creation: bool


@dataclass(frozen=True)
class AtomicOp:
    kind: str  # "diagonal", "flip" or "initial"
    pair: tuple[str, str]


@dataclass(frozen=True)
class SymbolicTerm:
    sign: int
    i_power: int
    factors: tuple[Factor, ...]
    atomic_op: AtomicOp
    exponents: tuple[Signature, ...]  # one phase per time variable t, t', t''
    denominators: tuple[Signature, ...] = ()
    outer: tuple[str, str] = ("i", "j")

    @property
    def order(self) -> int:
        return len(self.factors)

    def relabel(self, mapping: dict[str, str]) -> "SymbolicTerm":
        def lab(x):
            return mapping.get(x, x)

        def sig(s):
            c = Counter()
            for sym, coef in s:
                c[_energy(lab(sym[2:])) if sym.startswith("E_") else sym] += coef
            return _sig(c)

        return replace(
            self,
            factors=tuple(replace(f, pair=(lab(f.pair[0]), lab(f.pair[1]))) for f in self.factors),
            atomic_op=replace(self.atomic_op, pair=(lab(self.atomic_op.pair[0]), lab(self.atomic_op.pair[1]))),
            exponents=tuple(sig(s) for s in self.exponents),
            denominators=tuple(sig(s) for s in self.denominators),
            outer=(lab(self.outer[0]), lab(self.outer[1])),
        )


# A rule maps (a, b, dummy) to [(sign, g index pair, new sigma pair)] for each
# field character, plus the power of i in front of the bracket.
@dataclass(frozen=True)
class BracketRule:
    name: str
    i_power: int

    def brackets(self, a: str, b: str, p: str, creation: bool):
        if not creation:
            return [(1, (b, p), (a, p)), (-1, (p, a), (p, b))]
        if self.name == "commutator":
            return [(1, (p, b), (a, p)), (-1, (a, p), (p, b))]
        if self.name == "swapped_first":
            return [(1, (b, p), (a, p)), (-1, (a, p), (p, b))]
        if self.name == "swapped_both":
            return [(1, (b, p), (a, p)), (-1, (p, a), (p, b))]
        raise ValueError(f"unknown bracket rule {self.name!r}")


RULES = {
    "commutator": BracketRule("commutator", 1),
    "swapped_first": BracketRule("swapped_first", 3),
    "swapped_both": BracketRule("swapped_both", 3),
}


def expand_atomic_solution(order: int, rule: str = "commutator", *,
                           creation_only: bool = False) -> list[SymbolicTerm]:
    """All terms of sigma_ij(t) carrying exactly ``order`` field operators.

    Slot ``w`` belongs to the first substitution, ``w'`` to the second.  The
    phase at the last time variable always includes the free evolution of
    the innermost atomic operator, so the total phase is the field
    frequencies plus that operator's transition frequency.
    """
    if order not in (1, 2):
        raise ValueError("expand_atomic_solution supports order 1 or 2")
    r = RULES[rule]
    dummies = ("k", "p")
    slots = ("w", "wp")
    terms = [SymbolicTerm(1, 0, (), AtomicOp("flip", ("i", "j")), (_sig(_omega("i", "j")),))]
    characters = (True,) if creation_only else (True, False)
    for level in range(order):
        nxt = []
        for t in terms:
            a, b = t.atomic_op.pair
            for creation in characters:
                for s, gpair, new in r.brackets(a, b, dummies[level], creation):
                    phase = Counter()
                    phase[slots[level]] += 1 if creation else -1
                    phase.subtract(_omega(a, b))
                    phase.update(_omega(*new))
                    nxt.append(SymbolicTerm(
                        t.sign * s,
                        (t.i_power + r.i_power) % 4,
                        t.factors + (Factor(creation, gpair, slots[level], creation),),
                        AtomicOp("flip", new),
                        t.exponents + (_sig(phase),),
                    ))
        terms = nxt
    return terms


def _atomic_part(sig: Signature) -> Counter:
    return Counter({s: c for s, c in sig if s.startswith("E_")})


def _total_phase(term: SymbolicTerm) -> Counter:
    c = Counter()
    for s in term.exponents:
        c.update(dict(s))
    return Counter({k: v for k, v in c.items() if v != 0})


def filter_rwa(terms: list[SymbolicTerm], condition: tuple[str, ...] = ("w", "wp")) -> list[SymbolicTerm]:
    """Keep the terms that can oscillate at w'' = w + w'.

    A surviving term has two creation factors and a diagonal atomic operator;
    the sum over the innermost dummy label is restricted to make it so.  The
    total phase must then be exactly the field frequencies in ``condition``.
    """
    target = Counter({s: 1 for s in condition})
    out = []
    for t in terms:
        if t.atomic_op.kind == "initial" or len(t.factors) != len(condition):
            continue
        if not all(f.creation for f in t.factors):
            continue
        x, y = t.atomic_op.pair
        if x != y:
            keep, drop = sorted((x, y), key=LABELS.index)
            t = t.relabel({drop: keep})
        t = replace(t, atomic_op=AtomicOp("diagonal", t.atomic_op.pair))
        if _total_phase(t) == target:
            out.append(t)
    return out


def integrate_time_nested(term: SymbolicTerm) -> SymbolicTerm:
    """Do the nested time integrals and keep the piece oscillating at the total phase.

    With phases A, B, C at t, t', t'' the double integral
    int_0^t dt' int_0^t' dt'' contributes -1/(C (B + C)) exp(i (A + B + C) t).
    """
    n = len(term.exponents) - 1
    if n == 0:
        return term
    if n > 2 or term.denominators:
        raise ValueError("malformed or already integrated exponent signature")
    phases = [Counter(dict(s)) for s in term.exponents]
    total = _sig(_total_phase(term))
    if n == 1:
        dens = (_sig(phases[1]),)
        sign, ipow = term.sign, (term.i_power + 3) % 4  # 1/(iB) = -i/B
    else:
        bc = Counter(phases[1])
        bc.update(phases[2])
        dens = (_sig(phases[2]), _sig(bc))
        sign, ipow = -term.sign, term.i_power
    if any(len(d) == 0 for d in dens):
        raise ValueError("zero denominator: exponent vanishes identically")
    return replace(term, sign=sign, i_power=ipow, exponents=(total,), denominators=dens)


@dataclass(frozen=True, order=True)
class Summand:
    pairs: tuple[tuple[str, str], ...]  # legs lambda (w), mu (w'), nu (w'')
    denominators: tuple[tuple[tuple[str, ...], tuple[str, str]], ...]
    sign: int
    conjugated: tuple[bool, ...]
    rho: str

    def relabel(self, m: dict[str, str]) -> "Summand":
        def pr(p):
            return (m.get(p[0], p[0]), m.get(p[1], p[1]))

        return Summand(tuple(pr(p) for p in self.pairs),
                       tuple((f, pr(p)) for f, p in self.denominators),
                       self.sign, self.conjugated, m.get(self.rho, self.rho))

    @property
    def labels(self) -> tuple[str, ...]:
        seen = {self.rho}
        for a, b in self.pairs:
            seen.update((a, b))
        return tuple(sorted(seen, key=LABELS.index))


def _den_form(sig: Signature) -> tuple[tuple[str, ...], tuple[str, str]]:
    fields = tuple(s for s, c in sig if not s.startswith("E_") for _ in range(c))
    if any(c < 0 for s, c in sig if not s.startswith("E_")):
        raise ValueError("negative field frequency in a denominator")
    neg = [s[2:] for s, c in sig if s.startswith("E_") and c == -1]
    pos = [s[2:] for s, c in sig if s.startswith("E_") and c == 1]
    if len(neg) != 1 or len(pos) != 1 or len(sig) != len(fields) + 2:
        raise ValueError(f"denominator {sig} is not of the form (field - w_xy)")
    return tuple(sorted(fields, key=SLOTS.index)), (neg[0], pos[0])


def canonical(s: Summand) -> Summand:
    """Relabel levels so that the summand is lexicographically smallest."""
    labs = s.labels
    best = None
    for perm in itertools.permutations(LABELS[: len(labs)]):
        cand = s.relabel(dict(zip(labs, perm)))
        key = (cand.rho, cand.pairs, cand.denominators)
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


def to_coupling_structure(terms: list[SymbolicTerm]) -> tuple[Summand, ...]:
    """Attach the emitted leg g_{nu, outer}(w'') and return the sorted canonical summands."""
    out = []
    for t in terms:
        if t.atomic_op.kind != "diagonal" or len(t.denominators) != 2:
            raise ValueError("terms must be filtered and integrated")
        if t.i_power % 2:
            raise ValueError("summand with an imaginary coefficient")
        sign = t.sign * (-1 if t.i_power == 2 else 1)
        legs = sorted(t.factors, key=lambda f: SLOTS.index(f.slot))
        s = Summand(
            tuple(f.pair for f in legs) + (t.outer,),
            tuple(_den_form(d) for d in t.denominators),
            sign,
            tuple(f.conjugated for f in legs) + (False,),
            t.atomic_op.pair[0],
        )
        out.append(canonical(s))
    return tuple(sorted(out))


def _summand(sign, l, m, n, d1, d2):
    return Summand((tuple(l), tuple(m), tuple(n)),
                   ((("wp",), tuple(d1)), (("w", "wp"), tuple(d2))),
                   sign, (True, True, False), "i")


def k_structure() -> tuple[Summand, ...]:
    """The four summands of K as written, in canonical form."""
    raw = [
        _summand(+1, "kj", "ik", "ij", "ik", "ij"),
        _summand(-1, "ij", "ki", "kj", "ki", "kj"),
        _summand(-1, "ki", "ij", "kj", "ij", "kj"),
        _summand(+1, "jk", "ki", "ji", "ki", "ji"),
    ]
    return tuple(sorted(canonical(s) for s in raw))


def derive_k_structure(rule: str = "commutator") -> tuple[Summand, ...]:
    terms = filter_rwa(expand_atomic_solution(2, rule))
    return to_coupling_structure([integrate_time_nested(t) for t in terms])


def render(structure: tuple[Summand, ...]) -> str:
    """Deterministic ASCII form, one summand per line."""
    legs = ("l", "m", "n")
    lines = []
    for s in structure:
        gs = []
        for leg, pair, conj, slot in zip(legs, s.pairs, s.conjugated, SLOTS):
            gs.append(f"g{'*' if conj else ''}[{leg};{pair[0]}{pair[1]}]({_SLOT_TEXT[slot]})")
        dens = "".join(
            "(" + " + ".join(_SLOT_TEXT[f] for f in fields) + f" - w_{a}{b})" for fields, (a, b) in s.denominators
        )
        lines.append(f"{'+' if s.sign > 0 else '-'} rho[{s.rho}] {' '.join(gs)} / {dens}")
    return "\n".join(lines) + "\n"


def instantiate(structure: tuple[Summand, ...], g: dict[str, np.ndarray], dressed: np.ndarray,
                populations: np.ndarray, omega: float, omega_p: float) -> complex:
    """Numeric value of a structure for one (lambda, mu, nu) component.

    ``g[slot][x, y]`` is the unconjugated coupling g_xy on that leg; each
    summand applies its own conjugation.  ``dressed[x, y]`` is w_xy.
    """
    freq = {"w": omega, "wp": omega_p}
    n = len(populations)
    total = 0.0j
    for s in structure:
        labs = s.labels
        for vals in itertools.product(range(n), repeat=len(labs)):
            m = dict(zip(labs, vals))
            term = s.sign * populations[m[s.rho]]
            for pair, conj, slot in zip(s.pairs, s.conjugated, SLOTS):
                v = g[slot][m[pair[0]], m[pair[1]]]
                term *= np.conj(v) if conj else v
            for fields, (a, b) in s.denominators:
                term /= sum(freq[f] for f in fields) - dressed[m[a], m[b]]
            total += term
    return complex(total)
