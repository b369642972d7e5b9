"""Trace-set elimination of newforms and synthesis of the exponent bound C_K."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from math import gcd, isqrt
from typing import Optional, Sequence

import sympy

from .freycurve import Signature, WeierstrassModel, invariants
from .newforms import Coords, NewformRecord, hecke_norm
from .quadfield import PrimeIdeal, QuadField, ideals_of_norm, primes_up_to, split_prime, valuation

log = logging.getLogger(__name__)

AUX_NORM_BOUND = 50
DEFAULT_FLOOR = 17
ALL = "ALL"


@dataclass(frozen=True)
class TraceSet:
    norm_q: int
    t: int
    values: tuple[int, ...]

    def __contains__(self, a: int) -> bool:
        return a in self.values


def trace_set(norm_q: int, t: int) -> TraceSet:
    if t not in (2, 3):
        raise ValueError(f"unsupported t = {t}")
    if norm_q < 2:
        raise ValueError("norm_q must be >= 2")
    r = isqrt(4 * norm_q)
    return TraceSet(norm_q, t, tuple(a for a in range(-r, r + 1) if (norm_q + 1 - a) % t == 0))


# ---------------------------------------------------------------------------
# levels and auxiliary primes


@dataclass(frozen=True)
class Level:
    name: str  # "D", "PD" or "LD"
    primes: tuple[PrimeIdeal, ...]

    @property
    def norm(self) -> int:
        n = 1
        for P in self.primes:
            n *= P.norm
        return n

    @property
    def label(self) -> str:
        return f"{self.norm}.1"

    def divisible_by(self, q: PrimeIdeal) -> bool:
        return any(P.p == q.p and P.index == q.index and P.f == q.f for P in self.primes)


def default_d(K: QuadField) -> int:
    return abs(K.m)


def frey_levels(K: QuadField, signature: Signature, d: Optional[int] = None) -> list[Level]:
    """Candidate newform levels D and PD (or LD for the (p,p,3) curve).

    D is the product of the primes above the rational primes dividing d; P is
    the prime above 2, or lambda the prime above 3 for the (p,p,3) curve.
    """
    d = default_d(K) if d is None else d
    dprimes = tuple(P for p in sympy.primefactors(d) for P in split_prime(K, p))
    special = 3 if signature is Signature.PPQ3_APPENDIX else 2
    sp = split_prime(K, special)
    if len(sp) != 1:
        raise ValueError(f"{special} splits in {K}; the level prime above {special} is not unique")
    second = "LD" if special == 3 else "PD"
    extra = tuple(P for P in sp if P not in dprimes)
    levels = [Level("D", dprimes), Level(second, tuple(sorted(dprimes + extra, key=lambda P: P.p)))]
    for L in levels:
        if ideals_of_norm(K, L.norm) != 1:
            raise ValueError(f"level of norm {L.norm} is not determined by its norm")
    return levels


def auxiliary_primes(K: QuadField, level: Level, t: int, bound: int = AUX_NORM_BOUND) -> list[PrimeIdeal]:
    """Primes of norm < bound away from the level, from 2 and (for t = 3) from 3."""
    avoid = {2} if t == 2 else {2, 3}
    return [q for q in primes_up_to(K, bound) if q.p not in avoid and not level.divisible_by(q)]


# ---------------------------------------------------------------------------
# B_{f,q} and eliminators


def b_fq(form: NewformRecord, q: PrimeIdeal, t: int) -> tuple[Coords, int]:
    if q.p == 2 or (t == 3 and q.p == 3):
        raise ValueError(f"auxiliary prime {q.label} lies above {q.p}")
    if _divides_level(form, q):
        raise ValueError(f"{q.label} divides the level {form.level_label}")
    F = form.hecke_field
    a = form.eigenvalue(q.label)
    N = q.norm
    prod = F.sub(F.const((N + 1) ** 2), F.mul(a, a))
    prod = F.mul(prod, F.const(N))
    for x in trace_set(N, t).values:
        prod = F.mul(prod, F.sub(F.const(x), a))
    n = hecke_norm(F, prod)
    if n.denominator != 1:
        raise ValueError(f"non-integral norm {n} at {q.label}")
    return prod, abs(int(n))


def _divides_level(form: NewformRecord, q: PrimeIdeal) -> bool:
    if form.level_primes:
        return q.label in form.level_primes
    return form.level_norm % q.p == 0


@dataclass(frozen=True)
class FormVerdict:
    form: NewformRecord
    per_prime: dict[str, int]
    eliminator: int
    survivors: object  # frozenset of primes, or ALL
    floor: int
    inertia_eliminated: Optional[bool] = None

    @property
    def resolved(self) -> bool:
        return self.eliminator != 0 or bool(self.inertia_eliminated)


def survivors_of(G: int, floor: int):
    if G == 0:
        return ALL
    return frozenset(p for p in sympy.primefactors(G) if p > floor)


def eliminator(form: NewformRecord, primes: Sequence[PrimeIdeal], t: int, floor: int = DEFAULT_FLOOR) -> FormVerdict:
    if not primes:
        raise ValueError("empty auxiliary prime list")
    per = {q.label: b_fq(form, q, t)[1] for q in primes}
    G = reduce(gcd, per.values(), 0)
    for lab, n in per.items():
        if n and n % G:
            raise AssertionError(f"eliminator {G} does not divide N at {lab}")
    return FormVerdict(form, dict(sorted(per.items(), key=lambda kv: _lab(kv[0]))), G, survivors_of(G, floor), floor)


def _lab(s: str) -> tuple[int, int]:
    n, i = s.split(".")
    return int(n), int(i)


def curve_vj(curve: WeierstrassModel, P: PrimeIdeal) -> Optional[int]:
    """v_P(j) of a curve; None when j = 0."""
    j = invariants(curve).j
    if j is None:
        raise ValueError("singular curve")
    return valuation(j, P) if j else None


def inertia_eliminate(form: NewformRecord, frey_vj: int, P: PrimeIdeal, verdict: Optional[FormVerdict] = None) -> bool:
    """Eliminated iff the form's curve has potentially good reduction at P
    (v_P(j) >= 0) while the Frey curve is potentially multiplicative there."""
    if verdict is not None and verdict.eliminator != 0:
        raise ValueError("form has a nonzero eliminator; use trace elimination")
    if form.curve is None:
        raise ValueError(f"form {form.label} has no associated curve model")
    v = curve_vj(form.curve, P)
    return (v is None or v >= 0) and frey_vj < 0


# ---------------------------------------------------------------------------
# bound synthesis


class UnresolvedFormError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundReport:
    field: QuadField
    signature: Signature
    verdicts: tuple[FormVerdict, ...]
    irreducibility_floor: int
    torsion_primes: tuple[int, ...]
    excluded_primes: frozenset
    synthesized_bound: Optional[int]
    unresolved: tuple[str, ...] = ()
    notes: tuple[str, ...] = field(default=())


def bound_synthesis(verdicts: Sequence[FormVerdict], torsion_primes: Sequence[int], floor: int,
                    excluded: Sequence[int] = (), *, field_: QuadField = None,
                    signature: Signature = None, strict: bool = True) -> BoundReport:
    """C_K = max(floor, survivors, torsion primes).

    A prime listed in ``excluded`` is already ruled out separately (p != d), so
    when it is the next prime above the running bound it is absorbed into it:
    "p > 17 and p != 19" is reported as C_K = 19.
    """
    unresolved = tuple(sorted(v.form.label for v in verdicts if not v.resolved))
    ex = frozenset(excluded)
    verdicts = tuple(sorted(verdicts, key=lambda v: (v.form.level_norm, v.form.label)))
    if unresolved:
        msg = f"unresolved forms: {', '.join(unresolved)}"
        if strict:
            raise UnresolvedFormError(msg)
        log.warning(msg)
        return BoundReport(field_, signature, verdicts, floor, tuple(torsion_primes), ex, None, unresolved)
    bound = floor
    for v in verdicts:
        if v.survivors is not ALL and v.survivors:
            bound = max(bound, max(v.survivors))
    if torsion_primes:
        bound = max(bound, max(torsion_primes))
    notes = []
    while sympy.nextprime(bound) in ex:
        nxt = sympy.nextprime(bound)
        notes.append(f"excluded prime {nxt} absorbed into the bound")
        bound = int(nxt)
    return BoundReport(field_, signature, verdicts, floor, tuple(torsion_primes), ex, bound, (), tuple(notes))
