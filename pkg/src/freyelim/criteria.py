"""Auxiliary arithmetic feeding the irreducibility floors and bound synthesis."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import sympy

from .freycurve import Signature
from .quadfield import DEFAULT_DISC_LIMIT, PrimeIdeal, QuadField, class_numbers, split_prime

TORSION_DATA = Path(__file__).parent / "data" / "torsion.json"

# (theta_order, t) -> (bound, citation)
TORSION_FLOORS = {
    (1, 2): (13, "Kamienny 1992, Thm 3.1: prime-order torsion over quadratic fields is at most 13"),
    (2, 2): (17, "Derickx-Kamienny-Stein-Stoll: prime torsion over quartic fields is at most 17"),
    (1, 3): (5, "Kamienny; Kenku-Momose: no point of order 3p over quadratic fields for p >= 7"),
    (2, 3): (17, "Derickx-Kamienny-Stein-Stoll: prime torsion over quartic fields is at most 17"),
}


@dataclass(frozen=True)
class IrreducibilityContext:
    field: QuadField
    signature: Signature
    prime: PrimeIdeal
    t: int
    excluded: frozenset

    @classmethod
    def for_field(cls, K: QuadField, signature: Signature, d: int | None = None) -> "IrreducibilityContext":
        t = signature.torsion_t
        special = 3 if t == 3 else 2
        Ps = split_prime(K, special)
        if len(Ps) != 1:
            raise ValueError(f"{special} is split in {K}")
        d = abs(K.m) if d is None else d
        return cls(K, signature, Ps[0], t, frozenset(p for p in sympy.primefactors(d)))


def ray_class_order(K: QuadField, limit: int = DEFAULT_DISC_LIMIT) -> int:
    """Order of the ray class group of modulus oo1*oo2 (narrow class number) or h for imaginary K."""
    h, h_plus = class_numbers(K, limit)
    return h_plus if K.is_real else h


def torsion_floor(theta_order: int, t: int) -> int:
    return torsion_floor_cited(theta_order, t)[0]


def torsion_floor_cited(theta_order: int, t: int) -> tuple[int, str]:
    try:
        return TORSION_FLOORS[(theta_order, t)]
    except KeyError:
        raise ValueError(f"unsupported (theta_order, t) = ({theta_order}, {t})") from None


def split_case_obstruction(gen) -> tuple[int, frozenset]:
    """gen^2 - 1 and its prime divisors, for P = gen*O_K with gen a rational integer."""
    if not isinstance(gen, int):
        if getattr(gen, "y", 1) != 0 or getattr(gen, "x", None) is None or gen.x.denominator != 1:
            raise ValueError("generator must be a rational integer")
        gen = int(gen.x)
    value = gen * gen - 1
    if value == 0:
        raise ValueError(f"degenerate generator {gen}")
    return value, frozenset(sympy.primefactors(value))


def derived_floor(K: QuadField, signature: Signature) -> int:
    """Floor implied by the torsion bounds for every admissible theta order and the split-case obstruction."""
    ctx = IrreducibilityContext.for_field(K, signature)
    order = ray_class_order(K)
    floors = [torsion_floor(o, ctx.t) for o in range(1, order + 1) if (o, ctx.t) in TORSION_FLOORS]
    gen = ctx.prime.p
    floors.extend(split_case_obstruction(gen)[1])
    return max(floors)


@lru_cache(maxsize=1)
def _torsion_table(path: str = str(TORSION_DATA)) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema") != "freyelim.torsion/1":
        raise ValueError("torsion data schema mismatch")
    return {(e["field_label"], e["level_label"]): e for e in data["entries"]}


def abelianization_torsion(K: QuadField, level_descriptor: str) -> list[int]:
    """Recorded torsion primes of Gamma0(N)^ab; level given as label "N.1" or name "D"/"PD"."""
    table = _torsion_table()
    for (fl, ll), e in table.items():
        if fl == K.label and level_descriptor in (ll, e["level_name"]):
            return list(e["torsion_primes"])
    raise KeyError(f"no torsion data for {K.label} level {level_descriptor}")


def has_torsion_data(K: QuadField) -> bool:
    return any(fl == K.label for fl, _ in _torsion_table())
