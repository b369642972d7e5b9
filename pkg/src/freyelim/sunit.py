"""Bounded-box S-unit solvers over quadratic fields.

Everything is exact: membership in O_S^x is decided by stripping S-primes from
the norm and checking valuations, and square roots come from sqrt_in_field.
Results are complete only inside the exponent box, so reports carry the box.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import sympy

from .quadfield import (
    FieldElement,
    PrimeIdeal,
    QuadField,
    _canonical_sign,
    class_numbers,
    find_generator,
    fundamental_unit,
    kronecker,
    make_field,
    split_prime,
    sqrt_in_field,
    torsion_units,
    valuation,
)

DEFAULT_BOX = 6


class NonPrincipalPrimeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# basis


@dataclass(frozen=True)
class SUnitBasis:
    field: QuadField
    S: tuple[PrimeIdeal, ...]
    generators: tuple[FieldElement, ...]
    fundamental_unit: Optional[FieldElement]
    torsion: tuple[FieldElement, ...]

    @property
    def rational_primes(self) -> frozenset:
        return frozenset(P.p for P in self.S)

    @property
    def rank(self) -> int:
        return len(self.S) + (1 if self.fundamental_unit is not None else 0)

    def element(self, t: int, k: int, exps: Sequence[int]) -> FieldElement:
        z = self.torsion[t]
        if k:
            z = z * self.fundamental_unit**k
        for g, e in zip(self.generators, exps):
            if e:
                z = z * g**e
        return z


def _expand_S(K: QuadField, S: Iterable) -> tuple[PrimeIdeal, ...]:
    out: list[PrimeIdeal] = []
    for s in S:
        Ps = split_prime(K, s) if isinstance(s, int) else (s,)
        for P in Ps:
            if P.field != K:
                raise ValueError(f"{P} is not a prime of {K}")
            if P not in out:
                out.append(P)
    return tuple(sorted(out, key=lambda P: (P.norm, P.index)))


def s_unit_basis(K: QuadField, S: Iterable) -> SUnitBasis:
    """Basis of O_S^x; S holds PrimeIdeals or rational primes (all primes above them)."""
    primes = _expand_S(K, S)
    gens = []
    for P in primes:
        g = P.gen if P.gen is not None else find_generator(P)
        if g is None:
            raise NonPrincipalPrimeError(f"{P} has no generator within the search radius")
        if abs(g.norm()) != P.norm or valuation(g, P) != 1:
            raise NonPrincipalPrimeError(f"generator {g} does not generate {P}")
        if any(valuation(g, Q) for Q in primes if Q != P):
            raise NonPrincipalPrimeError(f"generator {g} of {P} meets another prime of S")
        gens.append(g)
    eps = fundamental_unit(K) if K.is_real else None
    return SUnitBasis(K, primes, tuple(gens), eps, tuple(torsion_units(K)))


# ---------------------------------------------------------------------------
# membership and decomposition


def is_s_unit(z: FieldElement, basis: SUnitBasis) -> bool:
    if not z:
        return False
    n = z.norm()
    num, den = abs(n.numerator), n.denominator
    for p in basis.rational_primes:
        while num % p == 0:
            num //= p
        while den % p == 0:
            den //= p
    if num != 1 or den != 1:
        return False
    # a split p may sit in S through one of its primes only
    for p in basis.rational_primes:
        for P in split_prime(basis.field, p):
            if P not in basis.S and valuation(z, P) != 0:
                return False
    # z is now a unit at every prime outside S, up to the denominators of its coordinates
    for c in (z.x, z.y):
        for p in sympy.primefactors(c.denominator):
            if p not in basis.rational_primes:
                if any(valuation(z, P) for P in split_prime(basis.field, p)):
                    return False
    return True


@dataclass(frozen=True)
class Exponents:
    torsion: int
    unit: int
    gens: tuple[int, ...]

    def as_list(self) -> list[int]:
        return [self.torsion, self.unit, *self.gens]


def decompose(z: FieldElement, basis: SUnitBasis) -> Exponents:
    """Exponents with z = zeta_t * eps^k * prod g_i^e_i; ValueError if z is not an S-unit."""
    if not is_s_unit(z, basis):
        raise ValueError(f"{z} is not an S-unit")
    exps = tuple(valuation(z, P) for P in basis.S)
    u = z
    for g, e in zip(basis.generators, exps):
        if e:
            u = u / g**e
    k = 0
    if basis.fundamental_unit is not None:
        eps = basis.fundamental_unit
        # estimate from the real embedding, then confirm exactly
        est = round(math.log(abs(u.to_float())) / math.log(abs(eps.to_float())))
        for cand in (est, est - 1, est + 1):
            w = u / eps**cand
            if w in basis.torsion:
                k, u = cand, w
                break
        else:
            raise ArithmeticError(f"unit {z} is not a power of the fundamental unit")
    for t, zeta in enumerate(basis.torsion):
        if u == zeta:
            return Exponents(t, k, exps)
    raise ArithmeticError(f"{u} is a unit outside the torsion list")


def in_box(e: Exponents, box: int) -> bool:
    return abs(e.unit) <= box and all(abs(x) <= box for x in e.gens)


def enumerate_box(basis: SUnitBasis, box: int) -> Iterator[tuple[Exponents, FieldElement]]:
    """Every S-unit with |unit exponent| and |generator exponents| at most box."""
    if box < 0:
        raise ValueError("box must be >= 0")
    rng = range(-box, box + 1)
    unit_range = rng if basis.fundamental_unit is not None else range(0, 1)
    gen_pows = [{e: g**e for e in rng} for g in basis.generators]
    eps_pows = {k: basis.fundamental_unit**k for k in unit_range} if basis.fundamental_unit is not None else {0: None}
    for k in unit_range:
        base_k = eps_pows[k]
        for exps in itertools.product(rng, repeat=len(basis.generators)):
            z = basis.field(1) if base_k is None else base_k
            for gp, e in zip(gen_pows, exps):
                z = z * gp[e]
            for t, zeta in enumerate(basis.torsion):
                yield Exponents(t, k, exps), zeta * z


def _elem_key(z: FieldElement) -> tuple:
    return (z.x, z.y)


# ---------------------------------------------------------------------------
# x + y = 1


def solve_unit_equation(basis: SUnitBasis, box: int = DEFAULT_BOX) -> list[tuple[FieldElement, FieldElement]]:
    """All (x, y) with x + y = 1, both S-units with exponents inside the box."""
    out = set()
    for _, x in enumerate_box(basis, box):
        y = 1 - x
        if not y or not is_s_unit(y, basis):
            continue
        if in_box(decompose(y, basis), box):
            out.add((x, y))
    return sorted(out, key=lambda xy: (_elem_key(xy[0]), _elem_key(xy[1])))


# ---------------------------------------------------------------------------
# alpha + beta = gamma^2


@dataclass(frozen=True)
class SUnitSolution:
    alpha: FieldElement
    beta: FieldElement
    gamma: FieldElement
    alpha_exponents: Optional[Exponents] = field(default=None, compare=False)
    beta_exponents: Optional[Exponents] = field(default=None, compare=False)

    def key(self) -> tuple:
        return (_elem_key(self.alpha), _elem_key(self.beta), _elem_key(self.gamma))

    def check(self, basis: SUnitBasis) -> None:
        if self.alpha + self.beta != self.gamma * self.gamma:
            raise AssertionError(f"{self} does not satisfy alpha + beta = gamma^2")
        for z in (self.alpha, self.beta):
            if not is_s_unit(z, basis):
                raise AssertionError(f"{z} is not an S-unit")


def _square_reduce(z: FieldElement, basis: SUnitBasis) -> FieldElement:
    """The s with z / s^2 having every exponent in {0, 1} (torsion exponent mod 2)."""
    e = decompose(z, basis)
    s = basis.element(e.torsion // 2 if len(basis.torsion) > 2 else 0, e.unit // 2, [g // 2 for g in e.gens])
    return s


def _two_primes(basis: SUnitBasis) -> list[PrimeIdeal]:
    return [P for P in basis.S if P.p == 2]


def normalize(sol: SUnitSolution, basis: SUnitBasis) -> SUnitSolution:
    """Canonical representative modulo ~2 and the swap of alpha and beta.

    beta is scaled so every exponent lies in {0, 1}; among the two orderings,
    one with 0 <= v_P(beta) <= v_P(alpha) at the primes above 2 is preferred,
    then the smaller coordinate key. gamma gets the canonical sign.
    """
    cands = []
    for a, b in ((sol.alpha, sol.beta), (sol.beta, sol.alpha)):
        s = _square_reduce(b, basis)
        a2, b2, g2 = a / (s * s), b / (s * s), _canonical_sign(sol.gamma / s)
        good = all(0 <= valuation(b2, P) <= valuation(a2, P) for P in _two_primes(basis))
        cands.append((0 if good else 1, (_elem_key(a2), _elem_key(b2)), SUnitSolution(a2, b2, g2)))
    _, _, best = min(cands, key=lambda c: (c[0], c[1]))
    return SUnitSolution(best.alpha, best.beta, best.gamma, decompose(best.alpha, basis), decompose(best.beta, basis))


def beta_representatives(basis: SUnitBasis) -> list[FieldElement]:
    """S-units modulo squares: torsion mod squares x eps^{0,1} x gens^{0,1}."""
    tors = range(2) if len(basis.torsion) > 2 else range(len(basis.torsion))
    units = range(2) if basis.fundamental_unit is not None else range(1)
    out = []
    for t in tors:
        for k in units:
            for exps in itertools.product(range(2), repeat=len(basis.generators)):
                out.append(basis.element(t, k, exps))
    return out


def solve_square_equation(basis: SUnitBasis, box: int = DEFAULT_BOX) -> list[SUnitSolution]:
    """Normalized solutions of alpha + beta = gamma^2 with alpha in the box."""
    if box < 0:
        raise ValueError("box must be >= 0")
    found = {}
    betas = beta_representatives(basis)
    for _, a in enumerate_box(basis, box):
        for b in betas:
            g = sqrt_in_field(a + b)
            if g is None:
                continue
            sol = normalize(SUnitSolution(a, b, g), basis)
            sol.check(basis)
            found.setdefault(sol.key(), sol)
    return [found[k] for k in sorted(found)]


def solve_plus_one(basis: SUnitBasis, box: int = DEFAULT_BOX) -> list[tuple[FieldElement, FieldElement]]:
    """(alpha, gamma) with alpha + 1 = gamma^2, alpha an S-unit in the box, gamma canonical sign."""
    out = {}
    for _, a in enumerate_box(basis, box):
        g = sqrt_in_field(a + 1)
        if g is not None:
            out[_elem_key(a)] = (a, g)
    return [out[k] for k in sorted(out)]


# ---------------------------------------------------------------------------
# criteria


def criterion_A(solutions: Iterable[SUnitSolution], P: PrimeIdeal) -> bool:
    """|v_P(alpha/beta)| <= 6 v_P(2) for every solution."""
    bound = 6 * valuation(2, P)
    return all(abs(valuation(s.alpha / s.beta, P)) <= bound for s in solutions)


def criterion_B(alphas: Iterable[FieldElement], P: PrimeIdeal, bound: int = 6) -> bool:
    """Every alpha with v_P(alpha) >= 0 has v_P(alpha) <= bound."""
    return all(valuation(a, P) <= bound for a in alphas if valuation(a, P) >= 0)


# ---------------------------------------------------------------------------
# descent for x^p + l^r y^p = z^2 over Q(sqrt q)


@dataclass(frozen=True)
class DescentReport:
    q: int
    ell: int
    box: int
    hypotheses: dict
    unit_solutions: tuple = ()
    alphas: tuple = ()
    valuations: tuple = ()
    plus_one_alphas: tuple = ()
    criterion_B: Optional[bool] = None

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.hypotheses.items() if not v]

    @property
    def ok(self) -> bool:
        return not self.failed and bool(self.criterion_B)

    def to_dict(self) -> dict:
        def el(z):
            return str(z)

        return {
            "q": self.q,
            "ell": self.ell,
            "box": self.box,
            "hypotheses": dict(self.hypotheses),
            "failed": self.failed,
            "unit_solutions": [[el(x), el(y)] for x, y in self.unit_solutions],
            "alphas": [el(a) for a in self.alphas],
            "valuations": list(self.valuations),
            "plus_one_alphas": [el(a) for a in self.plus_one_alphas],
            "criterion_B": self.criterion_B,
            "verified_within_box": self.ok,
        }


def descent_hypotheses(q: int, ell: int) -> dict:
    hyp = {
        "q prime": bool(sympy.isprime(q)),
        "q >= 13": q >= 13,
        "q = 5 mod 8": q % 8 == 5,
        "l prime": bool(sympy.isprime(ell)),
        "l >= 29": ell >= 29,
        "l = 5 mod 8": ell % 8 == 5,
        "(q/l) = -1": bool(sympy.isprime(ell)) and ell != 2 and kronecker(q, ell) == -1,
    }
    if hyp["q prime"] and hyp["q = 5 mod 8"]:
        K = make_field(q)
        h, hplus = class_numbers(K)
        hyp["2 inert"] = split_prime(K, 2)[0].f == 2
        hyp["l inert"] = hyp["l prime"] and split_prime(K, ell)[0].f == 2
        hyp["h+ odd"] = hplus % 2 == 1
        hyp["N(eps) = -1"] = fundamental_unit(K).norm() == -1
    return hyp


def theoremC_descent(q: int, ell: int, box: int = DEFAULT_BOX) -> DescentReport:
    """Check the hypotheses, solve x + y = 1 over O_S with S = {2, l}, and map
    each solution to gamma = x - y, alpha = gamma^2 - 1."""
    hyp = descent_hypotheses(q, ell)
    if not all(hyp.values()):
        return DescentReport(q, ell, box, hyp)
    K = make_field(q)
    basis = s_unit_basis(K, [2, ell])
    P = split_prime(K, 2)[0]
    sols = solve_unit_equation(basis, box)
    alphas = {}
    for x, y in sols:
        gamma = x - y
        alpha = gamma * gamma - 1
        if alpha != -4 * x * y:
            raise AssertionError("descent identity failed")
        if alpha:
            alphas[_elem_key(alpha)] = alpha
    alpha_list = tuple(alphas[k] for k in sorted(alphas))
    vals = tuple(valuation(a, P) for a in alpha_list)
    direct = tuple(a for a, _ in solve_plus_one(basis, box))
    crit = criterion_B(alpha_list, P) and criterion_B(direct, P)
    return DescentReport(q, ell, box, hyp, tuple(sols), alpha_list, vals, direct, crit)


def admissible_ells(q: int, limit: int) -> list[int]:
    """Primes l < limit satisfying the congruence and Legendre conditions for q."""
    return [l for l in sympy.primerange(29, limit) if l % 8 == 5 and kronecker(q, l) == -1]


__all__ = [
    "DEFAULT_BOX", "NonPrincipalPrimeError", "SUnitBasis", "s_unit_basis", "is_s_unit", "Exponents", "decompose",
    "in_box", "enumerate_box", "solve_unit_equation", "SUnitSolution", "normalize", "beta_representatives",
    "solve_square_equation", "solve_plus_one", "criterion_A", "criterion_B", "DescentReport",
    "descent_hypotheses", "theoremC_descent", "admissible_ells",
]
