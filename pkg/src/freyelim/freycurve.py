"""Frey curves attached to solutions of Ax^p + By^p = Cz^2 and x^p + dy^p = z^3."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import sympy

from .quadfield import FieldElement, PrimeIdeal, QuadField, coprime, split_prime, valuation

Coeff = Union[int, FieldElement]


class Signature(enum.Enum):
    PPQ2_GENERAL = "ppq2-general"
    PPQ2_EFFECTIVE = "ppq2-effective"
    PPQ3_APPENDIX = "ppq3"

    @classmethod
    def parse(cls, s: str) -> "Signature":
        for sig in cls:
            if s in (sig.value, sig.name):
                return sig
        raise ValueError(f"unknown signature {s!r}")

    @property
    def torsion_t(self) -> int:
        return 3 if self is Signature.PPQ3_APPENDIX else 2


class Reduction(enum.Enum):
    GOOD = "good"
    MULTIPLICATIVE = "multiplicative"
    ADDITIVE_BOUNDED = "additive-bounded"
    POTENTIALLY_MULTIPLICATIVE_FLAG = "potentially-multiplicative"


class LemmaHypothesisError(ValueError):
    """The lemma needed for a local conclusion does not apply to this input."""


@dataclass(frozen=True)
class SolutionTriple:
    signature: Signature
    field: QuadField
    a: FieldElement
    b: FieldElement
    c: FieldElement
    p: int
    A: FieldElement = None
    B: FieldElement = None
    C: FieldElement = None
    d: FieldElement = None

    def __post_init__(self):
        K = self.field
        for name in ("a", "b", "c", "A", "B", "C", "d"):
            v = getattr(self, name)
            if v is None:
                v = 1 if name in ("A", "B", "C", "d") else 0
            if not isinstance(v, FieldElement):
                v = K(v)
            elif v.parent != K:
                raise ValueError(f"{name} lives in {v.parent}, expected {K}")
            object.__setattr__(self, name, v)
        if self.p < 3 or not sympy.isprime(self.p):
            raise ValueError(f"p = {self.p} must be an odd prime")

    @classmethod
    def make(cls, signature, field, a, b, c, p, **coeffs) -> "SolutionTriple":
        if isinstance(signature, str):
            signature = Signature.parse(signature)
        return cls(signature, field, a, b, c, p, **coeffs)

    def lhs_rhs(self) -> tuple[FieldElement, FieldElement]:
        a, b, c, p = self.a, self.b, self.c, self.p
        if self.signature is Signature.PPQ2_GENERAL:
            return self.A * a**p + self.B * b**p, self.C * c * c
        if self.signature is Signature.PPQ2_EFFECTIVE:
            return a**p + self.d * b**p, c * c
        return a**p + self.d * b**p, c**3

    def satisfies_equation(self) -> bool:
        lhs, rhs = self.lhs_rhs()
        return lhs == rhs

    def is_trivial(self) -> bool:
        return not (self.a and self.b and self.c)

    def is_primitive(self) -> bool:
        """(a, d*b, c) pairwise coprime (effective signatures) or (Aa, Bb, Cc) for the general one."""
        if self.signature is Signature.PPQ2_GENERAL:
            xs = [self.A * self.a, self.B * self.b, self.C * self.c]
        else:
            xs = [self.a, self.d * self.b, self.c]
        return all(coprime(xs[i], xs[j]) for i in range(3) for j in range(i + 1, 3))


@dataclass(frozen=True)
class WeierstrassModel:
    a1: FieldElement
    a2: FieldElement
    a3: FieldElement
    a4: FieldElement
    a6: FieldElement

    @classmethod
    def from_ainvs(cls, K: QuadField, ainvs) -> "WeierstrassModel":
        return cls(*(v if isinstance(v, FieldElement) else K(v) for v in ainvs))

    @property
    def field(self) -> QuadField:
        return self.a1.parent

    @property
    def ainvs(self) -> tuple[FieldElement, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)


@dataclass(frozen=True)
class InvariantSet:
    b2: FieldElement
    b4: FieldElement
    b6: FieldElement
    b8: FieldElement
    c4: FieldElement
    c6: FieldElement
    delta: FieldElement
    j: Optional[FieldElement]


@dataclass(frozen=True)
class LocalReductionData:
    prime: PrimeIdeal
    v_c4: Optional[int]  # None when c4 = 0
    v_c6: Optional[int]
    v_delta: int
    v_j: Optional[int]
    reduction: Reduction
    cond_exp_lo: int
    cond_exp_hi: int


def build_frey(triple: SolutionTriple) -> WeierstrassModel:
    if triple.is_trivial():
        raise ValueError("trivial solution (abc = 0)")
    if not triple.satisfies_equation():
        raise ValueError("triple does not satisfy its equation")
    K, a, b, c, p = triple.field, triple.a, triple.b, triple.c, triple.p
    zero = K(0)
    if triple.signature is Signature.PPQ2_GENERAL:
        A, B, C = triple.A, triple.B, triple.C
        for x, y in ((A, B), (A, C), (B, C)):
            if not coprime(x, y):
                raise ValueError("A, B, C must be pairwise coprime")
        if any(valuation(x, P) > 0 for x in (A, B, C) for P in split_prime(K, 2)):
            raise ValueError("A, B, C must be odd")
        return WeierstrassModel(zero, 2 * C * c, zero, B * C * b**p, zero)
    if triple.signature is Signature.PPQ2_EFFECTIVE:
        d = triple.d
        return WeierstrassModel(K(1), (c - 1) / 4, zero, d * b**p / 64, zero)
    d = triple.d
    return WeierstrassModel(3 * c, zero, d * b**p, zero, zero)


def invariants(model: WeierstrassModel) -> InvariantSet:
    a1, a2, a3, a4, a6 = model.ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2**3 + 36 * b2 * b4 - 216 * b6
    delta = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    j = c4**3 / delta if delta else None
    return InvariantSet(b2, b4, b6, b8, c4, c6, delta, j)


def closed_forms(triple: SolutionTriple) -> dict[str, FieldElement]:
    """Closed-form expressions for delta, c4, c6 and j of the Frey curve."""
    a, b, c, p = triple.a, triple.b, triple.c, triple.p
    ap, bp = a**p, b**p
    if triple.signature is Signature.PPQ2_GENERAL:
        A, B, C = triple.A, triple.B, triple.C
        return {
            "delta": 2**6 * A * B * B * C**3 * (a * b * b) ** p,
            "c4": 2**4 * C * (4 * A * ap + B * bp),
            "c6": 2**6 * C * C * c * (B * bp - 8 * A * ap),
            "j": 2**6 * (4 * A * ap + B * bp) ** 3 / (A * B * B * (a * b * b) ** p),
        }
    d = triple.d
    if triple.signature is Signature.PPQ2_EFFECTIVE:
        return {
            "delta": d * d * (a * b * b) ** p / 2**12,
            "c4": (4 * ap + d * bp) / 4,
            "c6": c * (d * bp - 8 * ap) / 8,
            "j": 2**6 * (4 * ap + d * bp) ** 3 / (d * d * (a * b * b) ** p),
        }
    return {
        "delta": 27 * d**3 * (a * b**3) ** p,
        "c4": 9 * c * (9 * ap + d * bp),
        "c6": -27 * (27 * ap * ap + 18 * ap * d * bp - d * d * bp * bp),
        "j": 27 * c**3 * (9 * ap + d * bp) ** 3 / (d**3 * (a * b**3) ** p),
    }


def check_closed_forms(triple: SolutionTriple) -> bool:
    inv = invariants(build_frey(triple))
    cf = closed_forms(triple)
    return inv.delta == cf["delta"] and inv.c4 == cf["c4"] and inv.c6 == cf["c6"] and inv.j == cf["j"]


def _v(x: FieldElement, P: PrimeIdeal) -> Optional[int]:
    return valuation(x, P) if x else None


def local_data(triple: SolutionTriple, model: WeierstrassModel, P: PrimeIdeal) -> LocalReductionData:
    inv = invariants(model)
    v4, v6, vd = _v(inv.c4, P), _v(inv.c6, P), valuation(inv.delta, P)
    vj = _v(inv.j, P) if inv.j is not None else None
    sig = triple.signature

    def out(red, lo, hi):
        return LocalReductionData(P, v4, v6, vd, vj, red, lo, hi)

    def divides(x: FieldElement) -> bool:
        return valuation(x, P) > 0

    def multiplicative():
        if v4 != 0:
            raise LemmaHypothesisError(f"expected v(c4) = 0 at {P.label}, got {v4}")
        return out(Reduction.MULTIPLICATIVE, 1, 1)

    if sig is Signature.PPQ2_GENERAL:
        if P.p == 2 or divides(triple.C):
            return out(Reduction.ADDITIVE_BOUNDED, 0, 2 + 6 * valuation(2, P))
        if divides(triple.A * triple.B * triple.a * triple.b):
            return multiplicative()
    else:
        special = 2 if sig is Signature.PPQ2_EFFECTIVE else 3
        need = 11 if sig is Signature.PPQ2_EFFECTIVE else 4
        if P.p == special:
            if not divides(triple.b):
                raise LemmaHypothesisError(f"{P.label} lies above {special} but does not divide b")
            if triple.p <= need:
                raise LemmaHypothesisError(f"needs p > {need}, got p = {triple.p}")
            return out(Reduction.POTENTIALLY_MULTIPLICATIVE_FLAG, 0, 1)
        if divides(triple.d * triple.a * triple.b):
            return multiplicative()
    if vd == 0:
        return out(Reduction.GOOD, 0, 0)
    raise LemmaHypothesisError(f"unexpected bad reduction at {P.label}")


def vj_formula(triple: SolutionTriple, P: PrimeIdeal) -> int:
    """12 v_P(2) - 2p v_P(b) at P above 2, checked against the direct valuation of j."""
    if triple.signature is Signature.PPQ3_APPENDIX:
        raise ValueError("use vj_lambda_appendix for the (p,p,3) curve")
    if P.p != 2:
        raise ValueError(f"{P.label} is not above 2")
    vb = valuation(triple.b, P)
    if vb <= 0:
        raise ValueError(f"{P.label} does not divide b")
    odd = triple.A * triple.B * triple.C * triple.d
    if valuation(odd, P) != 0:
        raise ValueError("A*B*C*d must be a P-unit")
    v2 = valuation(2, P)
    if triple.p * vb <= 2 * v2:
        raise ValueError(f"needs p*v_P(b) > 2*v_P(2), got {triple.p * vb} <= {2 * v2}")
    formula = 12 * v2 - 2 * triple.p * vb
    j = invariants(build_frey(triple)).j
    direct = valuation(j, P)
    if direct != formula:
        raise AssertionError(f"v_P(j) = {direct} but formula gives {formula}")
    return formula


def vj_lambda_appendix(triple: SolutionTriple, P: PrimeIdeal) -> int:
    """9 v_P(3) - 3p v_P(b) at P above 3 dividing b, checked against v_P(j)."""
    if triple.signature is not Signature.PPQ3_APPENDIX or P.p != 3:
        raise ValueError("needs the (p,p,3) curve and a prime above 3")
    vb = valuation(triple.b, P)
    v3 = valuation(3, P)
    if vb <= 0:
        raise ValueError(f"{P.label} does not divide b")
    if valuation(triple.d, P) != 0:
        raise ValueError("d must be a P-unit")
    if triple.p * vb <= 2 * v3:
        raise ValueError("needs p*v_P(b) > 2*v_P(3)")
    formula = 9 * v3 - 3 * triple.p * vb
    direct = valuation(invariants(build_frey(triple)).j, P)
    if direct != formula:
        raise AssertionError(f"v_P(j) = {direct} but formula gives {formula}")
    return formula


def inertia_order_p_test(v_j: int, p: int) -> bool:
    return v_j < 0 and v_j % p != 0


# ---------------------------------------------------------------------------
# lambda / mu parametrisation


def lambda_mu(a_prime: FieldElement, b_prime: FieldElement) -> tuple[FieldElement, FieldElement]:
    if not b_prime:
        raise ValueError("b' = 0")
    lam = a_prime * a_prime / b_prime
    if lam == 0 or lam == 4:
        raise ValueError(f"degenerate lambda = {lam}")
    return lam, lam - 4


def curve_from_mu(mu: FieldElement) -> WeierstrassModel:
    if mu == 0 or mu == -4:
        raise ValueError(f"degenerate mu = {mu}")
    K = mu.parent
    lam = mu + 4
    return WeierstrassModel(K(0), K(1), K(0), 1 / lam, K(0))


def lambda_of_model(model: WeierstrassModel) -> FieldElement:
    """lambda = a2^2 / a4 for a model Y^2 = X^3 + a2 X^2 + a4 X."""
    return model.a2 * model.a2 / model.a4


@dataclass(frozen=True)
class TheoremAVerdict:
    applicable: bool
    case: Optional[int]
    v_mu: int
    v_j_formula: Optional[int]
    v_j_direct: int
    contradiction: bool


def theoremA_case_analysis(mu: FieldElement, P: PrimeIdeal) -> TheoremAVerdict:
    if mu == 0 or mu == -1:
        raise ValueError("mu must avoid 0 and -1")
    v = valuation(mu, P)
    v2 = valuation(2, P)
    jp = 2**8 * (mu + 1) ** 3 / mu
    direct = valuation(jp, P)
    if not (-4 * v2 <= v <= 8 * v2):
        return TheoremAVerdict(False, None, v, None, direct, False)
    case = 1 if v == 0 else (2 if v > 0 else 3)
    formula = 8 * v2 + 3 * valuation(mu + 1, P) - v
    if formula != direct:
        raise AssertionError(f"v(j') mismatch {formula} != {direct}")
    return TheoremAVerdict(True, case, v, formula, direct, direct >= 0)
