"""Exact arithmetic in quadratic fields Q(sqrt m).

Elements are stored as x + y*w with rational coordinates, where w = sqrt(m)
or w = (1 + sqrt(m))/2 when m = 1 mod 4, so (1, w) is an integral basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Optional, Union

import sympy

Rational = Union[int, Fraction]

DEFAULT_DISC_LIMIT = 10**4


def _is_squarefree(n: int) -> bool:
    return all(e == 1 for e in sympy.factorint(abs(n)).values())


def vp_rational(q: Rational, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("valuation of zero")
    v = 0
    n, d = q.numerator, q.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def kronecker(D: int, p: int) -> int:
    """Kronecker symbol (D|p) for a prime p."""
    if p == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    return int(sympy.jacobi_symbol(D % p, p))


def rational_sqrt(q: Rational) -> Optional[Fraction]:
    """Nonnegative rational square root, or None."""
    q = Fraction(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class QuadField:
    m: int

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m in (0, 1):
            raise ValueError(f"degenerate m = {self.m!r}")
        if not _is_squarefree(self.m):
            raise ValueError(f"m = {self.m} is not squarefree")

    @property
    def half_basis(self) -> bool:
        return self.m % 4 == 1

    @property
    def basis_mode(self) -> str:
        return "half" if self.half_basis else "sqrt"

    @property
    def disc(self) -> int:
        return self.m if self.half_basis else 4 * self.m

    @property
    def is_real(self) -> bool:
        return self.m > 0

    @property
    def label(self) -> str:
        """LMFDB-style field label 2.r.|disc|.1."""
        return f"2.{2 if self.is_real else 0}.{abs(self.disc)}.1"

    @property
    def min_poly(self) -> tuple[int, int, int]:
        """(c0, c1, c2) with w^2 + c1 w + c0 = 0, c2 = 1."""
        if self.half_basis:
            return ((1 - self.m) // 4, -1, 1)
        return (-self.m, 0, 1)

    def __call__(self, x: Rational = 0, y: Rational = 0) -> "FieldElement":
        return FieldElement(Fraction(x), Fraction(y), self)

    @property
    def omega(self) -> "FieldElement":
        return self(0, 1)

    @property
    def sqrt_m(self) -> "FieldElement":
        return self(-1, 2) if self.half_basis else self(0, 1)

    def from_sqrt_coords(self, X: Rational, Y: Rational) -> "FieldElement":
        """The element X + Y*sqrt(m)."""
        return self(X) + self.sqrt_m * Y

    def __repr__(self):
        return f"QuadField({self.m})"


def make_field(m: int) -> QuadField:
    return QuadField(int(m))


@dataclass(frozen=True, eq=False)
class FieldElement:
    x: Fraction
    y: Fraction
    parent: QuadField

    # coercion -----------------------------------------------------------
    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.parent != self.parent:
                raise ValueError(f"mixed parents {self.parent} and {other.parent}")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(Fraction(other), Fraction(0), self.parent)
        return NotImplemented

    # ring operations ----------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.x + o.x, self.y + o.y, self.parent)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(-self.x, -self.y, self.parent)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.x - o.x, self.y - o.y, self.parent)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        c0, c1, _ = self.parent.min_poly
        # w^2 = -c1 w - c0
        xx = self.x * o.x
        xy = self.x * o.y + self.y * o.x
        yy = self.y * o.y
        return FieldElement(xx - c0 * yy, xy - c1 * yy, self.parent)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in " + repr(self.parent))
        c = self.conjugate()
        return FieldElement(c.x / n, c.y / n, self.parent)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = self.parent(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # comparisons ---------------------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other) if isinstance(other, (FieldElement, int, Fraction)) else NotImplemented
        if o is NotImplemented:
            return NotImplemented
        return self.x == o.x and self.y == o.y

    def __hash__(self):
        if self.y == 0:
            return hash(self.x)
        return hash((self.x, self.y, self.parent.m))

    def __bool__(self):
        return bool(self.x) or bool(self.y)

    # structure -----------------------------------------------------------
    def conjugate(self) -> "FieldElement":
        if self.parent.half_basis:
            return FieldElement(self.x + self.y, -self.y, self.parent)
        return FieldElement(self.x, -self.y, self.parent)

    def norm(self) -> Fraction:
        c0, c1, _ = self.parent.min_poly
        # N(x + y w) = x^2 - c1 x y + c0 y^2
        return self.x * self.x - c1 * self.x * self.y + c0 * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x + (self.y if self.parent.half_basis else 0)

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def is_rational(self) -> bool:
        return self.y == 0

    def sqrt_coords(self) -> tuple[Fraction, Fraction]:
        """(X, Y) with self = X + Y*sqrt(m)."""
        if self.parent.half_basis:
            return self.x + self.y / 2, self.y / 2
        return self.x, self.y

    def real_sign(self) -> int:
        """Sign under the embedding sqrt(m) > 0 (real fields only)."""
        if not self.parent.is_real:
            raise ValueError("real_sign needs a real field")
        X, Y = self.sqrt_coords()
        sx = (X > 0) - (X < 0)
        sy = (Y > 0) - (Y < 0)
        if sy == 0:
            return sx
        if sx == 0 or sx == sy:
            return sy or sx
        # opposite signs: compare X^2 with m Y^2
        a, b = X * X, self.parent.m * Y * Y
        return sx if a > b else sy

    def to_float(self) -> complex | float:
        """Numeric value; diagnostics only, never used in exact paths."""
        X, Y = self.sqrt_coords()
        m = self.parent.m
        if m > 0:
            return float(X) + float(Y) * m**0.5
        return complex(float(X), float(Y) * (-m) ** 0.5)

    def coords(self) -> tuple[Fraction, Fraction]:
        return (self.x, self.y)

    def __repr__(self):
        return f"{fmt_rational(self.x)}+{fmt_rational(self.y)}*w" if self.y else fmt_rational(self.x)

    __str__ = __repr__


def fmt_rational(q: Rational) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# primes


@dataclass(frozen=True)
class PrimeIdeal:
    field: QuadField
    p: int
    e: int
    f: int
    index: int
    root: Optional[int] = None  # root of the minimal polynomial of w mod p (degree-1 primes)
    gen: Optional[FieldElement] = field(default=None, compare=False)

    @property
    def norm(self) -> int:
        return self.p**self.f

    @property
    def label(self) -> str:
        return f"{self.norm}.{self.index}"

    @property
    def kind(self) -> str:
        if self.e == 2:
            return "ramified"
        return "inert" if self.f == 2 else "split"

    @property
    def gens(self) -> tuple[FieldElement, ...]:
        """Two-element generating pair (p, w - r), or (p,) when inert."""
        K = self.field
        if self.f == 2:
            return (K(self.p),)
        return (K(self.p), K.omega - self.root)

    def __repr__(self):
        return f"PrimeIdeal({self.field.m}, {self.label}, {self.kind})"


def _roots_mod_p(K: QuadField, p: int) -> list[int]:
    c0, c1, _ = K.min_poly
    return [r for r in range(p) if (r * r + c1 * r + c0) % p == 0] if p < 2000 else _roots_sympy(K, p)


def _roots_sympy(K: QuadField, p: int) -> list[int]:
    c0, c1, _ = K.min_poly
    if p == 2:
        return [r for r in range(2) if (r * r + c1 * r + c0) % 2 == 0]
    inv2 = pow(2, -1, p)
    return sorted({(-c1 + s) * inv2 % p for s in sympy.sqrt_mod(c1 * c1 - 4 * c0, p, all_roots=True)})


def _hensel_root(K: QuadField, r: int, p: int, n: int) -> int:
    """Lift a simple root r of the minimal polynomial of w from mod p to mod p^n."""
    c0, c1, _ = K.min_poly
    mod = p
    while mod < p**n:
        mod = min(mod * mod, p**n)
        f = r * r + c1 * r + c0
        df = 2 * r + c1
        r = (r - f * pow(df, -1, mod)) % mod
    return r % p**n


@lru_cache(maxsize=None)
def split_prime(K: QuadField, p: int) -> tuple[PrimeIdeal, ...]:
    if not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    k = kronecker(K.disc, p)
    if k == -1:
        return (PrimeIdeal(K, p, 1, 2, 1, None, K(p)),)
    roots = _roots_mod_p(K, p)
    if k == 0:
        P = PrimeIdeal(K, p, 2, 1, 1, roots[0])
        return (_with_gen(P),)
    return tuple(_with_gen(PrimeIdeal(K, p, 1, 1, i + 1, r)) for i, r in enumerate(sorted(roots)))


GENERATOR_SEARCH_LIMIT = 2000


def _with_gen(P: PrimeIdeal) -> PrimeIdeal:
    """Attach a generator for small p; larger primes get theirs on demand via find_generator."""
    g = find_generator(P) if P.p < GENERATOR_SEARCH_LIMIT else None
    return PrimeIdeal(P.field, P.p, P.e, P.f, P.index, P.root, g)


def find_generator(P: PrimeIdeal, radius: int = 200) -> Optional[FieldElement]:
    """Bounded search for pi with (pi) = P; None if not found (P may be non-principal)."""
    K = P.field
    if P.f == 2:
        return K(P.p)
    target = P.norm
    for R in range(0, radius + 1):
        for y in range(0, R + 1):
            for x in {R, -R} if y < R else range(-R, R + 1):
                if y == 0 and x <= 0:
                    continue
                g = K(x, y)
                if abs(g.norm()) == target and valuation(g, P) == 1:
                    return g
        if not K.is_real and R * R > 8 * target + 8:
            break
    return None


def primes_above(K: QuadField, p: int) -> tuple[PrimeIdeal, ...]:
    return split_prime(K, p)


def primes_up_to(K: QuadField, bound: int) -> list[PrimeIdeal]:
    """All primes of K with norm < bound, sorted by (norm, index)."""
    out = []
    for p in sympy.primerange(2, bound):
        out.extend(P for P in split_prime(K, p) if P.norm < bound)
    return sorted(out, key=lambda P: (P.norm, P.index))


def prime_by_label(K: QuadField, label: str) -> PrimeIdeal:
    n, i = (int(s) for s in label.split("."))
    p = sympy.primefactors(n)
    if len(p) != 1:
        raise ValueError(f"bad prime label {label}")
    for P in split_prime(K, p[0]):
        if P.label == label:
            return P
    raise ValueError(f"no prime with label {label} in {K}")


def valuation(e: FieldElement | Rational, P: PrimeIdeal) -> int:
    K = P.field
    if not isinstance(e, FieldElement):
        e = K(e)
    if e.parent != K:
        raise ValueError("element and prime live in different fields")
    if not e:
        raise ValueError("valuation of zero")
    p = P.p
    k = min(vp_rational(c, p) for c in (e.x, e.y) if c)
    xs, ys = e.x / Fraction(p) ** k, e.y / Fraction(p) ** k
    if P.f == 2:
        return k
    nv = vp_rational(FieldElement(xs, ys, K).norm(), p)
    if P.e == 2:
        return 2 * k + (1 if nv > 0 else 0)
    if nv == 0:
        return k
    n = nv + 1
    mod = p**n
    r = _hensel_root(K, P.root, p, n)
    val = (xs.numerator * pow(xs.denominator, -1, mod) + ys.numerator * pow(ys.denominator, -1, mod) * r) % mod
    w = 0
    while val % p == 0 and w < n:
        val //= p
        w += 1
    return k + w


def support(e: FieldElement) -> list[PrimeIdeal]:
    """Primes P with v_P(e) != 0."""
    K = e.parent
    n = e.norm()
    ps = set(sympy.primefactors(n.numerator)) | set(sympy.primefactors(n.denominator))
    for c in (e.x, e.y):
        ps |= set(sympy.primefactors(c.denominator))
    return [P for p in sorted(ps) for P in split_prime(K, p) if valuation(e, P) != 0]


def coprime(a: FieldElement, b: FieldElement) -> bool:
    """True when the ideals (a) and (b) share no prime (both assumed integral and nonzero)."""
    K = a.parent

    def height(e: FieldElement) -> int:
        n = e.norm()
        h = abs(n.numerator) * n.denominator
        for c in (e.x, e.y):
            h *= c.denominator
        return h

    # a shared prime divides both heights, so only the gcd needs factoring
    g = gcd(height(a), height(b))
    for p in sympy.primefactors(g):
        for P in split_prime(K, p):
            if valuation(a, P) and valuation(b, P):
                return False
    return True


# ---------------------------------------------------------------------------
# units and class numbers


@lru_cache(maxsize=None)
def fundamental_unit(K: QuadField) -> FieldElement:
    """Fundamental unit > 1, from convergents of the continued fraction of theta.

    theta = w (sqrt basis) or w - 1 = (sqrt(m) - 1)/2 (half basis); the state
    (P + sqrt(D))/Q is kept in exact integers with Q > 0.
    """
    if not K.is_real:
        raise ValueError("imaginary field has no fundamental unit")
    D = K.m
    P, Q = (-1, 2) if K.half_basis else (0, 1)
    s = isqrt(D)
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    while True:
        a = (P + s) // Q
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        u = _conv_unit(K, h1, k1)
        if u is not None:
            return u
        P = a * Q - P
        Q = (D - P * P) // Q


def _conv_unit(K: QuadField, h: int, k: int) -> Optional[FieldElement]:
    # theta = w (sqrt basis) or w - 1 (half basis); convergent h/k ~ theta
    if K.half_basis:
        cand = K(h + k, -k)  # h - k*(w - 1)
    else:
        cand = K(h, -k)  # h - k*w
    if abs(cand.norm()) != 1:
        return None
    # normalise to the unit > 1
    for u in (cand, -cand, cand.conjugate(), -cand.conjugate()):
        if u.real_sign() > 0 and (u - 1).real_sign() > 0:
            return u
    return None


def _reduced_forms_negative(D: int) -> int:
    count = 0
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, abs(b)), c) != 1:
                continue
            count += 1
        a += 1
    return count


def _rho(form: tuple[int, int, int], D: int) -> tuple[int, int, int]:
    """Reduction operator: (a, b, c) -> (c, b', *) with b' = -b mod 2|c| and
    sqrt(D) - 2|c| < b' < sqrt(D)."""
    _, b, c = form
    s = isqrt(D)
    m2 = 2 * abs(c)
    r = (-b) % m2
    bb = r + m2 * ((s - r) // m2)
    return (c, bb, (bb * bb - D) // (4 * c))


def _is_reduced_indef(form: tuple[int, int, int], D: int) -> bool:
    a, b, c = form
    s = isqrt(D)
    # 0 < b < sqrt D and sqrt D - b < 2|a| < sqrt D + b
    if not (0 < b and b * b < D):
        return False
    lo = s - b  # sqrt D - b lies in (lo, lo+1)
    return lo < 2 * abs(a) and (2 * abs(a) <= s + b)


def _narrow_class_number_positive(D: int) -> int:
    """Number of rho-cycles of reduced primitive forms of discriminant D > 0."""
    s = isqrt(D)
    reduced = []
    for b in range(1, s + 1):
        if (b * b - D) % 4:
            continue
        if b * b >= D:
            continue
        ac = (b * b - D) // 4
        for a in range(1, s + b + 1):
            if ac % a:
                continue
            for sa in (a, -a):
                c = ac // sa
                f = (sa, b, c)
                if gcd(gcd(a, b), abs(c)) != 1:
                    continue
                if _is_reduced_indef(f, D):
                    reduced.append(f)
    seen: set = set()
    cycles = 0
    for f in reduced:
        if f in seen:
            continue
        cycles += 1
        g = f
        while g not in seen:
            seen.add(g)
            g = _rho(g, D)
    return cycles


def class_numbers(K: QuadField, limit: int = DEFAULT_DISC_LIMIT) -> tuple[int, int]:
    """(h, h_plus). h_plus is the narrow class number."""
    D = K.disc
    if abs(D) > limit:
        raise ValueError(f"|disc| = {abs(D)} exceeds limit {limit}")
    if D < 0:
        h = _reduced_forms_negative(D)
        return h, h
    h_plus = _narrow_class_number_positive(D)
    if fundamental_unit(K).norm() == -1:
        return h_plus, h_plus
    return h_plus // 2, h_plus


def torsion_units(K: QuadField) -> list[FieldElement]:
    """Roots of unity of K, listed as powers of a generator."""
    if K.m == -3:
        z = K.omega  # primitive 6th root of unity
    elif K.m == -1:
        z = K.omega  # i
    else:
        return [K(1), K(-1)]
    out, u = [], K(1)
    while True:
        out.append(u)
        u = u * z
        if u == 1:
            return out


# ---------------------------------------------------------------------------
# square roots


def sqrt_in_field(e: FieldElement) -> Optional[FieldElement]:
    """gamma with gamma^2 = e, or None if e is not a square in K."""
    K = e.parent
    if not e:
        return K(0)
    X, Y = e.sqrt_coords()
    n = rational_sqrt(X * X - K.m * Y * Y)
    if n is None:
        return None
    cands = []
    if Y == 0:
        r = rational_sqrt(X)
        if r is not None:
            cands.append(K.from_sqrt_coords(r, 0))
        r = rational_sqrt(X / K.m)
        if r is not None:
            cands.append(K.from_sqrt_coords(0, r))
    for s in (n, -n):
        U = rational_sqrt((X + s) / 2)
        if U:
            cands.append(K.from_sqrt_coords(U, Y / (2 * U)))
    for g in cands:
        if g * g == e:
            return _canonical_sign(g)
    return None


def _canonical_sign(g: FieldElement) -> FieldElement:
    return g if (g.x, g.y) >= ((-g).x, (-g).y) else -g


def ideals_of_norm(K: QuadField, n: int) -> int:
    """Number of integral ideals of norm n."""
    total = 1
    for p, k in sympy.factorint(n).items():
        Ps = split_prime(K, p)
        if len(Ps) == 2:
            total *= k + 1
        elif Ps[0].f == 2:
            total *= 1 if k % 2 == 0 else 0
        else:
            total *= 1
    return total
