"""Classical weight-2 newforms on Gamma0(N) from the Eichler-Selberg trace formula.

Offline tool used to build the shipped fixtures. Galois orbits are split by
diagonalising a Hecke operator T_{p0} with squarefree characteristic
polynomial; each T_q is then recovered as a polynomial in T_{p0} from traces
alone (a Hankel system), so no modular symbols are needed.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

import sympy

X = sympy.Symbol("x")


def psi(N: int) -> Fraction:
    r = Fraction(N)
    for p in sympy.factorint(N):
        r *= Fraction(p + 1, p)
    return r


@lru_cache(maxsize=None)
def class_number_forms(D: int) -> int:
    """Number of primitive reduced forms of discriminant D < 0."""
    count, a = 0, 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or (c == a and b < 0) or gcd(gcd(a, abs(b)), c) != 1:
                continue
            count += 1
        a += 1
    return count


def hurwitz_weight(D: int) -> Fraction:
    if D == -3:
        return Fraction(1, 3)
    if D == -4:
        return Fraction(1, 2)
    return Fraction(class_number_forms(D))


def _mu(t: int, f: int, n: int, N: int) -> Fraction:
    Nf = gcd(N, f)
    M = N * Nf
    cnt = sum(1 for x in range(M) if (x * x - t * x + n) % M == 0)
    return psi(N) / psi(N // Nf) * Fraction(cnt, Nf)


@lru_cache(maxsize=None)
def trace(n: int, N: int) -> Fraction:
    """Trace of T_n on S_2(Gamma0(N)), gcd(n, N) = 1."""
    A1 = psi(N) / 12 if isqrt(n) ** 2 == n else Fraction(0)
    A2 = Fraction(0)
    r = isqrt(4 * n)
    for t in range(-r - 1, r + 2):
        D = t * t - 4 * n
        if D >= 0:
            continue
        f = 1
        while f * f <= -D:
            if D % (f * f) == 0 and (D // (f * f)) % 4 in (0, 1):
                A2 += hurwitz_weight(D // (f * f)) * _mu(t, f, n, N)
            f += 1
    A2 = -A2 / 2
    A3 = Fraction(0)
    for d in sympy.divisors(n):
        s = 0
        for tau in sympy.divisors(N):
            g = gcd(tau, N // tau)
            if (n // d - d) % g == 0:
                s += int(sympy.totient(g))
        A3 += min(d, n // d) * s
    A3 = -A3 / 2
    A4 = sum(t for t in sympy.divisors(n) if gcd(N, n // t) == 1)
    return A1 + A2 + A3 + A4


def _beta(m: int) -> int:
    r = 1
    for _, e in sympy.factorint(m).items():
        r *= {1: -2, 2: 1}.get(e, 0)
    return r


def trace_new(n: int, N: int) -> Fraction:
    """Trace of T_n on the new subspace."""
    return sum((_beta(N // M) * trace(n, M) for M in sympy.divisors(N)), Fraction(0))


def _power_coeffs(p: int, k: int) -> dict[int, int]:
    """T_p^k = sum_j c_j T_{p^j} (p not dividing the level)."""
    cur = {0: 1}
    for _ in range(k):
        nxt: dict[int, int] = {}
        for j, c in cur.items():
            nxt[j + 1] = nxt.get(j + 1, 0) + c
            if j > 0:
                nxt[j - 1] = nxt.get(j - 1, 0) + p * c
        cur = nxt
    return cur


def _trace_prod(q: int, p0: int, k: int, N: int) -> Fraction:
    """trace_new(T_q T_{p0}^k) for q coprime to p0 (q may be 1)."""
    return sum((c * trace_new(q * p0**j, N) for j, c in _power_coeffs(p0, k).items()), Fraction(0))


class NewformSpace:
    """Galois orbits of newforms of level N with eigenvalues as polynomials in T_{p0}."""

    def __init__(self, N: int):
        self.N = N
        self.dim = int(trace_new(1, N))
        self.orbits: list[sympy.Poly] = []
        if self.dim == 0:
            return
        for p0 in sympy.primerange(3, 200):
            if N % p0 == 0:
                continue
            s = [_trace_prod(1, p0, k, N) for k in range(2 * self.dim)]
            cp = _char_poly_from_power_sums(s, self.dim)
            if sympy.gcd(cp, cp.diff(X)).degree() == 0:
                break
        else:
            raise RuntimeError(f"no squarefree Hecke polynomial at level {N}")
        self.p0 = p0
        self.power_sums = s
        self.char_poly = cp
        self.orbits = [sympy.Poly(f, X) for f, _ in sympy.factor_list(cp.as_expr())[1]]
        self.orbits.sort(key=lambda f: (f.degree(), [abs(c) for c in f.all_coeffs()], f.all_coeffs()))
        self._H = sympy.Matrix(self.dim, self.dim, lambda i, j: sympy.Rational(s[i + j].numerator, s[i + j].denominator))

    def eigenvalue_poly(self, q: int) -> sympy.Poly:
        """R with a_q = R(theta), theta = eigenvalue of T_{p0} (q prime, q not dividing N)."""
        if q == self.p0:
            return sympy.Poly(X, X)
        rhs = sympy.Matrix(self.dim, 1, lambda k, _: _rat(_trace_prod(q, self.p0, k, self.N)))
        r = self._H.LUsolve(rhs)
        return sympy.Poly(sum(r[i] * X**i for i in range(self.dim)), X)

    def eigenvalue(self, orbit: int, q: int) -> list[Fraction]:
        """a_q for the given orbit as ascending coordinates in Q[x]/(orbit poly)."""
        f = self.orbits[orbit]
        R = self.eigenvalue_poly(q).rem(f)
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(R.all_coeffs())]
        return coeffs + [Fraction(0)] * (f.degree() - len(coeffs))


def _rat(q: Fraction):
    return sympy.Rational(q.numerator, q.denominator)


def _char_poly_from_power_sums(s: list[Fraction], d: int) -> sympy.Poly:
    e = [Fraction(1)]
    for k in range(1, d + 1):
        e.append(sum(((-1) ** (i - 1) * e[k - i] * s[i] for i in range(1, k + 1)), Fraction(0)) / k)
    return sympy.Poly(sum((-1) ** k * _rat(e[k]) * X ** (d - k) for k in range(d + 1)), X)


def count_points_ap(ainvs: tuple[int, ...], p: int) -> int:
    """a_p = p + 1 - #E(F_p) by brute force (good reduction assumed)."""
    a1, a2, a3, a4, a6 = (a % p for a in ainvs)
    n = 1
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0:
                n += 1
    return p + 1 - n
