"""Small finite fields F_q (q = p^k <= 49) as lookup tables, for trace-set oracles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import sympy


@dataclass(frozen=True)
class FiniteField:
    p: int
    k: int
    add: tuple
    mul: tuple

    @property
    def q(self) -> int:
        return self.p**self.k

    def neg(self, a: int) -> int:
        return next(b for b in range(self.q) if self.add[a][b] == 0)

    def sub(self, a: int, b: int) -> int:
        return self.add[a][self.neg(b)]

    def power(self, a: int, n: int) -> int:
        r = 1
        for _ in range(n):
            r = self.mul[r][a]
        return r


def _digits(n, p, k):
    return [(n // p**i) % p for i in range(k)]


def _undigits(ds, p):
    return sum(d * p**i for i, d in enumerate(ds))


def _irreducible(p, k):
    x = sympy.Symbol("x")
    for tail in itertools.product(range(p), repeat=k):
        coeffs = [1, *tail]
        if sympy.Poly(coeffs, x, modulus=p).is_irreducible:
            return list(reversed(coeffs))  # ascending, monic
    raise RuntimeError("no irreducible polynomial")


@lru_cache(maxsize=None)
def finite_field(q: int) -> FiniteField:
    fac = sympy.factorint(q)
    if len(fac) != 1:
        raise ValueError(f"{q} is not a prime power")
    (p, k), = fac.items()
    mod = _irreducible(p, k) if k > 1 else [0, 1]
    add = tuple(tuple(_undigits([(a + b) % p for a, b in zip(_digits(i, p, k), _digits(j, p, k))], p)
                      for j in range(q)) for i in range(q))

    def polymul(u, v):
        prod = [0] * (2 * k - 1)
        for i, a in enumerate(u):
            for j, b in enumerate(v):
                prod[i + j] = (prod[i + j] + a * b) % p
        for d in range(len(prod) - 1, k - 1, -1):
            c = prod[d]
            if c:
                for i in range(k + 1):
                    prod[d - k + i] = (prod[d - k + i] - c * mod[i]) % p
        return prod[:k]

    mul = tuple(tuple(_undigits(polymul(_digits(i, p, k), _digits(j, p, k)), p) for j in range(q)) for i in range(q))
    return FiniteField(p, k, add, mul)
