"""Random exact solution triples for the three Frey signatures (test helper)."""

from __future__ import annotations

import random

from freyelim.freycurve import Signature, SolutionTriple, build_frey
from freyelim.quadfield import make_field, split_prime, valuation

FIELDS = (-3, -11, -19, 2, 3, 5, 13)


def _elem(rng, K, r=6, nonzero=True):
    while True:
        z = K(rng.randint(-r, r), rng.randint(-r, r))
        if z or not nonzero:
            return z


def _odd(K, z) -> bool:
    return all(valuation(z, P) == 0 for P in split_prime(K, 2))


def random_triple(rng: random.Random, signature: Signature, *, primes=(3, 5, 7), fields=FIELDS) -> SolutionTriple:
    """A triple satisfying its equation exactly, with a valid Frey curve.

    One coefficient is solved for (C for the general signature, d otherwise),
    so every other coordinate can be drawn freely.
    """
    while True:
        K = make_field(rng.choice(fields))
        p = rng.choice(primes)
        a, b, c = _elem(rng, K), _elem(rng, K), _elem(rng, K, 3)
        try:
            if signature is Signature.PPQ2_GENERAL:
                A = K(rng.choice([1, 3, 5, 7, -1, -3]))
                B = K(rng.choice([1, 5, 11, -7, 13]))
                C = (A * a**p + B * b**p) / (c * c)
                if not C:
                    continue
                t = SolutionTriple(signature, K, a, b, c, p, A=A, B=B, C=C)
            else:
                rhs = c * c if signature is Signature.PPQ2_EFFECTIVE else c**3
                d = (rhs - a**p) / b**p
                if not d:
                    continue
                t = SolutionTriple(signature, K, a, b, c, p, d=d)
            build_frey(t)
        except (ValueError, ZeroDivisionError):
            continue
        return t


def random_triple_2b(rng: random.Random, signature: Signature, *, primes=(5, 7, 11, 13),
                     fields=FIELDS) -> SolutionTriple:
    """A triple with 2 | b and the remaining coefficient a unit above 2.

    a = s^2 and c = s^p + 2^(pk-1) u with s, u odd, b = 2^k b0, so that
    c^2 - a^p = b^p * (odd), which is then absorbed into d (or into B).
    """
    if signature is Signature.PPQ3_APPENDIX:
        raise ValueError("the (p,p,3) curve is not built over the prime above 2")
    while True:
        K = make_field(rng.choice(fields))
        p = rng.choice(primes)
        s, u, b0 = _elem(rng, K, 5), _elem(rng, K, 5), _elem(rng, K, 4)
        if not (_odd(K, s) and _odd(K, u) and _odd(K, b0)):
            continue
        k = rng.choice([1, 1, 2])
        a, b = s * s, 2**k * b0
        c = s**p + 2 ** (p * k - 1) * u
        rest = (c * c - a**p) / b**p
        if not rest or not _odd(K, rest):
            continue
        try:
            if signature is Signature.PPQ2_GENERAL:
                t = SolutionTriple(signature, K, a, b, c, p, A=K(1), B=rest, C=K(1))
            else:
                t = SolutionTriple(signature, K, a, b, c, p, d=rest)
            build_frey(t)
        except (ValueError, ZeroDivisionError):
            continue
        return t


def _unit_at(K, z, ell) -> bool:
    return all(valuation(z, P) == 0 for P in split_prime(K, ell))


def random_triple_3b(rng: random.Random, *, primes=(5, 7, 11, 13), fields=(2, 5, 14, -1, 11)) -> SolutionTriple:
    """(p,p,3) triple with 3 | b and d a unit above 3: a = s^3, c = s^p + 3^(pk-1) u."""
    while True:
        K = make_field(rng.choice(fields))
        p = rng.choice(primes)
        s, u, b0 = _elem(rng, K, 5), _elem(rng, K, 5), _elem(rng, K, 4)
        if not all(_unit_at(K, z, 3) for z in (s, u, b0)):
            continue
        k = rng.choice([1, 1, 2])
        a, b = s**3, 3**k * b0
        c = s**p + 3 ** (p * k - 1) * u
        d = (c**3 - a**p) / b**p
        if not d or not _unit_at(K, d, 3):
            continue
        try:
            t = SolutionTriple(Signature.PPQ3_APPENDIX, K, a, b, c, p, d=d)
            build_frey(t)
        except (ValueError, ZeroDivisionError):
            continue
        return t
