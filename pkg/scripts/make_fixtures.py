"""Regenerate the shipped newform fixtures.

Every fixture form is the base change to K of a classical newform on
Gamma0(N), where N is the product of the rational primes under the level
(all levels are squarefree products of ramified or inert primes, so Steinberg
components stay Steinberg of conductor exponent 1). Eigenvalues:

  split or ramified q above p:  a_q = a_p
  inert q = (p):                a_q = a_p^2 - 2p

When K is real with h = 1 and h+ = 2, the narrow genus character psi
(psi(q) = sign N(pi) for q = (pi)) is unramified at every finite prime, so
BC(f) x psi is a second newform of the same level; it is added as well.

Forms not arising this way are absent: each fixture carries `complete` and
the published form count in its metadata.

Usage: python scripts/make_fixtures.py [--out DIR] [--check]
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent))

from classical_newforms import NewformSpace, count_points_ap  # noqa: E402

from freyelim.freycurve import Signature, WeierstrassModel  # noqa: E402
from freyelim.newforms import EIGEN_NORM_BOUND, Kind, NewformRecord, HeckeField, fixture_path, save_fixture  # noqa: E402
from freyelim.quadfield import class_numbers, make_field, primes_up_to  # noqa: E402
from freyelim.eliminate import frey_levels  # noqa: E402

# Cremona models of the rational newforms used here, verified below by point counts.
CURVES = {
    11: (0, -1, 1, -10, -20),
    14: (1, 0, 1, 4, -6),
    15: (1, 1, 1, -10, -10),
    19: (0, 1, 1, -9, -15),
    42: (1, 1, 1, -4, 5),
    43: (0, 1, 1, 0, 0),
}

# (m, signature, level name) -> published number of newforms at that level
PUBLISHED_COUNTS = {
    (-3, "D"): 0, (-3, "PD"): 0,
    (-11, "D"): 1, (-11, "PD"): 0,
    (3, "D"): 0, (3, "PD"): 0,
    (5, "D"): 0, (5, "PD"): 0,
    (11, "D"): 2, (11, "PD"): 2,
    (13, "D"): 1, (13, "PD"): 2,
    (19, "D"): 4, (19, "PD"): 10,
    (29, "D"): 3, (29, "PD"): 5,
    (2, "D"): 0, (2, "LD"): 0,
    (5, "LD"): 1,
    (14, "D"): 4, (14, "LD"): 10,
}

# Curve classes over Q(sqrt 14) of conductor norm 14; which one is BC(14a) is not pinned down.
CURVE_LABELS_14 = ("2.2.56-14.1-a", "2.2.56-14.1-b")

CASES = [
    (-3, Signature.PPQ2_EFFECTIVE),
    (-11, Signature.PPQ2_EFFECTIVE),
    (-19, Signature.PPQ2_EFFECTIVE),
    (-43, Signature.PPQ2_EFFECTIVE),
    (3, Signature.PPQ2_EFFECTIVE),
    (5, Signature.PPQ2_EFFECTIVE),
    (11, Signature.PPQ2_EFFECTIVE),
    (13, Signature.PPQ2_EFFECTIVE),
    (19, Signature.PPQ2_EFFECTIVE),
    (29, Signature.PPQ2_EFFECTIVE),
    (2, Signature.PPQ3_APPENDIX),
    (5, Signature.PPQ3_APPENDIX),
    (14, Signature.PPQ3_APPENDIX),
]


def verify_curve(N: int, space: NewformSpace) -> None:
    ainvs = CURVES[N]
    for p in (3, 5, 7, 11, 13, 17, 19, 23):
        if N % p == 0:
            continue
        ap = count_points_ap(ainvs, p)
        rational = [i for i, f in enumerate(space.orbits) if f.degree() == 1]
        if not any(space.eigenvalue(i, p) == [Fraction(ap)] for i in rational):
            raise AssertionError(f"curve {ainvs} does not match level {N} at p = {p}")


def _twist_curve(K, ainvs, D: int):
    """Quadratic twist by D of a rational curve, as a short model over K."""
    a1, a2, a3, a4, a6 = ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    c4 = b2 * b2 - 24 * b4
    c6 = -b2**3 + 36 * b2 * b4 - 216 * b6
    return WeierstrassModel.from_ainvs(K, (0, 0, 0, -27 * c4 * D * D, -54 * c6 * D**3))


def genus_sign(q) -> int:
    if q.f == 2:
        return 1
    g = q.gen
    if g is None:
        raise RuntimeError(f"no generator for {q}")
    return 1 if g.norm() > 0 else -1


def genus_discriminant(K) -> int:
    """A negative fundamental discriminant D with K(sqrt D) the narrow genus field."""
    for D in (-4, -3, -7, -8, -11, -19, -43):
        if K.disc % abs(D) == 0 and (K.disc // D) % 4 in (0, 1):
            return D
    raise RuntimeError(f"no genus discriminant for {K}")


def base_change_records(K, level, kind, space: NewformSpace, N: int) -> list[NewformRecord]:
    lp = {P.label for P in level.primes}
    qs = [q for q in primes_up_to(K, EIGEN_NORM_BOUND) if q.label not in lp]
    h, hplus = class_numbers(K)
    twist = K.is_real and h == 1 and hplus == 2
    out = []
    for i, f in enumerate(space.orbits):
        poly = tuple(int(c) for c in reversed(f.all_coeffs()))
        F = HeckeField(poly)
        eig = {}
        for q in qs:
            ap = space.eigenvalue(i, q.p)
            if q.f == 2:
                sq = F.mul(F.element(ap), F.element(ap))
                eig[q.label] = F.sub(sq, F.const(2 * q.p))
            else:
                eig[q.label] = F.element(ap)
        if F.degree > 1 and all(not any(v[1:]) for v in eig.values()):
            raise AssertionError(f"base change of orbit {i} at level {N} has a smaller Hecke field")
        letter = chr(ord("a") + i)
        base = f"{K.label}-{level.label}-bc{N}{letter}"
        prov = f"base change of the level {N} classical newform orbit {letter} (trace formula)"
        curve = None
        if F.degree == 1 and N in CURVES and i == _curve_orbit(space, N):
            curve = WeierstrassModel.from_ainvs(K, CURVES[N])
        labels = CURVE_LABELS_14 if (K.m == 14 and N == 14 and curve is not None) else ()
        out.append(NewformRecord(K, level.label, level.norm, kind, F, eig, base, None, curve, labels, prov,
                                 {}, tuple(sorted(lp))))
        if twist:
            teig = {k: tuple(genus_sign(q) * c for c in eig[k]) for k, q in ((q.label, q) for q in qs)}
            if teig == eig:
                raise AssertionError("genus twist coincides with the form")
            tcurve = _twist_curve(K, CURVES[N], genus_discriminant(K)) if curve is not None else None
            out.append(NewformRecord(K, level.label, level.norm, kind, F, teig, base + "-tw", None, tcurve, labels,
                                     prov + ", twisted by the narrow genus character", {}, tuple(sorted(lp))))
    return out


def _curve_orbit(space: NewformSpace, N: int) -> int:
    ainvs = CURVES[N]
    for i, f in enumerate(space.orbits):
        if f.degree() == 1 and all(
            space.eigenvalue(i, p) == [Fraction(count_points_ap(ainvs, p))] for p in (3, 5, 7, 11, 13) if N % p
        ):
            return i
    raise AssertionError(f"no orbit matches the curve of level {N}")


def build_all(out_dir: Path | None = None) -> list[Path]:
    written = []
    for m, sig in CASES:
        K = make_field(m)
        kind = Kind.HILBERT if K.is_real else Kind.BIANCHI
        for level in frey_levels(K, sig):
            N = 1
            for P in level.primes:
                N *= P.p
            space = NewformSpace(N)
            if N in CURVES:
                verify_curve(N, space)
            recs = base_change_records(K, level, kind, space, N)
            published = PUBLISHED_COUNTS.get((m, level.name))
            meta = {
                "construction": "base change of classical newforms of level %d" % N
                + (" and their narrow genus twists" if any(r.label.endswith("-tw") for r in recs) else ""),
                "classical_level": N,
                "level_name": level.name,
                "published_form_count": published,
                "complete": published is not None and published == len(recs),
            }
            path = fixture_path(K.label, level.label, kind)
            if out_dir is not None:
                path = out_dir / path.name
            save_fixture(path, recs, base_field=K.label, level=level.label, level_norm=level.norm, kind=kind,
                         meta=meta, level_primes=sorted(P.label for P in level.primes))
            written.append(path)
            print(f"{K.label} {level.name}={level.label}: {len(recs)} forms (published {published})")
    return written


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=None, help="write here instead of the package data dir")
    args = ap.parse_args(argv)
    build_all(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
