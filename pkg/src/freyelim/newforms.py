"""Newform eigenvalue data: Hecke fields, fixtures and an LMFDB client."""

from __future__ import annotations

import enum
import json
import logging
import os
import tempfile
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

import sympy

from .freycurve import WeierstrassModel
from .quadfield import QuadField, fmt_rational, make_field, primes_up_to

log = logging.getLogger(__name__)

SCHEMA = "freyelim.newforms/1"
EIGEN_NORM_BOUND = 50
LMFDB_URL_ENV = "FREYELIM_LMFDB_URL"
DEFAULT_LMFDB_URL = "https://www.lmfdb.org/api"

Coords = tuple[Fraction, ...]


class Kind(enum.Enum):
    BIANCHI = "BIANCHI"
    HILBERT = "HILBERT"


class FixtureError(ValueError):
    pass


class HasseBoundError(FixtureError):
    pass


# ---------------------------------------------------------------------------
# Hecke fields


@dataclass(frozen=True)
class HeckeField:
    defining_poly: tuple[int, ...]  # ascending coefficients, monic

    def __post_init__(self):
        f = tuple(int(c) for c in self.defining_poly)
        object.__setattr__(self, "defining_poly", f)
        if len(f) < 2:
            raise ValueError("defining polynomial must have degree >= 1")
        if f[-1] != 1:
            raise ValueError(f"defining polynomial {list(f)} is not monic")
        if len(f) > 2 and not self.sympy_poly().is_irreducible:
            raise ValueError(f"defining polynomial {list(f)} is reducible")

    @property
    def degree(self) -> int:
        return len(self.defining_poly) - 1

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    def sympy_poly(self):
        x = sympy.Symbol("x")
        return sympy.Poly(list(reversed(self.defining_poly)), x)

    def element(self, coords: Sequence) -> Coords:
        c = tuple(Fraction(v) for v in coords)
        if len(c) > self.degree:
            if any(c[self.degree :]):
                raise ValueError(f"coordinate degree overflow: {len(c)} coords for degree {self.degree}")
            c = c[: self.degree]
        return c + (Fraction(0),) * (self.degree - len(c))

    def const(self, n) -> Coords:
        return self.element([n])

    def add(self, u: Coords, v: Coords) -> Coords:
        return tuple(a + b for a, b in zip(u, v))

    def sub(self, u: Coords, v: Coords) -> Coords:
        return tuple(a - b for a, b in zip(u, v))

    def mul(self, u: Coords, v: Coords) -> Coords:
        prod = [Fraction(0)] * (len(u) + len(v) - 1)
        for i, a in enumerate(u):
            if a:
                for j, b in enumerate(v):
                    prod[i + j] += a * b
        return self.element(_poly_rem(prod, [Fraction(c) for c in self.defining_poly]))


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_rem(a: list, b: list) -> list:
    a = _trim(list(a))
    b = _trim(list(b))
    while len(a) >= len(b):
        q = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[i + shift] -= q * c
        a.pop()
        _trim(a)
    return a


def _resultant(f: list, g: list) -> Fraction:
    """Res(f, g) over Q by the Euclidean recursion."""
    f, g = _trim([Fraction(c) for c in f]), _trim([Fraction(c) for c in g])
    if not f or not g:
        return Fraction(0)
    n, m = len(f) - 1, len(g) - 1
    if m == 0:
        return g[0] ** n
    if n == 0:
        return f[0] ** m
    if n < m:
        return (-1) ** (n * m) * _resultant(g, f)
    r = _poly_rem(f, g)
    if not r:
        return Fraction(0)
    k = len(r) - 1
    return (-1) ** (n * m) * g[-1] ** (n - k) * _resultant(g, r)


def hecke_norm(F: HeckeField, e: Sequence) -> Fraction:
    """Norm from Q_f to Q; for monic f this is Res(f, e(x))."""
    coords = list(F.element(e))
    if not any(coords):
        return Fraction(0)
    return _resultant([Fraction(c) for c in F.defining_poly], coords)


# ---------------------------------------------------------------------------
# Hasse bound on every real embedding


def _interval_eval(poly: Sequence[Fraction], lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Enclosure of poly([lo, hi]) by naive interval arithmetic (Horner)."""
    rlo = rhi = Fraction(0)
    for c in reversed(poly):
        prods = (rlo * lo, rlo * hi, rhi * lo, rhi * hi)
        rlo, rhi = min(prods) + c, max(prods) + c
    return rlo, rhi


def check_hasse(F: HeckeField, coords: Coords, norm_q: int) -> bool:
    """True iff |sigma(a)| <= 2 sqrt(norm_q) for every embedding sigma (all real)."""
    c = F.element(coords)
    if not any(c[1:]):
        return c[0] * c[0] <= 4 * norm_q
    h = _poly_rem(_poly_mul(list(c), list(c)), [Fraction(v) for v in F.defining_poly])
    h = h + [Fraction(0)] * (F.degree - len(h))
    h[0] -= 4 * norm_q
    if not any(h):
        return True  # a^2 = 4N identically: boundary case, allowed
    fp = F.sympy_poly()
    ivs = fp.intervals()
    if sum(mult for _, mult in ivs) != F.degree:
        raise HasseBoundError(f"Hecke field {list(F.defining_poly)} is not totally real")
    for (lo, hi), _ in ivs:
        lo, hi = Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q))
        for _ in range(200):
            vlo, vhi = _interval_eval(h, lo, hi)
            if vhi <= 0:
                break
            if vlo > 0:
                return False
            width = (hi - lo) / 1024
            nlo, nhi = fp.refine_root(sympy.Rational(lo.numerator, lo.denominator),
                                      sympy.Rational(hi.numerator, hi.denominator),
                                      eps=sympy.Rational(width.numerator, width.denominator))
            lo, hi = Fraction(int(nlo.p), int(nlo.q)), Fraction(int(nhi.p), int(nhi.q))
        else:
            raise HasseBoundError("interval refinement did not settle the sign")
    return True


def _poly_mul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class NewformRecord:
    base_field: QuadField
    level_label: str
    level_norm: int
    kind: Kind
    hecke_field: HeckeField
    eigenvalues: dict[str, Coords]
    label: str = ""
    lmfdb_label: Optional[str] = None
    curve: Optional[WeierstrassModel] = None
    curve_labels: tuple[str, ...] = ()
    provenance: str = ""
    extra: dict = field(default_factory=dict, compare=False)
    level_primes: tuple[str, ...] = ()

    def __post_init__(self):
        F = self.hecke_field
        eig = {k: F.element(v) for k, v in self.eigenvalues.items()}
        object.__setattr__(self, "eigenvalues", eig)
        for lab, a in eig.items():
            n = int(lab.split(".")[0])
            if not check_hasse(F, a, n):
                raise HasseBoundError(f"{self.label or '?'}: eigenvalue at {lab} violates the Hasse bound")

    @property
    def is_rational(self) -> bool:
        return self.hecke_field.is_rational

    def eigenvalue(self, prime_label: str) -> Coords:
        try:
            return self.eigenvalues[prime_label]
        except KeyError:
            raise KeyError(f"form {self.label}: no eigenvalue at {prime_label}") from None


@dataclass(frozen=True)
class Fixture:
    base_field: str
    level: str
    level_norm: int
    kind: Kind
    forms: list[NewformRecord]
    meta: dict
    level_primes: tuple[str, ...] = ()


def field_from_label(label: str) -> QuadField:
    """Quadratic field from an LMFDB label 2.r.D.1."""
    parts = label.split(".")
    if len(parts) != 4 or parts[0] != "2":
        raise ValueError(f"not a quadratic field label: {label}")
    r, D = int(parts[1]), int(parts[2])
    m = D // 4 if D % 4 == 0 else D
    return make_field(m if r == 2 else -m)


def _coords_json(c: Coords) -> list[str]:
    return [fmt_rational(v) for v in c]


def _record_json(rec: NewformRecord) -> dict:
    out = {
        "label": rec.label,
        "hecke_poly": list(rec.hecke_field.defining_poly),
        "eigenvalues": {k: _coords_json(v) for k, v in sorted(rec.eigenvalues.items(), key=_label_key)},
        "lmfdb_label": rec.lmfdb_label,
        "provenance": rec.provenance,
    }
    if rec.curve is not None:
        out["curve"] = {
            "ainvs": [[fmt_rational(a.x), fmt_rational(a.y)] for a in rec.curve.ainvs],
            "labels": list(rec.curve_labels),
        }
    if rec.extra:
        out["extra"] = rec.extra
    return out


def _label_key(item) -> tuple[int, int]:
    k = item[0] if isinstance(item, tuple) else item
    n, i = k.split(".")
    return int(n), int(i)


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def fixture_json(base_field: str, level: str, level_norm: int, kind: Kind, records: Sequence[NewformRecord],
                 meta: Optional[dict] = None, level_primes: Sequence[str] = ()) -> dict:
    return {
        "schema": SCHEMA,
        "base_field": base_field,
        "level": level,
        "level_norm": level_norm,
        "level_primes": list(level_primes),
        "kind": kind.value,
        "meta": meta or {},
        "forms": [_record_json(r) for r in sorted(records, key=lambda r: r.label)],
    }


def save_fixture(path, records: Sequence[NewformRecord], *, base_field: str = None, level: str = None,
                 level_norm: int = None, kind: Kind = None, meta: Optional[dict] = None,
                 level_primes: Sequence[str] = ()) -> None:
    if records:
        r0 = records[0]
        base_field = base_field or r0.base_field.label
        level = level or r0.level_label
        level_norm = level_norm or r0.level_norm
        kind = kind or r0.kind
        level_primes = level_primes or r0.level_primes
    if base_field is None or level is None or kind is None:
        raise ValueError("empty record list needs base_field, level and kind")
    _atomic_write(Path(path), dumps_canonical(fixture_json(base_field, level, level_norm, kind, records, meta,
                                                           level_primes)))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise FixtureError(f"duplicate key {k!r}")
        out[k] = v
    return out


def parse_fixture(data: dict) -> Fixture:
    if data.get("schema") != SCHEMA:
        raise FixtureError(f"schema mismatch: {data.get('schema')!r} != {SCHEMA!r}")
    K = field_from_label(data["base_field"])
    kind = Kind(data["kind"])
    level = data["level"]
    level_norm = int(data.get("level_norm") or level.split(".")[0])
    level_primes = tuple(data.get("level_primes", ()))
    forms = []
    for i, f in enumerate(data["forms"]):
        try:
            F = HeckeField(tuple(f["hecke_poly"]))
            eig = {k: tuple(Fraction(c) for c in v) for k, v in f["eigenvalues"].items()}
            curve, labels = None, ()
            if f.get("curve"):
                curve = WeierstrassModel.from_ainvs(K, [K(Fraction(x), Fraction(y)) for x, y in f["curve"]["ainvs"]])
                labels = tuple(f["curve"].get("labels", ()))
            forms.append(NewformRecord(K, level, level_norm, kind, F, eig, f.get("label", ""),
                                       f.get("lmfdb_label"), curve, labels, f.get("provenance", ""),
                                       f.get("extra", {}), level_primes))
        except HasseBoundError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FixtureError(f"forms[{i}]: {exc}") from exc
    return Fixture(data["base_field"], level, level_norm, kind, forms, data.get("meta", {}), level_primes)


def read_fixture(path) -> Fixture:
    with open(path) as fh:
        data = json.load(fh, object_pairs_hook=_no_duplicates)
    return parse_fixture(data)


def load_fixture(path) -> list[NewformRecord]:
    return read_fixture(path).forms


# ---------------------------------------------------------------------------
# shipped fixtures


DATA_DIR = Path(__file__).parent / "data"


def fixture_path(base_field: str, level: str, kind: Kind) -> Path:
    return DATA_DIR / "newforms" / f"{base_field}__{level}__{kind.value.lower()}.json"


def shipped_fixture(base_field: str, level: str, kind: Kind) -> Fixture:
    path = fixture_path(base_field, level, kind)
    if not path.exists():
        raise FileNotFoundError(f"no shipped fixture for {base_field} level {level} ({kind.value})")
    return read_fixture(path)


# ---------------------------------------------------------------------------
# LMFDB client


class FetchStatus(enum.Enum):
    OK = "ok"
    CACHED = "cached"
    EMPTY = "empty"  # the level exists but has no newforms
    UNKNOWN_LEVEL = "unknown-level"


@dataclass(frozen=True)
class FetchResult:
    records: list[NewformRecord]
    status: FetchStatus
    source: str


Transport = Callable[[str], bytes]


def _urllib_transport(url: str, timeout: float = 20.0) -> bytes:
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.read()


def default_cache_dir() -> Path:
    return Path(os.environ.get("FREYELIM_CACHE_DIR", Path.home() / ".cache" / "freyelim"))


def _cache_file(cache_dir: Path, base_field: str, level: str, kind: Kind) -> Path:
    return Path(cache_dir) / f"{base_field}__{level}__{kind.value.lower()}.json"


def _parse_eig(expr, F: HeckeField, path: str) -> Coords:
    if isinstance(expr, list):
        return F.element(expr)
    if isinstance(expr, (int, float)) and float(expr).is_integer():
        return F.const(int(expr))
    if not isinstance(expr, str):
        raise FixtureError(f"{path}: unsupported eigenvalue {expr!r}")
    x = sympy.Symbol("x")
    try:
        e = sympy.sympify(expr.replace("^", "**"), locals={"e": x, "a": x, "x": x})
        poly = sympy.Poly(e, x)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError) as exc:
        raise FixtureError(f"{path}: cannot parse {expr!r}") from exc
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    return F.element(_poly_rem(coeffs, [Fraction(c) for c in F.defining_poly]) or [0])


def _parse_poly(expr, path: str) -> tuple[int, ...]:
    if isinstance(expr, list):
        return tuple(int(c) for c in expr)
    if not isinstance(expr, str):
        raise FixtureError(f"{path}: unsupported polynomial {expr!r}")
    x = sympy.Symbol("x")
    try:
        poly = sympy.Poly(sympy.sympify(expr.replace("^", "**"), locals={"x": x}), x)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError) as exc:
        raise FixtureError(f"{path}: cannot parse {expr!r}") from exc
    return tuple(int(c) for c in reversed(poly.all_coeffs()))


def parse_lmfdb_payload(payload: dict, base_field: str, level: str, kind: Kind) -> list[NewformRecord]:
    """Records from an LMFDB API response.

    Eigenvalues are keyed by prime label ("primes" given as "N.i" labels) or,
    when primes are absent, assigned in order to the locally enumerated primes
    sorted by norm. Ambiguous assignments (two primes of equal norm with
    different eigenvalues and no labels) raise.
    """
    if not isinstance(payload, dict) or "data" not in payload:
        raise FixtureError("payload: missing 'data'")
    K = field_from_label(base_field)
    out = []
    for i, row in enumerate(payload["data"]):
        path = f"data[{i}]"
        if not isinstance(row, dict):
            raise FixtureError(f"{path}: expected object")
        try:
            poly_src = row.get("hecke_poly", row.get("hecke_polynomial", "x"))
            F = HeckeField(_parse_poly(poly_src, f"{path}.hecke_poly"))
            eigs = row.get("hecke_eigs", row.get("hecke_eigenvalues"))
            if eigs is None:
                raise FixtureError(f"{path}: missing hecke_eigs")
            primes = row.get("primes")
            vals = [_parse_eig(v, F, f"{path}.hecke_eigs[{j}]") for j, v in enumerate(eigs)]
            if primes is not None:
                if len(primes) != len(vals):
                    raise FixtureError(f"{path}.primes: length mismatch")
                table = dict(zip(primes, vals))
            else:
                table = _reconcile(K, vals, path)
            table = {k: v for k, v in table.items() if int(k.split(".")[0]) < EIGEN_NORM_BOUND}
            norm = int(row.get("level_norm") or level.split(".")[0])
            out.append(NewformRecord(K, row.get("level_label", level), norm, kind, F, table,
                                     row.get("short_label", row.get("label", "")), row.get("label"),
                                     provenance="lmfdb"))
        except FixtureError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FixtureError(f"{path}: {exc}") from exc
    return out


def _reconcile(K: QuadField, vals: list[Coords], path: str) -> dict[str, Coords]:
    bound = 8
    primes = primes_up_to(K, bound)
    while len(primes) < len(vals):
        bound *= 2
        primes = primes_up_to(K, bound)
    primes = primes[: len(vals)]
    table = {}
    for P, v in zip(primes, vals):
        table[P.label] = v
    by_norm: dict[int, list] = {}
    for P in primes:
        by_norm.setdefault(P.norm, []).append(table[P.label])
    for n, vs in by_norm.items():
        if len(vs) > 1 and len(set(vs)) > 1:
            raise FixtureError(f"{path}: ambiguous eigenvalues at norm {n}; prime labels required")
    return table


def fetch_lmfdb(base_field_label: str, level: str, kind: Kind | str, *, cache_dir=None,
                offline: bool = False, transport: Optional[Transport] = None,
                base_url: Optional[str] = None) -> FetchResult:
    """Fetch newforms for (field, level, kind); falls back to the cache on network failure."""
    kind = Kind(kind) if isinstance(kind, str) else kind
    cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
    cfile = _cache_file(cache_dir, base_field_label, level, kind)
    if offline:
        return _from_cache(cfile, base_field_label, level, kind, reason="offline")
    base_url = base_url or os.environ.get(LMFDB_URL_ENV, DEFAULT_LMFDB_URL)
    table = "bmf_forms" if kind is Kind.BIANCHI else "hmf_forms"
    query = urllib.parse.urlencode({"field_label": base_field_label, "level_label": level, "_format": "json"})
    url = f"{base_url.rstrip('/')}/{table}/?{query}"
    transport = transport or _urllib_transport
    try:
        raw = transport(url)
    except (urllib.error.URLError, OSError, TimeoutError) as exc:
        log.warning("network failure (%s); using cache", exc)
        return _from_cache(cfile, base_field_label, level, kind, reason=str(exc))
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FixtureError(f"payload: invalid JSON ({exc})") from exc
    if payload.get("unknown_level") or payload.get("error"):
        return FetchResult([], FetchStatus.UNKNOWN_LEVEL, url)
    records = parse_lmfdb_payload(payload, base_field_label, level, kind)
    save_fixture(cfile, records, base_field=base_field_label, level=level,
                 level_norm=int(level.split(".")[0]), kind=kind, meta={"source": url})
    return FetchResult(records, FetchStatus.OK if records else FetchStatus.EMPTY, url)


def _from_cache(cfile: Path, base_field: str, level: str, kind: Kind, reason: str) -> FetchResult:
    if cfile.exists():
        return FetchResult(load_fixture(cfile), FetchStatus.CACHED, str(cfile))
    try:
        fx = shipped_fixture(base_field, level, kind)
    except FileNotFoundError:
        raise ConnectionError(f"no network ({reason}) and no cached data for {base_field} {level}") from None
    return FetchResult(fx.forms, FetchStatus.CACHED, "shipped fixture")
