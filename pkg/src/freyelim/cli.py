"""Command-line front end: field data, Frey curves, S-units, elimination and bounds.

Reports are canonical JSON on stdout (or markdown with --format md).
Exit codes: 0 success, 2 negative mathematical result (criterion fails or a
form stays unresolved), 1 operational error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import sympy

from . import __version__
from .criteria import (
    TORSION_FLOORS,
    IrreducibilityContext,
    abelianization_torsion,
    derived_floor,
    has_torsion_data,
    ray_class_order,
    split_case_obstruction,
)
from .eliminate import (
    ALL,
    AUX_NORM_BOUND,
    DEFAULT_FLOOR,
    BoundReport,
    FormVerdict,
    Level,
    auxiliary_primes,
    bound_synthesis,
    default_d,
    eliminator,
    frey_levels,
    inertia_eliminate,
)
from .freycurve import (
    LemmaHypothesisError,
    Signature,
    SolutionTriple,
    build_frey,
    check_closed_forms,
    invariants,
    local_data,
)
from .newforms import DEFAULT_LMFDB_URL, FixtureError, Kind, dumps_canonical, fetch_lmfdb, default_cache_dir
from .quadfield import (
    FieldElement,
    PrimeIdeal,
    QuadField,
    class_numbers,
    fmt_rational,
    fundamental_unit,
    make_field,
    prime_by_label,
    primes_up_to,
    split_prime,
    support,
    valuation,
)
from .sunit import (
    DEFAULT_BOX,
    criterion_A,
    s_unit_basis,
    solve_plus_one,
    solve_square_equation,
    solve_unit_equation,
    theoremC_descent,
)

log = logging.getLogger("freyelim")

REPORT_SCHEMA = "freyelim.report/1"
EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2
ENV_PREFIX = "FREYELIM_"


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    field: Optional[int] = None
    signature: Signature = Signature.PPQ2_EFFECTIVE
    d: Optional[int] = None
    aux_bound: int = AUX_NORM_BOUND
    box: int = DEFAULT_BOX
    floor: int = DEFAULT_FLOOR
    lmfdb_url: str = DEFAULT_LMFDB_URL
    cache_dir: Optional[str] = None
    offline: bool = True
    format: str = "json"

    def __post_init__(self):
        for name in ("aux_bound", "box", "floor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.d is not None and self.d <= 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if self.format not in ("json", "md"):
            raise ValueError(f"format must be json or md, got {self.format!r}")

    @property
    def K(self) -> QuadField:
        if self.field is None:
            raise ValueError("--field is required")
        return make_field(self.field)

    @property
    def d_value(self) -> int:
        return default_d(self.K) if self.d is None else self.d


CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


def _convert(key: str, raw):
    if raw is None:
        return None
    if key == "signature":
        return raw if isinstance(raw, Signature) else Signature.parse(str(raw))
    if key in ("field", "d", "aux_bound", "box", "floor"):
        return int(raw)
    if key == "offline":
        if isinstance(raw, bool):
            return raw
        s = str(raw).strip().lower()
        if s in ("1", "true", "yes", "on"):
            return True
        if s in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"offline: not a boolean: {raw!r}")
    return str(raw)


def read_config_file(path) -> dict:
    """key = value lines; '#' starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in CONFIG_KEYS:
            raise ValueError(f"{path}:{n}: unknown key {k!r}")
        out[k] = v
    return out


def env_config(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    return {k: environ[ENV_PREFIX + k.upper()] for k in CONFIG_KEYS if ENV_PREFIX + k.upper() in environ}


def resolve_config(flags: dict, config_file=None, environ=None) -> RunConfig:
    """Precedence: flags > config file > environment > defaults."""
    merged: dict = {}
    for layer in (env_config(environ), read_config_file(config_file) if config_file else {},
                  {k: v for k, v in flags.items() if k in CONFIG_KEYS and v is not None}):
        for k, v in layer.items():
            try:
                merged[k] = _convert(k, v)
            except ValueError as exc:
                raise ValueError(f"{k}: {exc}") from None
    return RunConfig(**merged)


# ---------------------------------------------------------------------------
# serialisation


def el(z: FieldElement) -> list[str]:
    return [fmt_rational(z.x), fmt_rational(z.y)]


def parse_element(K: QuadField, s: str) -> FieldElement:
    """'x' or 'x:y' (meaning x + y*w) with rational x, y."""
    parts = str(s).split(":")
    if len(parts) > 2:
        raise ValueError(f"bad element {s!r}; use x or x:y")
    x = Fraction(parts[0])
    y = Fraction(parts[1]) if len(parts) == 2 else Fraction(0)
    return K(x, y)


def _prime_json(P: PrimeIdeal) -> dict:
    return {"label": P.label, "p": P.p, "kind": P.kind, "generator": el(P.gen) if P.gen is not None else None}


def _field_json(K: QuadField) -> dict:
    w = "(1+sqrt(m))/2" if K.half_basis else "sqrt(m)"
    return {"label": K.label, "m": K.m, "disc": K.disc, "w": w}


def _survivors_json(s):
    return "ALL" if s is ALL else sorted(s)


def verdict_json(v: FormVerdict, level: Optional[Level] = None) -> dict:
    f = v.form
    return {
        "form": f.label,
        "level": level.name if level else None,
        "level_label": f.level_label,
        "hecke_poly": list(f.hecke_field.defining_poly),
        "rational": f.is_rational,
        "per_prime": dict(v.per_prime),
        "eliminator": v.eliminator,
        "eliminator_factors": {str(p): e for p, e in sorted(sympy.factorint(v.eliminator).items())} if v.eliminator else {},
        "survivors": _survivors_json(v.survivors),
        "inertia_eliminated": v.inertia_eliminated,
        "resolved": v.resolved,
        "curve_labels": list(f.curve_labels),
        "provenance": f.provenance,
    }


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps_canonical(report)
    return _markdown(report)


def _markdown(obj, depth: int = 1) -> str:
    lines: list[str] = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, dict) or (isinstance(v, list) and v and isinstance(v[0], dict)):
                lines.append(f"{'#' * min(depth + 1, 6)} {k}\n")
                lines.append(_markdown(v, depth + 1))
            else:
                lines.append(f"- **{k}**: {_md_scalar(v)}")
    elif isinstance(obj, list):
        for i, item in enumerate(obj):
            lines.append(f"{'#' * min(depth + 1, 6)} [{i}]\n")
            lines.append(_markdown(item, depth + 1))
    else:
        lines.append(_md_scalar(obj))
    return "\n".join(lines) + "\n"


def _md_scalar(v) -> str:
    if isinstance(v, list):
        if not v:
            return "(none)"
        if all(isinstance(x, list) for x in v):
            return ", ".join("`[" + ", ".join(str(y) for y in x) + "]`" for x in v)
        return ", ".join(_md_scalar(x) for x in v)
    if v is None:
        return "n/a"
    return f"`{v}`"


# ---------------------------------------------------------------------------
# elimination pipeline


def special_prime(K: QuadField, signature: Signature) -> PrimeIdeal:
    p = 3 if signature is Signature.PPQ3_APPENDIX else 2
    Ps = split_prime(K, p)
    if len(Ps) != 1:
        raise ValueError(f"{p} splits in {K}")
    return Ps[0]


def frey_vj_bound(K: QuadField, signature: Signature, P: PrimeIdeal, p: int) -> int:
    """Largest possible v_P(j) of the Frey curve when P | b and the exponent is p.

    The valuation is 9 v(3) - 3p v(b) (the (p,p,3) curve at the prime above 3)
    or 12 v(2) - 2p v(b) (at the prime above 2); both decrease in p and v(b),
    so v(b) = 1 gives the maximum.
    """
    if signature is Signature.PPQ3_APPENDIX:
        return 9 * valuation(3, P) - 3 * p
    return 12 * valuation(2, P) - 2 * p


@dataclass(frozen=True)
class LevelRun:
    level: Level
    source: str
    status: str
    verdicts: tuple[FormVerdict, ...]


def run_elimination(cfg: RunConfig) -> list[LevelRun]:
    K, sig = cfg.K, cfg.signature
    kind = Kind.HILBERT if K.is_real else Kind.BIANCHI
    t = sig.torsion_t
    P = special_prime(K, sig)
    p_min = int(sympy.nextprime(cfg.floor))
    fvj = frey_vj_bound(K, sig, P, p_min)
    runs = []
    for level in frey_levels(K, sig, cfg.d_value):
        res = fetch_lmfdb(K.label, level.label, kind, cache_dir=cfg.cache_dir or default_cache_dir(),
                          offline=cfg.offline, base_url=cfg.lmfdb_url)
        aux = auxiliary_primes(K, level, t, cfg.aux_bound)
        verdicts = []
        for form in sorted(res.records, key=lambda r: r.label):
            v = eliminator(form, aux, t, cfg.floor)
            if v.eliminator == 0 and form.curve is not None:
                v = dataclasses.replace(v, inertia_eliminated=inertia_eliminate(form, fvj, P, v))
            verdicts.append(v)
        runs.append(LevelRun(level, res.source, res.status.value, tuple(verdicts)))
    return runs


def torsion_primes_for(K: QuadField, levels: Sequence[Level]) -> list[int]:
    if not has_torsion_data(K):
        return []
    out = set()
    for L in levels:
        try:
            out.update(abelianization_torsion(K, L.label))
        except KeyError:
            out.update(abelianization_torsion(K, L.name))
    return sorted(out)


def run_bounds(cfg: RunConfig) -> tuple[BoundReport, list[LevelRun]]:
    K = cfg.K
    runs = run_elimination(cfg)
    verdicts = [v for r in runs for v in r.verdicts]
    tors = torsion_primes_for(K, [r.level for r in runs])
    excluded = sympy.primefactors(cfg.d_value)
    rep = bound_synthesis(verdicts, tors, cfg.floor, excluded, field_=K, signature=cfg.signature, strict=False)
    return rep, runs


def _runs_json(runs: Sequence[LevelRun]) -> list[dict]:
    return [{
        "level": r.level.name,
        "label": r.level.label,
        "norm": r.level.norm,
        "primes": [P.label for P in r.level.primes],
        "source": r.source,
        "status": r.status,
        "forms": [verdict_json(v, r.level) for v in r.verdicts],
    } for r in runs]


def _header(cmd: str, cfg: Optional[RunConfig] = None) -> dict:
    h = {"schema": REPORT_SCHEMA, "command": cmd, "version": __version__}
    if cfg is not None and cfg.field is not None:
        h["field"] = _field_json(cfg.K)
        h["signature"] = cfg.signature.value
    return h


# ---------------------------------------------------------------------------
# commands


def cmd_field_info(args, cfg: RunConfig) -> tuple[dict, int]:
    K = cfg.K
    h, hplus = class_numbers(K)
    rep = _header("field-info", cfg)
    rep.update({
        "class_number": h,
        "narrow_class_number": hplus,
        "ray_class_order": ray_class_order(K),
        "roots_of_unity": 6 if K.m == -3 else (4 if K.m == -1 else 2),
        "primes": [_prime_json(P) for P in primes_up_to(K, args.prime_bound)],
    })
    if K.is_real:
        eps = fundamental_unit(K)
        rep["fundamental_unit"] = el(eps)
        rep["fundamental_unit_norm"] = int(eps.norm())
    return rep, EXIT_OK


def _triple(args, cfg: RunConfig) -> SolutionTriple:
    K = cfg.K
    coeffs = {}
    for name in ("A", "B", "C"):
        v = getattr(args, name)
        if v is not None:
            coeffs[name] = parse_element(K, v)
    if cfg.signature is not Signature.PPQ2_GENERAL:
        coeffs["d"] = K(cfg.d_value)
    return SolutionTriple.make(cfg.signature, K, parse_element(K, args.a), parse_element(K, args.b),
                               parse_element(K, args.c), args.p, **coeffs)


def cmd_frey(args, cfg: RunConfig) -> tuple[dict, int]:
    tr = _triple(args, cfg)
    E = build_frey(tr)
    inv = invariants(E)
    rep = _header("frey", cfg)
    closed = check_closed_forms(tr)
    rep.update({
        "triple": {"a": el(tr.a), "b": el(tr.b), "c": el(tr.c), "p": tr.p},
        "primitive": tr.is_primitive(),
        "ainvs": [el(a) for a in E.ainvs],
        "c4": el(inv.c4),
        "c6": el(inv.c6),
        "delta": el(inv.delta),
        "j": el(inv.j) if inv.j is not None else None,
        "closed_forms_ok": closed,
        "discriminant_identity_ok": inv.c4**3 - inv.c6**2 == 1728 * inv.delta,
    })
    return rep, EXIT_OK if closed else EXIT_NEGATIVE


def cmd_local(args, cfg: RunConfig) -> tuple[dict, int]:
    tr = _triple(args, cfg)
    E = build_frey(tr)
    K = cfg.K
    if args.prime:
        primes = [prime_by_label(K, lab) for lab in args.prime]
    else:
        primes = sorted({P.label: P for P in support(invariants(E).delta) + list(split_prime(K, 2))}.values(),
                        key=lambda P: (P.norm, P.index))
    out = []
    for P in primes:
        try:
            ld = local_data(tr, E, P)
            out.append({"prime": P.label, "reduction": ld.reduction.value, "v_c4": ld.v_c4, "v_c6": ld.v_c6,
                        "v_delta": ld.v_delta, "v_j": ld.v_j, "conductor_exponent": [ld.cond_exp_lo, ld.cond_exp_hi]})
        except LemmaHypothesisError as exc:
            out.append({"prime": P.label, "error": str(exc)})
    rep = _header("local", cfg)
    rep["local_data"] = out
    return rep, EXIT_OK


def _parse_S(K: QuadField, text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        out.append(prime_by_label(K, tok) if "." in tok else int(tok))
    return out


def cmd_sunit(args, cfg: RunConfig) -> tuple[dict, int]:
    if args.descent:
        q, ell = (int(s) for s in args.descent.split(","))
        r = theoremC_descent(q, ell, cfg.box)
        rep = _header("sunit")
        rep["descent"] = r.to_dict()
        return rep, EXIT_OK if r.ok else EXIT_NEGATIVE
    K = cfg.K
    basis = s_unit_basis(K, _parse_S(K, args.S))
    rep = _header("sunit", cfg)
    rep.update({"S": [P.label for P in basis.S], "generators": [el(g) for g in basis.generators],
                "box": cfg.box, "equation": args.equation})
    code = EXIT_OK
    if args.equation == "unit":
        rep["solutions"] = [[el(x), el(y)] for x, y in solve_unit_equation(basis, cfg.box)]
    elif args.equation == "plus-one":
        rep["solutions"] = [{"alpha": el(a), "gamma": el(g)} for a, g in solve_plus_one(basis, cfg.box)]
    else:
        sols = solve_square_equation(basis, cfg.box)
        rep["solutions"] = [{"alpha": el(s.alpha), "beta": el(s.beta), "gamma": el(s.gamma)} for s in sols]
        crit = {P.label: criterion_A(sols, P) for P in split_prime(K, 2) if P in basis.S}
        rep["criterion_A"] = crit
        if not all(crit.values()):
            code = EXIT_NEGATIVE
    return rep, code


def cmd_eliminate(args, cfg: RunConfig) -> tuple[dict, int]:
    runs = run_elimination(cfg)
    rep = _header("eliminate", cfg)
    rep.update({"d": cfg.d_value, "aux_bound": cfg.aux_bound, "floor": cfg.floor, "levels": _runs_json(runs)})
    rep["inertia_candidates"] = [
        {"form": v.form.label, "curve_labels": list(v.form.curve_labels), "eliminated": v.inertia_eliminated}
        for r in runs for v in r.verdicts if v.eliminator == 0
    ]
    unresolved = [v.form.label for r in runs for v in r.verdicts if not v.resolved]
    rep["unresolved"] = unresolved
    return rep, EXIT_NEGATIVE if unresolved else EXIT_OK


def cmd_criteria(args, cfg: RunConfig) -> tuple[dict, int]:
    K, sig = cfg.K, cfg.signature
    ctx = IrreducibilityContext.for_field(K, sig, cfg.d_value)
    order = ray_class_order(K)
    value, primes = split_case_obstruction(ctx.prime.p)
    rep = _header("criteria", cfg)
    rep.update({
        "prime": ctx.prime.label,
        "t": ctx.t,
        "ray_class_order": order,
        "torsion_floors": [{"theta_order": o, "t": t, "bound": b, "citation": c}
                           for (o, t), (b, c) in sorted(TORSION_FLOORS.items()) if t == ctx.t and o <= order],
        "split_case_obstruction": {"value": value, "primes": sorted(primes)},
        "derived_floor": derived_floor(K, sig),
        "excluded": sorted(ctx.excluded),
    })
    if has_torsion_data(K):
        rep["abelianization_torsion"] = {L.name: abelianization_torsion(K, L.name)
                                         for L in frey_levels(K, sig, cfg.d_value)}
    return rep, EXIT_OK


def cmd_bounds(args, cfg: RunConfig) -> tuple[dict, int]:
    br, runs = run_bounds(cfg)
    rep = _header("bounds", cfg)
    rep.update({
        "d": cfg.d_value,
        "levels": _runs_json(runs),
        "irreducibility_floor": br.irreducibility_floor,
        "torsion_primes": list(br.torsion_primes),
        "excluded": sorted(br.excluded_primes),
        "C_K": br.synthesized_bound,
        "unresolved": list(br.unresolved),
        "notes": list(br.notes),
    })
    return rep, EXIT_NEGATIVE if br.synthesized_bound is None else EXIT_OK


def cmd_fetch(args, cfg: RunConfig) -> tuple[dict, int]:
    K = cfg.K
    kind = Kind(args.kind) if args.kind else (Kind.HILBERT if K.is_real else Kind.BIANCHI)
    res = fetch_lmfdb(K.label, args.level, kind, cache_dir=cfg.cache_dir or default_cache_dir(),
                      offline=cfg.offline, base_url=cfg.lmfdb_url)
    rep = _header("fetch", cfg)
    rep.update({"level": args.level, "kind": kind.value, "status": res.status.value, "source": res.source,
                "forms": [{"label": r.label, "hecke_poly": list(r.hecke_field.defining_poly),
                           "lmfdb_label": r.lmfdb_label} for r in res.records]})
    return rep, EXIT_OK


COMMANDS = {
    "field-info": cmd_field_info,
    "frey": cmd_frey,
    "local": cmd_local,
    "sunit": cmd_sunit,
    "eliminate": cmd_eliminate,
    "criteria": cmd_criteria,
    "bounds": cmd_bounds,
    "fetch": cmd_fetch,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    """Usage errors are operational (exit 1); exit 2 is kept for negative results."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--field", type=int, help="squarefree m for K = Q(sqrt m)")
    g.add_argument("--signature", help="ppq2-general, ppq2-effective or ppq3")
    g.add_argument("--d", type=int, help="coefficient d (default |m|)")
    g.add_argument("--aux-bound", dest="aux_bound", type=int, help="norm bound for auxiliary primes")
    g.add_argument("--box", type=int, help="S-unit exponent box")
    g.add_argument("--floor", type=int, help="irreducibility floor")
    g.add_argument("--lmfdb-url", dest="lmfdb_url")
    g.add_argument("--cache-dir", dest="cache_dir")
    g.add_argument("--offline", dest="offline", action="store_true", default=None)
    g.add_argument("--online", dest="offline", action="store_false")
    g.add_argument("--format", choices=("json", "md"))
    g.add_argument("--config", help="key = value configuration file")
    g.add_argument("-v", "--verbose", action="store_true")

    ap = _Parser(prog="freyelim", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("field-info", parents=[common], help="units, class numbers and small primes")
    p.add_argument("--prime-bound", type=int, default=30)

    for name, helptext in (("frey", "Frey curve and invariants"), ("local", "local reduction data")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        for coord in ("a", "b", "c"):
            p.add_argument(f"--{coord}", required=True, help="x or x:y meaning x + y*w")
        p.add_argument("--p", type=int, required=True)
        for coef in ("A", "B", "C"):
            p.add_argument(f"--{coef}", help="coefficient for the general signature")
        if name == "local":
            p.add_argument("--prime", action="append", help="prime label N.i (repeatable)")

    p = sub.add_parser("sunit", parents=[common], help="S-unit equations and the Q(sqrt q) descent")
    p.add_argument("--S", default="2", help="comma list of rational primes or prime labels")
    p.add_argument("--equation", choices=("unit", "square", "plus-one"), default="unit")
    p.add_argument("--descent", help="q,l: run the x^p + l^r y^p = z^2 descent")

    sub.add_parser("eliminate", parents=[common], help="eliminate newforms at the Frey levels")
    sub.add_parser("criteria", parents=[common], help="irreducibility inputs")
    sub.add_parser("bounds", parents=[common], help="synthesize C_K")

    p = sub.add_parser("fetch", parents=[common], help="fetch newforms for a level")
    p.add_argument("--level", required=True, help="level label N.i")
    p.add_argument("--kind", choices=[k.value for k in Kind])
    return ap


def main(argv: Optional[Sequence[str]] = None, stdout=None, environ=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(vars(args), args.config, environ)
        if args.command not in ("sunit",) and cfg.field is None:
            raise ValueError("--field is required")
        if args.command == "sunit" and not args.descent and cfg.field is None:
            raise ValueError("--field is required (or --descent q,l)")
        report, code = COMMANDS[args.command](args, cfg)
    except (ValueError, KeyError, FixtureError, OSError, ArithmeticError) as exc:
        print(f"freyelim: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    stdout.write(render(report, cfg.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
