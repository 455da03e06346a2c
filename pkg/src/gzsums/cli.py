"""Command-line front end: configuration, cache, and deterministic artifacts."""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .brandt import (
    CURVE_11A, BrandtMatrix, EllipticCurve, aq_pointcount, brandt_matrix, hypothesis_checks,
    is_self_adjoint, with_eigenvalues,
)
from .gross import distribution_survey
from .gzsum import (
    TABLE_HEADER, GZInstance, HypothesisFailure, UnsupportedConfiguration, build_instance,
    chi0_characters, coset_representatives, element_label, main_theorem_scan, mu_nu_experiment,
    primitive_characters, trace_identity_check, valuation_table,
)
from .numerics import primes_up_to
from .quat import IdealClassSet, algebra_from_ramification, eichler_order, maximal_order, mass_check
from .quat import right_ideal_classes
from .ringclass import class_group, f2_rank, genus_G1, torsion_G0, tower

SCHEMA_VERSION = 1
CACHE_ENV = "GZSUMS_CACHE_DIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HYPOTHESIS = 2


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------- config

@dataclass
class InstanceConfig:
    curve: tuple[int, ...] = CURVE_11A.coefficients
    conductor: int = CURVE_11A.conductor
    d_K: int = -67
    p: int = 3
    l: int = 5
    n_max: int = 2
    mu_search_bound: int = 100
    precision: int = 12
    cache_dir: str | None = None
    format: str = "csv"

    def validate(self) -> None:
        if len(self.curve) != 5:
            raise ConfigError("curve needs five Weierstrass coefficients")
        if self.conductor < 1:
            raise ConfigError("conductor must be positive")
        if self.n_max < 0 or self.n_max > 6:
            raise ConfigError("n_max must lie in 0..6")
        if self.precision < 1:
            raise ConfigError("precision must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.p < 3 or self.l < 2:
            raise ConfigError("p must be an odd prime and l a prime")

    @property
    def elliptic_curve(self) -> EllipticCurve:
        return EllipticCurve(*self.curve, conductor=self.conductor)


_INT_KEYS = {"conductor", "d_K", "p", "l", "n_max", "mu_search_bound", "precision"}


def parse_config(text: str) -> InstanceConfig:
    """Flat key=value lines; '#' starts a comment; unknown keys are errors."""
    cfg = InstanceConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key == "curve":
                setattr(cfg, key, tuple(int(c) for c in value.replace(" ", "").strip("[]").split(",")))
            elif key in _INT_KEYS:
                setattr(cfg, key, int(value))
            elif key in ("cache_dir", "format"):
                setattr(cfg, key, value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
    cfg.validate()
    return cfg


# -------------------------------------------------------------------- cache

@dataclass(frozen=True)
class CacheRecord:
    schema_version: int
    key: str
    payload: dict
    digest: str

    @staticmethod
    def digest_of(payload: dict) -> str:
        return hashlib.sha256(canonical_json(payload).encode()).hexdigest()

    @classmethod
    def make(cls, key: str, payload: dict) -> "CacheRecord":
        return cls(SCHEMA_VERSION, key, payload, cls.digest_of(payload))

    def valid(self) -> bool:
        return self.schema_version == SCHEMA_VERSION and self.digest == self.digest_of(self.payload)


@dataclass
class Cache:
    root: Path | None
    log: list = field(default_factory=list)

    def _path(self, key: str) -> Path:
        assert self.root is not None
        return self.root / (key.replace("/", "_") + ".json")

    def get(self, key: str) -> dict | None:
        if self.root is None:
            return None
        path = self._path(key)
        if not path.exists():
            self.log.append(("miss", key))
            return None
        try:
            rec = CacheRecord(**json.loads(path.read_text()))
        except (ValueError, TypeError):
            rec = None
        if rec is None or not rec.valid() or rec.key != key:
            self.log.append(("corrupt", key))
            return None
        self.log.append(("hit", key))
        return rec.payload

    def put(self, key: str, payload: dict) -> None:
        if self.root is None:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        rec = CacheRecord.make(key, payload)
        tmp = self._path(key).with_suffix(".tmp")
        tmp.write_text(canonical_json(asdict(rec)))
        tmp.replace(self._path(key))
        self.log.append(("write", key))


def open_cache(cfg: InstanceConfig) -> Cache:
    root = os.environ.get(CACHE_ENV) or cfg.cache_dir
    return Cache(Path(root) if root else None)


# ------------------------------------------------------------------- output

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n"


def write_json(out: Path, name: str, payload: dict) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(canonical_json({"schema_version": SCHEMA_VERSION, **payload}))
    return path


def write_csv(out: Path, name: str, header: Sequence[str], rows) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


# ---------------------------------------------------------------- commands

def load_classes(cfg: InstanceConfig, cache: Cache, ram: Sequence[int], level: int) -> IdealClassSet:
    key = f"classes-disc{'x'.join(map(str, ram)) or 1}-level{level}"
    data = cache.get(key)
    if data is not None:
        return IdealClassSet.from_json(data)
    R = eichler_order(maximal_order(algebra_from_ramification(ram)), level)
    S = right_ideal_classes(R)
    cache.put(key, S.to_json())
    return S


def _check_hypotheses(cfg: InstanceConfig):
    rep = hypothesis_checks(cfg.elliptic_curve, cfg.d_K, cfg.p, cfg.l, cfg.mu_search_bound)
    if not rep.ok:
        raise HypothesisFailure(rep)
    return rep


def _instance(cfg: InstanceConfig, cache: Cache) -> GZInstance:
    rep = _check_hypotheses(cfg)
    ram = sorted(q for q in rep.S_ram if q != "inf")
    D_B = 1
    for q in ram:
        D_B *= q
    S = load_classes(cfg, cache, ram, cfg.conductor // D_B)
    return build_instance(cfg.elliptic_curve, cfg.d_K, cfg.p, cfg.l, cfg.n_max,
                          Kcap=cfg.precision, mu_bound=cfg.mu_search_bound, classes=S)


def cmd_validate(cfg, cache, args) -> dict:
    rep = hypothesis_checks(cfg.elliptic_curve, cfg.d_K, cfg.p, cfg.l, cfg.mu_search_bound)
    out = {"ok": rep.ok, "checks": {k: getattr(rep, k) for k in
                                    ("non_exceptional", "coprime_level", "s_even", "unit_inert_prime", "p_unramified")},
           "S_ram": [str(s) for s in rep.S_ram], "details": rep.details}
    if not rep.ok:
        write_json(args.out, "validate", out)
        raise HypothesisFailure(rep)
    return out


def cmd_classgroup(cfg, cache, args) -> dict:
    _check_hypotheses(cfg)
    if args.disc is not None:
        G = class_group(args.disc)
        return {"disc": args.disc, **G.summary(), "generators": [list(f) for f in G.generators]}
    levels = []
    for n in range(cfg.n_max + 1):
        G = class_group(cfg.d_K * cfg.p ** (2 * n))
        levels.append({"n": n, **G.summary(), "generators": [list(f) for f in G.generators]})
    return {"d_K": cfg.d_K, "p": cfg.p, "levels": levels}


def cmd_tower(cfg, cache, args) -> dict:
    _check_hypotheses(cfg)
    T = tower(cfg.d_K, cfg.p, cfg.n_max)
    out = T.summary(cfg.n_max)
    subs = []
    for n in range(T.stable_level, cfg.n_max + 1):
        G0 = torsion_G0(T, n)
        G1, gens = genus_G1(T, n)
        subs.append({"n": n, "G0": sorted(list(v) for v in G0), "G1": sorted(list(v) for v in G1),
                     "genus_generators": [list(g) for g in gens],
                     "genus_rank": f2_rank(T.G(n), gens), "ramified_primes": len(gens)})
    out["subgroups"] = subs
    return out


def cmd_brandt(cfg, cache, args) -> dict:
    rep = _check_hypotheses(cfg)
    ram = sorted(q for q in rep.S_ram if q != "inf")
    D_B = 1
    for q in ram:
        D_B *= q
    S = load_classes(cfg, cache, ram, cfg.conductor // D_B)
    bound = args.bound or 13
    mats = {}
    for q in primes_up_to(bound):
        key = f"brandt-disc{D_B}-level{S.order.level}-q{q}"
        data = cache.get(key)
        if data is None:
            data = {"matrix": brandt_matrix(S, q, args.jobs).as_lists()}
            cache.put(key, data)
        mats[str(q)] = data["matrix"]
    checks = {}
    for q, m in mats.items():
        B = BrandtMatrix(int(q), tuple(tuple(r) for r in m))
        checks[q] = {"row_sums": [sum(r) for r in m], "self_adjoint": is_self_adjoint(B, S.weights)}
    return {"classes": len(S), "weights": list(S.weights), "mass_defect": str(mass_check(S)),
            "matrices": mats, "checks": checks}


def cmd_eigen(cfg, cache, args) -> dict:
    inst = _instance(cfg, cache)
    bound = args.bound or 50
    bad = cfg.conductor * inst.classes.order.algebra.disc
    qs = [q for q in primes_up_to(bound) if bad % q]
    theta = with_eigenvalues(inst.theta, inst.classes, qs)
    return {"theta": list(theta.values),
            "eigenvalues": {str(q): theta.a(q) for q in qs},
            "point_counts": {str(q): aq_pointcount(inst.curve, q) for q in qs},
            "match": all(theta.a(q) == aq_pointcount(inst.curve, q) for q in qs)}


def cmd_mu_nu(cfg, cache, args) -> dict:
    inst = _instance(cfg, cache)
    out = mu_nu_experiment(inst, range(max(1, inst.tower.stable_level), cfg.n_max + 1))
    out["mu_valuations"] = {str(k): v for k, v in inst.mu.valuations.items()}
    out["lambda"] = inst.ctx.describe()
    return out


def cmd_cmpoints(cfg, cache, args) -> dict:
    inst = _instance(cfg, cache)
    levels = []
    for n in ([args.n] if args.n is not None else range(cfg.n_max + 1)):
        orb = inst.orbit(n)
        levels.append({**orb.summary(), "group_order": orb.group.order, "red": orb.red_values()})
    return {"levels": levels}


def _coset_metadata(inst: GZInstance, n: int) -> dict:
    G = inst.tower.G(n)
    subs = inst.subgroups(n)
    return {"G0/G1": [element_label(v) for v in coset_representatives(G, subs.G0, subs.G1)],
            "G1/G2": [element_label(v) for v in coset_representatives(G, subs.G1, subs.G2)],
            "C_generator": element_label(subs.C_generator)}


def cmd_gzscan(cfg, cache, args) -> dict:
    inst = _instance(cfg, cache)
    scans = []
    for n in range(inst.tower.stable_level, cfg.n_max + 1):
        for chi0 in chi0_characters(n, inst):
            r = main_theorem_scan(chi0, n, inst, jobs=args.jobs)
            r["cosets"] = _coset_metadata(inst, n)
            scans.append(r)
    return {"instance": inst.summary(), "scans": scans,
            "all_exist": all(s["exists_y"] for s in scans)}


def cmd_trace_check(cfg, cache, args) -> dict:
    inst = _instance(cfg, cache)
    n = cfg.n_max
    rows = []
    for chi in primitive_characters(n, inst):
        for x in inst.orbit(n).points:
            rows.append(trace_identity_check(x, chi, inst).to_dict())
    return {"instance": inst.summary(), "n": n, "rows": rows,
            "all_equal": all(r["equal"] for r in rows)}


def cmd_survey(cfg, cache, args) -> dict:
    inst = _instance(cfg, cache)
    out = []
    for n in range(inst.tower.stable_level, cfg.n_max + 1):
        G = inst.tower.G(n)
        subs = inst.subgroups(n)
        reps = coset_representatives(G, subs.G0, subs.G1)
        out.append(distribution_survey(inst.orbit(n), reps, len(inst.classes)))
    return {"surveys": out}


def cmd_table(cfg, cache, args) -> dict:
    inst = _instance(cfg, cache)
    rows = valuation_table(inst, range(inst.tower.stable_level, cfg.n_max + 1), jobs=args.jobs)
    if cfg.format == "csv":
        write_csv(args.out, "table", TABLE_HEADER, rows)
    return {"header": list(TABLE_HEADER), "rows": len(rows),
            **({"table": [list(r) for r in rows]} if cfg.format == "json" else {})}


COMMANDS = {
    "validate": cmd_validate, "classgroup": cmd_classgroup, "tower": cmd_tower,
    "brandt": cmd_brandt, "eigen": cmd_eigen, "mu-nu": cmd_mu_nu, "cmpoints": cmd_cmpoints,
    "gzscan": cmd_gzscan, "trace-check": cmd_trace_check, "survey": cmd_survey, "table": cmd_table,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gzsums", description="Gross-Zagier sums on definite quaternion algebras.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="key=value instance file (defaults to the 11a flagship)")
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--precision", type=int, help="lambda-adic working precision")
    ap.add_argument("--bound", type=int, help="prime bound for brandt/eigen, or the mu search bound otherwise")
    ap.add_argument("--disc", type=int, help="classgroup: a single discriminant")
    ap.add_argument("--n", type=int, help="cmpoints: a single level")
    ap.add_argument("--dK", type=int, help="override d_K")
    ap.add_argument("--p", type=int, help="override p")
    ap.add_argument("--l", type=int, help="override l")
    ap.add_argument("--nmax", type=int, help="override n_max")
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config.read_text()) if args.config else InstanceConfig()
        for flag, key in (("precision", "precision"), ("dK", "d_K"), ("p", "p"), ("l", "l"), ("nmax", "n_max")):
            if getattr(args, flag) is not None:
                setattr(cfg, key, getattr(args, flag))
        if args.n is not None and not 0 <= args.n <= cfg.n_max:
            raise ConfigError("--n must lie in 0..n_max")
        if args.bound is not None and args.command not in ("brandt", "eigen"):
            cfg.mu_search_bound = args.bound
        cfg.validate()
    except (OSError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cache = open_cache(cfg)
    try:
        summary = COMMANDS[args.command](cfg, cache, args)
    except HypothesisFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (UnsupportedConfiguration, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = {"command": args.command, "config": {k: (list(v) if isinstance(v, tuple) else v)
                                                   for k, v in asdict(cfg).items() if k != "cache_dir"},
               **summary}
    path = write_json(args.out, args.command.replace("-", "_"), summary)
    print(path)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
