"""Command-line front end: ``qdisk {check,kernel,verify,spectrum}``.

Exit codes: 0 pass, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import (
    Tolerances,
    check_all,
    check_condition,
    kernel_probe,
    singular_values,
    verify_triple,
)
from .dirac import DiracData, build_parametrix, kernel_membership
from .sequences import PowerLawFamily, normalize_weight, sequence_from_dict

PRESETS = {
    "default": (4.0, 3.0, 5.5),
    "n1": (4.0, 3.0, 9.0),
    "n2": (4.0, 3.0, 10.0),
}

DEFAULTS = {"K": 200, "modes": [-20, 20], "tol": None, "seed": 0, "out": None}
CONFIG_KEYS = {"family", "beta", "mu", "w", "w_prime", *DEFAULTS}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class RunConfig:
    data: DiracData
    source: dict
    K: int = 200
    modes: tuple[int, int] = (-20, 20)
    tol: float | None = None
    seed: int = 0
    out: Path | None = None
    defaulted: list[str] = field(default_factory=list)

    @property
    def tolerances(self) -> Tolerances:
        return Tolerances() if self.tol is None else Tolerances().scaled(self.tol)

    def header(self) -> dict:
        return {
            "sequences": self.source,
            "K": self.K,
            "modes": list(self.modes),
            "tol": self.tol,
            "seed": self.seed,
            "defaulted": self.defaulted,
        }


def _parse_modes(text) -> tuple[int, int]:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return int(text[0]), int(text[1])
    if isinstance(text, str) and ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    raise ValueError(f"expected MIN..MAX, got {text!r}")


def _family(choice) -> PowerLawFamily:
    if isinstance(choice, str):
        if choice in PRESETS:
            return PowerLawFamily(*PRESETS[choice])
        parts = choice.split(",")
        if len(parts) != 3:
            raise ValueError(f"unknown preset {choice!r}; use one of {sorted(PRESETS)} or 'a,b,c'")
        return PowerLawFamily(*(float(p) for p in parts))
    if isinstance(choice, dict):
        extra = set(choice) - {"a", "b", "c"}
        if extra:
            raise ValueError(f"unexpected keys {sorted(extra)}")
        return PowerLawFamily(float(choice["a"]), float(choice["b"]), float(choice["c"]))
    raise ValueError("expected a preset name, 'a,b,c', or {a, b, c}")


def _field(name: str, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"field {name!r}: {exc}") from None


def load_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if args.config:
        path = Path(args.config)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be an object")
        unknown = set(raw) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"{path}: unknown fields {sorted(unknown)}")

    custom = [k for k in ("beta", "mu", "w", "w_prime") if k in raw]
    if args.preset is not None or not custom:
        if custom:
            raise ConfigError("give either a preset/family or custom sequences, not both")
        choice = args.preset if args.preset is not None else raw.get("family", "default")
        fam = _field("family", _family, choice)
        data = DiracData.from_family(fam)
        source = {"family": {"a": fam.a, "b": fam.b, "c": fam.c}}
    else:
        missing = [k for k in ("beta", "mu", "w", "w_prime") if k not in raw]
        if missing:
            raise ConfigError(f"custom sequences need fields {missing}")
        if "family" in raw:
            raise ConfigError("give either a family or custom sequences, not both")
        seqs = {k: _field(k, sequence_from_dict, raw[k]) for k in ("beta", "mu", "w", "w_prime")}
        w = _field("w", normalize_weight, seqs["w"])
        wp = _field("w_prime", normalize_weight, seqs["w_prime"])
        data = _field("mu", DiracData, seqs["beta"], seqs["mu"], w, wp)
        source = {k: raw[k] for k in ("beta", "mu", "w", "w_prime")}

    cfg = RunConfig(data, source)
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            value = flag
        elif key in raw:
            value = raw[key]
        else:
            cfg.defaulted.append(key)
            value = DEFAULTS[key]
        if value is None:
            continue
        if key == "K":
            cfg.K = _field("K", int, value)
            if cfg.K < 8:
                raise ConfigError("field 'K': truncation must be at least 8")
        elif key == "modes":
            cfg.modes = _field("modes", _parse_modes, value)
        elif key == "tol":
            cfg.tol = _field("tol", float, value)
            if cfg.tol < 0:
                raise ConfigError("field 'tol': must be nonnegative")
        elif key == "seed":
            cfg.seed = _field("seed", int, value)
        elif key == "out":
            cfg.out = Path(value)
    return cfg


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else ("inf" if f > 0 else "-inf" if f < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _write(cfg: RunConfig, name: str, text: str):
    if cfg.out is None:
        return
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / name).write_text(text, encoding="utf-8")


def _write_csv(cfg: RunConfig, name: str, header: list[str], rows: list[list]):
    if cfg.out is None:
        return
    cfg.out.mkdir(parents=True, exist_ok=True)
    with open(cfg.out / name, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def _fmt(x) -> str:
    return "None" if x is None else (f"{x:.6g}" if isinstance(x, float) else str(x))


# ---------------------------------------------------------------------------
# commands


def cmd_check(cfg: RunConfig) -> int:
    reports = check_all(cfg.data)
    for r in reports:
        extra = f" N={r.N}" if r.N is not None else ""
        wit = f" witness={json.dumps(_clean(r.witness), sort_keys=True)}" if r.witness else ""
        print(f"condition {r.condition}: {r.verdict}{extra}{wit}")
    N = reports[-1].N
    print(f"N = {N}")
    _write(cfg, "check.json", _dump({"config": cfg.header(), "conditions": [r.to_dict() for r in reports], "N": N}))
    return 0 if all(r.holds for r in reports) else 1


def cmd_kernel(cfg: RunConfig) -> int:
    rows = []
    n = 0
    while True:
        m = kernel_membership(cfg.data, n)
        s = m.series
        rows.append({"n": n, "in_space": m.in_space, "partial": s.partial, "tail_bound": s.tail_bound if s.converges else None,
                     "horizon": s.horizon, "order": s.order})
        verdict = {True: "in-space", False: "not-in-space", None: "undecided"}[m.in_space]
        print(f"mode {n}: {verdict} partial={_fmt(s.partial)} order={_fmt(s.order)}")
        if m.in_space is not True or n >= 64:
            break
        n += 1
    dim = sum(1 for r in rows if r["in_space"])
    ok = rows[-1]["in_space"] is False
    print(f"kernel dimension = {dim}" if ok else "kernel dimension undecided")
    _write(cfg, "kernel.json", _dump({"config": cfg.header(), "modes": rows, "dimension": dim if ok else None}))
    return 0 if ok else 1


def cmd_verify(cfg: RunConfig) -> int:
    rep = verify_triple(cfg.data, K=cfg.K, modes=cfg.modes, tol=cfg.tolerances, seed=cfg.seed)
    width = max(len(c.name) for c in rep.checks)
    for c in rep.checks:
        print(f"{c.name:<{width}}  {'pass' if c.passed else 'FAIL'}  value={c.value:.3e}  tol={c.tol:.1e}")
    print(f"kernel dimension = {rep.kernel_dimension}")
    _write(cfg, "report.json", _dump({"config": cfg.header(), **rep.to_dict()}))
    if rep.passed:
        print("verdict: pass")
        return 0
    bad = rep.first_failure
    print(f"verdict: fail ({bad.name}; witness={json.dumps(_clean(bad.witness), sort_keys=True)})")
    return 1


def cmd_spectrum(cfg: RunConfig) -> int:
    lo, hi = cfg.modes
    modes = list(range(lo, hi + 1))
    N = check_condition("seven", cfg.data).N
    if N is None and modes:
        print("condition seven undecided; cannot select parametrix regimes", file=sys.stderr)
        return 1
    hs_rows, sigma_rows, probe_rows = [], [], []
    finite = True
    for n in modes:
        h = build_parametrix(cfg.data, n, N).hs_norm(1 << 18)
        finite &= h.finite
        hs_rows.append([n, h.norm, h.bound])
        for j, s in enumerate(sorted(singular_values(cfg.data, n, cfg.K))):
            sigma_rows.append([n, j, float(s)])
        if n >= 0:
            p = kernel_probe(cfg.data, n, cfg.K)
            probe_rows.append([n, cfg.K, p.cosine_truncated, p.cosine_reference])
    _write_csv(cfg, "hs.csv", ["n", "hs_norm", "tail_bound"], hs_rows)
    _write_csv(cfg, "sigma.csv", ["n", "j", "sigma"], sigma_rows)
    _write_csv(cfg, "kernel_probe.csv", ["n", "K", "cosine_truncated", "cosine_reference"], probe_rows)
    for n, v, b in hs_rows:
        print(f"mode {n}: ||Q||_HS = {_fmt(v)} +- {_fmt(b)}")
    for n, K, ct, cr in probe_rows:
        print(f"mode {n}: kernel probe cosine = {cr:.6f}")
    return 0 if finite else 1


COMMANDS = {"check": cmd_check, "kernel": cmd_kernel, "verify": cmd_verify, "spectrum": cmd_spectrum}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdisk", description="Dirac operators on the quantum disk.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--preset", help=f"one of {sorted(PRESETS)} or 'a,b,c'")
    p.add_argument("--K", type=int, help="truncation size")
    p.add_argument("--modes", help="mode window MIN..MAX")
    p.add_argument("--tol", type=float, help="override every numeric tolerance")
    p.add_argument("--out", help="directory for JSON/CSV outputs")
    p.add_argument("--seed", type=int, help="seed for random fixtures")
    return p


def _join_modes(argv: list[str]) -> list[str]:
    # "--modes -3..3" would otherwise read the window as a flag
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--modes":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--modes={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(_join_modes(list(argv)))
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
