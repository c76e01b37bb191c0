"""Command-line front end.

Every subcommand builds a :class:`RunConfig` from defaults, an optional JSON
config file and the command-line flags (flags win), runs one library
operation and writes a JSON or CSV artifact atomically. Exit status: 0 on
success, 1 on usage errors, 2 on domain errors, 3 on numerical failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass

import numpy as np

from . import asymptotics as asy
from . import io as hio
from . import spectral_geometry as sg
from .continuation import SweepResult, sweep_cached, verify_identity_suite
from .linearization import MeshError, MeshParams, SpectrumResult, UnresolvedDegeneracy, Weight, assemble, eigen
from .nonlinearity import AssumptionReport, DomainError, NonlinearitySpec, check_assumptions
from .radial_ode import ProblemSpec, RadialProfile, ShootingError, radial_bound, shoot_ground_state, sobolev_ratio

log = logging.getLogger("henon")

COMMANDS = ("solve", "spectrum", "morse-table", "sweep", "bessel", "verify-decay", "census", "check-F")

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2, 3

# keys that select where output goes and never influence the result
OUTPUT_KEYS = ("format", "out", "cache_dir", "no_cache", "seed", "log_level")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    N: int = 3
    alpha: str | None = None
    alpha_range: str | None = None
    F: str = "pow:p=3"
    n_samples: int = 29
    tol: float = 1e-10
    bracket_tol: float = 1e-13
    nodes: int = 4000
    T: float | None = None
    n_eigs: int = 3
    weight: str = "KM2_WEIGHT"
    nu: float = 0.5
    s: str = "1"
    h: str = "square"
    m: float = 1.0
    t_max: float = 30.0
    n_t: int = 60
    format: str = "json"
    out: str | None = None
    cache_dir: str | None = None
    no_cache: bool = False
    seed: int | None = None
    log_level: str = "WARNING"

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        for name in ("tol", "bracket_tol", "m"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.format not in ("json", "csv"):
            raise UsageError("format must be json or csv")
        if self.alpha_range is not None:
            lo, hi = parse_range(self.alpha_range)[:2]
            if not lo < hi:
                raise UsageError("alpha-range needs lower < upper")
        if self.n_eigs < 1 or self.n_samples < 0 or self.n_t < 2:
            raise UsageError("counts must be positive")
        return self

    def key(self) -> dict:
        d = dataclasses.asdict(self)
        for k in OUTPUT_KEYS:
            d.pop(k)
        d["format"] = self.format
        return d


def parse_range(text: str):
    """'lo:hi' or 'lo:hi:step' (inclusive of hi up to rounding)."""
    try:
        parts = [float(x) for x in str(text).split(":")]
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}") from exc
    if len(parts) not in (2, 3):
        raise UsageError(f"bad range {text!r}; use lo:hi or lo:hi:step")
    return tuple(parts)


def range_values(text: str) -> list[float]:
    parts = parse_range(text) if ":" in str(text) else (float(text),)
    if len(parts) == 1:
        return [parts[0]]
    lo, hi = parts[:2]
    step = parts[2] if len(parts) == 3 else (hi - lo)
    if step <= 0:
        raise UsageError("range step must be positive")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(n)]


def _spec(cfg: RunConfig, alpha: float | None = None) -> ProblemSpec:
    if alpha is None:
        if cfg.alpha is None:
            raise UsageError("--alpha is required")
        alpha = float(cfg.alpha)
    return ProblemSpec(cfg.N, alpha, NonlinearitySpec.parse(cfg.F))


def _envelope(kind: str, cfg: RunConfig, result) -> dict:
    return {"schema": hio.SCHEMA, "type": kind, "config": cfg.key(), "result": result}


# ---------------------------------------------------------------------------
# commands: each returns (payload dict, csv rows, summary line)
# ---------------------------------------------------------------------------


def cmd_solve(cfg):
    spec = _spec(cfg)
    prof = shoot_ground_state(spec, cfg.tol, bracket_tol=cfg.bracket_tol)
    _, ratio = radial_bound(prof)
    res = prof.to_dict()
    res["diagnostics"] = {"radial_bound_ratio_max": float(ratio.max()), "sobolev_ratio": sobolev_ratio(prof), "residual_max": float(np.abs(prof.residual()).max())}
    summary = f"a*={prof.a_star:.12g} delta_fit={prof.delta_fit:.6g} norms=({prof.energy_norms[0]:.6g}, {prof.energy_norms[1]:.6g})"
    return _envelope("RadialProfile", cfg, res), prof.csv_rows(), summary


def cmd_spectrum(cfg):
    spec = _spec(cfg)
    prof = shoot_ground_state(spec, cfg.tol, bracket_tol=cfg.bracket_tol)
    op = assemble(prof, mesh=MeshParams(cfg.nodes, T=cfg.T))
    try:
        weight = Weight(cfg.weight.upper())
    except ValueError as exc:
        raise UsageError(f"weight must be K_WEIGHT or KM2_WEIGHT, got {cfg.weight!r}") from exc
    res = eigen(op, weight, cfg.n_eigs)
    summary = f"{weight.value}: lambda={np.array2string(res.best, precision=8)} negative_count={res.negative_count} k={spec.k:.8g}"
    return _envelope("SpectrumResult", cfg, res.to_dict()), res.eigvec_csv_rows(), summary


def cmd_morse_table(cfg):
    text = cfg.alpha_range or cfg.alpha
    if text is None:
        raise UsageError("--alpha lo:hi:step is required")
    rows = sg.morse_table(cfg.N, range_values(text))
    cols = ("alpha", "side", "m", "m_H", "kernel_dim")
    csv_rows = [cols] + [tuple(r[c] for c in cols) for r in rows]
    return _envelope("MorseTable", cfg, rows), csv_rows, f"{len(rows)} rows for N={cfg.N}"


def cmd_sweep(cfg):
    text = cfg.alpha_range or cfg.alpha
    if text is None:
        raise UsageError("--alpha-range lo:hi is required")
    lo, hi = parse_range(text)[:2]
    template = _spec(cfg, alpha=lo)
    res = sweep_cached(template, (lo, hi), cfg.n_samples, MeshParams(cfg.nodes, T=cfg.T), cache=not cfg.no_cache, cache_dir=cfg.cache_dir, tol=cfg.tol, bracket_tol=cfg.bracket_tol)
    report = verify_identity_suite(res)
    payload = res.to_dict()
    payload["identity_checks"] = report.to_dict()
    jumps = ", ".join(f"({j.alpha_lo:g},{j.alpha_hi:g}):{j.size}" for j in res.detected_jumps) or "none"
    summary = f"{len(res.samples)} samples, jumps {jumps}, identities {'pass' if report.passed else 'FAIL'}"
    return _envelope("SweepResult", cfg, payload), res.csv_rows(), summary


def cmd_bessel(cfg):
    if ":" in cfg.s:
        lo, hi, *rest = parse_range(cfg.s)
        n = int(rest[0]) if rest else 50
        svals = np.geomspace(lo, hi, n).tolist()
    else:
        svals = [float(cfg.s)]
    pairs = [asy.bessel_ik(cfg.nu, s) for s in svals]
    rows = [("s", "I", "K", "wronskian_times_s", "regime")] + [(p.s, p.I, p.K, p.wronskian * p.s, p.regime) for p in pairs]
    worst = max(abs(p.wronskian * p.s + 1) for p in pairs)
    return _envelope("BesselTable", cfg, [p.to_dict() for p in pairs]), rows, f"nu={cfg.nu}: {len(pairs)} points, max |s W + 1| = {worst:.2e}"


def cmd_verify_decay(cfg):
    if cfg.alpha is None:
        raise UsageError("--alpha is required")
    t = np.linspace(cfg.t_max / cfg.n_t, cfg.t_max, cfg.n_t)
    rep = asy.verify_superexp_decay(cfg.h, float(cfg.alpha), cfg.m, t, N=cfg.N)
    summary = f"h={rep.h_id}: tail sup ratio over last decade {rep.decade_ratio:.4g}, monotone={rep.monotone_tail}"
    return _envelope("DecayReport", cfg, rep.to_dict()), rep.csv_rows(), summary


def cmd_census(cfg):
    if cfg.alpha is None:
        raise UsageError("--alpha is required")
    a = float(cfg.alpha)
    if not a.is_integer():
        raise DomainError(f"alpha={a} is not an even integer")
    rep = sg.branch_census(int(a), cfg.N)
    rows = [("alpha_i", "i", "branch", "group")] + [(rep.alpha_i, rep.i, j + 1, g) for j, g in enumerate(rep.groups)]
    return _envelope("BranchReport", cfg, rep.to_dict()), rows, f"alpha={rep.alpha_i}, N={cfg.N}: {rep.branch_count} branch(es) {', '.join(rep.groups)}"


def cmd_check_F(cfg):
    F = NonlinearitySpec.parse(cfg.F)
    if F.alpha_dependent:
        F = F.bind(float(cfg.alpha or 0.0), cfg.N)
    rep = check_assumptions(F)
    rows = [("assumption", "passes")] + sorted(rep.passes.items())
    failed = [k for k, v in rep.passes.items() if not v]
    return _envelope("AssumptionReport", cfg, rep.to_dict()), rows, f"{cfg.F}: theta={rep.theta} phi={rep.phi} failed={failed or 'none'}"


HANDLERS = {
    "solve": cmd_solve,
    "spectrum": cmd_spectrum,
    "morse-table": cmd_morse_table,
    "sweep": cmd_sweep,
    "bessel": cmd_bessel,
    "verify-decay": cmd_verify_decay,
    "census": cmd_census,
    "check-F": cmd_check_F,
}

LOADERS = {
    "RadialProfile": RadialProfile.from_dict,
    "SpectrumResult": SpectrumResult.from_dict,
    "SweepResult": SweepResult.from_dict,
    "BranchReport": sg.BranchReport.from_dict,
    "AssumptionReport": AssumptionReport.from_dict,
    "DecayReport": asy.DecayReport.from_dict,
    "BesselTable": lambda rows: [asy.BesselPair.from_dict(r) for r in rows],
    "MorseTable": lambda rows: [dict(r) for r in rows],
}


def load_artifact(text: str):
    """Parse a JSON artifact back into the type that emitted it."""
    doc = hio.restore_float(json.loads(text))
    if doc.get("schema") != hio.SCHEMA:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    result = doc["result"]
    if doc["type"] == "SweepResult":
        result = {k: v for k, v in result.items() if k != "identity_checks"}
    if doc["type"] == "RadialProfile":
        result = {k: v for k, v in result.items() if k != "diagnostics"}
    return LOADERS[doc["type"]](result)


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    g = common.add_argument_group("problem")
    g.add_argument("--N", type=int, default=S, help="dimension (default 3)")
    g.add_argument("--alpha", default=S, help="weight exponent, or lo:hi:step for morse-table")
    g.add_argument("--alpha-range", dest="alpha_range", default=S, help="lo:hi for sweep")
    g.add_argument("--F", default=S, help="nonlinearity, e.g. pow:p=3 or alphapow:eps=1")
    n = common.add_argument_group("numerics")
    n.add_argument("--n-samples", dest="n_samples", type=int, default=S)
    n.add_argument("--tol", type=float, default=S, help="integrator relative tolerance")
    n.add_argument("--bracket-tol", dest="bracket_tol", type=float, default=S)
    n.add_argument("--nodes", type=int, default=S, help="eigen mesh intervals")
    n.add_argument("--T", type=float, default=S, help="eigen domain length")
    n.add_argument("--n-eigs", dest="n_eigs", type=int, default=S)
    n.add_argument("--weight", default=S, choices=["K_WEIGHT", "KM2_WEIGHT"])
    n.add_argument("--nu", type=float, default=S)
    n.add_argument("--s", default=S, help="argument or lo:hi[:n] (log-spaced)")
    n.add_argument("--h", default=S, help="tail source: square, xlog, pow1.5, zero")
    n.add_argument("--m", type=float, default=S)
    n.add_argument("--t-max", dest="t_max", type=float, default=S)
    n.add_argument("--n-t", dest="n_t", type=int, default=S)
    o = common.add_argument_group("output")
    o.add_argument("--config", default=None, help="JSON file with any of the options above")
    o.add_argument("--format", default=S, choices=["json", "csv"])
    o.add_argument("--out", "-o", default=S, help="output path (default stdout)")
    o.add_argument("--cache-dir", dest="cache_dir", default=S)
    o.add_argument("--no-cache", dest="no_cache", action="store_true", default=S)
    o.add_argument("--seed", type=int, default=S, help="accepted for interface stability; all algorithms are deterministic")
    o.add_argument("--log-level", dest="log_level", default=S)
    parser = _Parser(prog="henon", description="Radial ground states, spectra and Morse indices for weighted semilinear problems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "solve": "shoot the radial ground state",
        "spectrum": "eigenvalues of the linearization",
        "morse-table": "closed-form Morse indices over an alpha range",
        "sweep": "continuation in alpha with Morse-index checks",
        "bessel": "modified Bessel functions I and K",
        "verify-decay": "weighted decay of the forced Bessel equation",
        "census": "nonradial branches at an even alpha",
        "check-F": "structural assumptions on F",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def make_config(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    values = {}
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        known = {f.name for f in dataclasses.fields(RunConfig)} - {"command"}
        unknown = sorted(set(values) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    values.update(args)
    if "alpha" in values and values["alpha"] is not None:
        values["alpha"] = str(values["alpha"])
    try:
        return RunConfig(command=command, **values).validate()
    except TypeError as exc:
        raise UsageError(str(exc)) from exc


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the exit status."""
    use_cache = not cfg.no_cache and cfg.command in ("solve", "spectrum", "sweep")
    key = hio.config_hash({"command": cfg.command, **cfg.key()})
    cached = hio.cache_load(key, cfg.cache_dir) if use_cache else None
    if cached is not None:
        text, summary = cached["text"], cached["summary"]
    else:
        payload, rows, summary = HANDLERS[cfg.command](cfg)
        text = hio.dumps(payload) if cfg.format == "json" else hio.csv_text(rows)
        if use_cache:
            hio.cache_store(key, {"text": text, "summary": summary}, cfg.cache_dir)
    if cfg.out:
        hio.atomic_write(cfg.out, text)
        print(f"{cfg.command}: {summary} -> {cfg.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
        print(f"{cfg.command}: {summary}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = make_config(argv)
    except UsageError as exc:
        print(f"henon: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    logging.basicConfig(level=getattr(logging, str(cfg.log_level).upper(), logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(cfg)
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK
    except UsageError as exc:
        print(f"henon: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, MeshError, sg.BoundaryError, ValueError) as exc:
        print(f"henon: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ShootingError, UnresolvedDegeneracy, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"henon: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
