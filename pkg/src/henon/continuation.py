"""Sweeps in alpha along the radial branch and checks of the spectral identities.

Each sample is shot with a secant-predicted starting value, both weighted
eigenproblems are solved, and the Morse index is counted mode by mode over
the spherical harmonics. Jumps are located by differencing adjacent samples.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import io as hio
from . import spectral_geometry as sg
from .linearization import MeshParams, UnresolvedDegeneracy, Weight, assemble, degeneracy_report, eigen, numeric_morse_index
from .radial_ode import DEFAULT_BRACKET_TOL, DEFAULT_TOL, ProblemSpec, ShootingError, shoot_ground_state

log = logging.getLogger(__name__)

EVEN_GUARD = 1e-6
EVEN_OFFSET = 0.01


@dataclass(frozen=True)
class Sample:
    alpha: float
    a_star: float = float("nan")
    m_numeric: int | None = None
    m_closed: int | None = None
    m_symmetric_numeric: int | None = None
    lambda1_km2: float = float("nan")
    lambda1_coarse: float = float("nan")
    lambda1_error: float = float("nan")
    degeneracy_flag: int | None = None
    k: float = float("nan")
    n_bisections: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "Sample":
        d = {k: hio.restore_float(v) for k, v in d.items()}
        return cls(**d)


@dataclass(frozen=True)
class Jump:
    alpha_lo: float
    alpha_hi: float
    size: int

    def to_dict(self) -> dict:
        return {"alpha_lo": self.alpha_lo, "alpha_hi": self.alpha_hi, "size": self.size}


@dataclass(frozen=True)
class Prediction:
    alpha_i: int
    kernel_dim: int
    census: sg.BranchReport

    def to_dict(self) -> dict:
        return {"alpha_i": self.alpha_i, "kernel_dim": self.kernel_dim, "census": self.census.to_dict()}


@dataclass(frozen=True)
class SweepResult:
    N: int
    F: str
    alpha_range: tuple[float, float]
    samples: tuple[Sample, ...] = ()
    detected_jumps: tuple[Jump, ...] = ()
    predicted: tuple[Prediction, ...] = ()
    monotone: bool = True
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "type": "SweepResult",
            "schema": hio.SCHEMA,
            "N": self.N,
            "F": self.F,
            "alpha_range": list(self.alpha_range),
            "samples": [s.to_dict() for s in self.samples],
            "detected_jumps": [j.to_dict() for j in self.detected_jumps],
            "predicted": [p.to_dict() for p in self.predicted],
            "monotone": self.monotone,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        if d.get("type") != "SweepResult":
            raise ValueError("not a SweepResult record")
        return cls(
            int(d["N"]),
            d["F"],
            tuple(d["alpha_range"]),
            tuple(Sample.from_dict(s) for s in d["samples"]),
            tuple(Jump(**j) for j in d["detected_jumps"]),
            tuple(Prediction(p["alpha_i"], p["kernel_dim"], sg.BranchReport.from_dict(p["census"])) for p in d["predicted"]),
            bool(d["monotone"]),
            d.get("config", {}),
        )

    def csv_rows(self):
        cols = ("alpha", "a_star", "m_numeric", "m_closed", "lambda1_km2", "degeneracy_flag", "error")
        rows = [cols]
        for s in self.samples:
            rows.append(tuple("" if getattr(s, c) is None else getattr(s, c) for c in cols))
        return rows


def sample_alphas(lo: float, hi: float, n: int) -> list[float]:
    """Equispaced samples; any within EVEN_GUARD of an even integer moves up by EVEN_OFFSET."""
    if n <= 0 or not hi >= lo:
        return []
    pts = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
    out = []
    for a in pts.tolist():
        a = round(a, 12)
        if abs(a / 2 - round(a / 2)) * 2 < EVEN_GUARD:
            a = float(round(a)) + EVEN_OFFSET
        out.append(a)
    return out


def _predict(history: list[tuple[float, float]], alpha: float) -> float | None:
    if not history:
        return None
    if len(history) == 1:
        return history[-1][1]
    (a0, s0), (a1, s1) = history[-2], history[-1]
    return s1 + (s1 - s0) / (a1 - a0) * (alpha - a1)


def solve_sample(spec: ProblemSpec, mesh: MeshParams, tol: float, bracket_tol: float, guess: float | None = None) -> Sample:
    alpha, N = spec.alpha, spec.N
    m_closed = sg.morse_index(alpha, N)
    width = 1e-3
    prof = shoot_ground_state(spec, tol, bracket_tol=bracket_tol, guess=guess, guess_width=width)
    op = assemble(prof, mesh=mesh)
    km2 = eigen(op, Weight.KM2_WEIGHT, 2)
    m_num, _ = numeric_morse_index(op, alpha, N)
    m_sym, _ = numeric_morse_index(op, alpha, N, symmetric=True)
    deg = degeneracy_report(op)
    return Sample(
        alpha=alpha,
        a_star=prof.a_star,
        m_numeric=m_num,
        m_closed=m_closed,
        m_symmetric_numeric=m_sym,
        lambda1_km2=float(km2.extrapolated[0]),
        lambda1_coarse=float(km2.eigenvalues[0]),
        lambda1_error=float(km2.mesh_error[0]),
        degeneracy_flag=deg.n_alpha if deg.resolved else -1,
        k=spec.k,
        n_bisections=prof.n_bisections,
    )


def detect_jumps(samples) -> list[Jump]:
    good = [s for s in samples if s.ok and s.m_numeric is not None]
    return [Jump(a.alpha, b.alpha, b.m_numeric - a.m_numeric) for a, b in zip(good, good[1:]) if b.m_numeric != a.m_numeric]


def predictions(lo: float, hi: float, N: int) -> list[Prediction]:
    out = []
    i = max(1, math.ceil(lo / 2))
    while 2 * i <= hi:
        if 2 * i > lo:
            out.append(Prediction(2 * i, sg.kernel_dimension(2 * i, N, 0), sg.branch_census(2 * i, N)))
        i += 1
    return out


def sweep(
    spec_template: ProblemSpec,
    alpha_range: tuple[float, float],
    n_samples: int,
    mesh: MeshParams | None = None,
    *,
    tol: float = DEFAULT_TOL,
    bracket_tol: float = DEFAULT_BRACKET_TOL,
) -> SweepResult:
    """Solve the branch at ``n_samples`` values of alpha in ``alpha_range``.

    A failed sample is recorded with its error message and the sweep goes on.
    Samples are solved in order; each warm start uses the previous two a*.
    """
    mesh = mesh or MeshParams()
    lo, hi = float(alpha_range[0]), float(alpha_range[1])
    config = {
        "N": spec_template.N,
        "F": spec_template.F.to_string(),
        "alpha_range": [lo, hi],
        "n_samples": n_samples,
        "mesh": mesh.to_dict(),
        "tol": tol,
        "bracket_tol": bracket_tol,
    }
    samples: list[Sample] = []
    history: list[tuple[float, float]] = []
    for alpha in sample_alphas(lo, hi, n_samples):
        spec = replace(spec_template, alpha=alpha, inadmissible=False)
        try:
            s = solve_sample(spec, mesh, tol, bracket_tol, _predict(history, alpha))
            history.append((alpha, s.a_star))
        except (ShootingError, UnresolvedDegeneracy, ArithmeticError, ValueError) as exc:
            log.warning("sample alpha=%g failed: %s", alpha, exc)
            s = Sample(alpha=alpha, k=spec.k, error=f"{type(exc).__name__}: {exc}")
        samples.append(s)
    jumps = detect_jumps(samples)
    good = [s.m_numeric for s in samples if s.ok]
    monotone = all(b >= a for a, b in zip(good, good[1:]))
    if not monotone:
        log.warning("numeric Morse index is not monotone along the sweep")
    return SweepResult(spec_template.N, spec_template.F.to_string(), (lo, hi), tuple(samples), tuple(jumps), tuple(predictions(lo, hi, spec_template.N)), monotone, config)


def sweep_cached(spec_template: ProblemSpec, alpha_range, n_samples: int, mesh: MeshParams | None = None, *, cache: bool = True, cache_dir=None, **kw) -> SweepResult:
    """:func:`sweep` with a JSON cache keyed by a hash of the canonical configuration."""
    mesh = mesh or MeshParams()
    key_cfg = {
        "op": "sweep",
        "N": spec_template.N,
        "F": spec_template.F.to_string(),
        "alpha_range": [float(alpha_range[0]), float(alpha_range[1])],
        "n_samples": n_samples,
        "mesh": mesh.to_dict(),
        "tol": kw.get("tol", DEFAULT_TOL),
        "bracket_tol": kw.get("bracket_tol", DEFAULT_BRACKET_TOL),
    }
    key = hio.config_hash(key_cfg)
    if cache:
        hit = hio.cache_load(key, cache_dir)
        if hit is not None:
            return SweepResult.from_dict(hit)
    res = sweep(spec_template, alpha_range, n_samples, mesh, **kw)
    if cache:
        hio.cache_store(key, res.to_dict(), cache_dir)
    return res


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"type": "IdentityReport", "schema": hio.SCHEMA, "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def verify_identity_suite(result: SweepResult, tol: float = 1e-4, extrapolated: bool = True) -> IdentityReport:
    """Check lambda_1 = -k, m_numeric = m_closed, jump sizes and nondegeneracy.

    ``tol`` is relative to k. With ``extrapolated=False`` the lambda_1 check
    uses the base-mesh eigenvalue instead of the Richardson value.
    """
    good = [s for s in result.samples if s.ok]
    checks = []
    lam = (lambda s: s.lambda1_km2) if extrapolated else (lambda s: s.lambda1_coarse)  # noqa: E731
    bad = [s.alpha for s in good if not abs(lam(s) + s.k) <= tol * s.k]
    checks.append(Check("lambda1_equals_minus_k", not bad, f"failing alpha: {bad}" if bad else f"{len(good)} samples"))
    bad = [s.alpha for s in good if s.m_numeric != s.m_closed]
    checks.append(Check("morse_numeric_equals_closed", not bad, f"failing alpha: {bad}" if bad else ""))
    problems = []
    for j in result.detected_jumps:
        inside = [p for p in result.predicted if j.alpha_lo < p.alpha_i < j.alpha_hi]
        if len(inside) != 1:
            problems.append(f"jump in ({j.alpha_lo:g}, {j.alpha_hi:g}) contains {len(inside)} predicted values")
        elif j.size != inside[0].kernel_dim:
            problems.append(f"jump at {inside[0].alpha_i} has size {j.size}, kernel dimension {inside[0].kernel_dim}")
    for p in result.predicted:
        covered = [j for j in result.detected_jumps if j.alpha_lo < p.alpha_i < j.alpha_hi]
        straddled = any(a.alpha < p.alpha_i < b.alpha for a, b in zip(good, good[1:]))
        if straddled and not covered:
            problems.append(f"no jump detected across alpha={p.alpha_i}")
    checks.append(Check("jump_equals_kernel_dim", not problems, "; ".join(problems)))
    bad = [s.alpha for s in good if s.degeneracy_flag != 0]
    checks.append(Check("nondegenerate_off_even", not bad, f"failing alpha: {bad}" if bad else ""))
    failed = [s.alpha for s in result.samples if not s.ok]
    checks.append(Check("all_samples_solved", not failed, f"failed alpha: {failed}" if failed else ""))
    return IdentityReport(tuple(checks))
