"""Catalogue of nonlinear terms F and numeric checks of their structural assumptions.

Every term is defined on u >= 0 and extended to the negative axis as an odd
function. Specs are parsed from short strings such as ``pow:p=3`` or
``poly:p=3,m=1,c2=0.5`` and keep that string for provenance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np
from scipy import integrate

KINDS = ("pow", "alphapow", "poly", "maxpow", "rational")

# Long names used in reports; CLI strings use the short keys above.
KIND_NAMES = {
    "pow": "power-minus-linear",
    "alphapow": "alpha-dependent-power",
    "poly": "polynomial",
    "maxpow": "max-power",
    "rational": "rational",
}


class DomainError(ValueError):
    """Raised when a nonlinearity is misused or evaluates to a non-finite value."""


def _fmt(x: float) -> str:
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


@dataclass(frozen=True)
class NonlinearitySpec:
    """A concrete nonlinear term F with its parameters.

    ``params`` holds ``p``, ``m`` and, depending on ``kind``, ``q``, ``eps`` or
    polynomial coefficients ``c<q>``. For ``alphapow`` the exponent is
    ``(N + 2 + 2 alpha - eps) / (N - 2)`` and must be bound to a dimension and a
    weight exponent with :meth:`bind` before evaluation.
    """

    kind: str
    params: Mapping[str, float]
    source: str = ""
    coeffs: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown nonlinearity kind {self.kind!r}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        for key, val in self.params.items():
            if not math.isfinite(val):
                raise DomainError(f"parameter {key} is not finite")
        if self.m <= 0:
            raise DomainError("F'(0) = -m requires m > 0")
        if self.kind == "alphapow":
            eps = self.params.get("eps", 1.0)
            if eps <= 0:
                raise DomainError("alphapow needs eps > 0")
        elif self.params.get("p", 0.0) <= 1:
            raise DomainError("exponent p must exceed 1")
        if self.kind in ("maxpow", "rational") and self.params.get("q", 0.0) <= 1:
            raise DomainError(f"{self.kind} needs q > 1")
        if self.kind == "poly":
            for q, c in self.coeffs:
                if not 1 < q < self.params["p"]:
                    raise DomainError("polynomial terms need 1 < q < p")
                if not math.isfinite(c):
                    raise DomainError("polynomial coefficient is not finite")
        if not self.source:
            object.__setattr__(self, "source", self.to_string())

    # -- construction -------------------------------------------------------
    @classmethod
    def parse(cls, text: str) -> "NonlinearitySpec":
        """Parse ``kind:key=value,...``."""
        kind, _, body = text.strip().partition(":")
        kind = kind.strip()
        params: dict[str, float] = {}
        coeffs = []
        if body.strip():
            for item in body.split(","):
                key, sep, val = item.partition("=")
                key = key.strip()
                if not sep or not key:
                    raise DomainError(f"malformed parameter {item!r} in {text!r}")
                try:
                    num = float(val)
                except ValueError as exc:
                    raise DomainError(f"non-numeric value in {item!r}") from exc
                if kind == "poly" and key.startswith("c") and key != "c":
                    coeffs.append((float(key[1:]), num))
                else:
                    params[key] = num
        allowed = {
            "pow": {"p", "m"},
            "alphapow": {"eps", "m", "N"},
            "poly": {"p", "m"},
            "maxpow": {"p", "q", "m"},
            "rational": {"p", "q", "m"},
        }.get(kind)
        if allowed is None:
            raise DomainError(f"unknown nonlinearity kind {kind!r}")
        extra = set(params) - allowed
        if extra:
            raise DomainError(f"unknown parameters {sorted(extra)} for {kind}")
        params.setdefault("m", 1.0)
        if kind == "alphapow":
            params.setdefault("eps", 1.0)
        elif "p" not in params:
            raise DomainError(f"{kind} needs p")
        if kind in ("maxpow", "rational") and "q" not in params:
            raise DomainError(f"{kind} needs q")
        return cls(kind, params, source=text.strip(), coeffs=tuple(sorted(coeffs)))

    def to_string(self) -> str:
        keys = {
            "pow": ("p", "m"),
            "alphapow": ("eps", "m", "N"),
            "poly": ("p", "m"),
            "maxpow": ("p", "q", "m"),
            "rational": ("p", "q", "m"),
        }[self.kind]
        parts = [f"{k}={_fmt(self.params[k])}" for k in keys if k in self.params]
        parts += [f"c{_fmt(q)}={_fmt(c)}" for q, c in self.coeffs]
        return f"{self.kind}:" + ",".join(parts)

    # -- derived quantities ---------------------------------------------------
    @property
    def m(self) -> float:
        return float(self.params.get("m", 1.0))

    @property
    def alpha_dependent(self) -> bool:
        return self.kind == "alphapow"

    @property
    def name(self) -> str:
        return KIND_NAMES[self.kind]

    def exponent(self, alpha: float = 0.0, N: int | None = None) -> float:
        """Growth exponent p of F at infinity."""
        if self.kind == "alphapow":
            N = N if N is not None else self.params.get("N")
            if N is None:
                raise DomainError("alphapow exponent needs the dimension N")
            return (N + 2 + 2 * alpha - self.params["eps"]) / (N - 2)
        if self.kind == "maxpow":
            return max(self.params["p"], self.params["q"])
        if self.kind == "rational":
            return min(self.params["p"], self.params["q"])
        return self.params["p"]

    @property
    def p(self) -> float:
        return self.exponent()

    def bind(self, alpha: float, N: int) -> "NonlinearitySpec":
        """Freeze the alpha-dependent exponent; other kinds are returned unchanged."""
        if self.kind != "alphapow":
            return self
        p = self.exponent(alpha, N)
        if p <= 1:
            raise DomainError(f"alphapow exponent {p} <= 1 at alpha={alpha}, N={N}")
        return NonlinearitySpec("pow", {"p": p, "m": self.m}, source=self.source)

    # -- evaluation -----------------------------------------------------------
    def _positive(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """F and F' for u >= 0."""
        P = self.params
        m = self.m
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if self.kind == "pow":
                p = P["p"]
                f = u**p - m * u
                df = p * u ** (p - 1) - m
            elif self.kind == "poly":
                p = P["p"]
                f = u**p - m * u
                df = p * u ** (p - 1) - m
                for q, c in self.coeffs:
                    f = f + c * u**q
                    df = df + c * q * u ** (q - 1)
            elif self.kind == "maxpow":
                p, q = P["p"], P["q"]
                hi, lo = max(p, q), min(p, q)
                big = u >= 1.0
                f = np.where(big, u**hi, u**lo) - m * u
                df = np.where(big, hi * u ** (hi - 1), lo * u ** (lo - 1)) - m
            elif self.kind == "rational":
                p, q = P["p"], P["q"]
                # u^q / (1 + u^(q-p)) rewritten so that no power is negative
                if q >= p:
                    r = q - p
                    den = 1.0 + u**r
                    f = u**q / den
                    df = (q * u ** (q - 1) + p * u ** (q + r - 1)) / den**2
                else:
                    r = p - q
                    den = 1.0 + u**r
                    f = u**p / den
                    df = (p * u ** (p - 1) + q * u ** (p + r - 1)) / den**2
                f = f - m * u
                df = df - m
            else:
                raise DomainError("alphapow must be bound with .bind(alpha, N) before evaluation")
        return f, df

    def evaluate(self, u, alpha: float = 0.0, N: int | None = None):
        """Return ``(F(u), F'(u))`` with F extended oddly to u < 0.

        Scalars in, scalars out; arrays in, arrays out.
        """
        spec = self
        if self.kind == "alphapow":
            N = N if N is not None else self.params.get("N")
            if N is None:
                raise DomainError("alphapow evaluation needs the dimension N")
            spec = self.bind(alpha, int(N))
        arr = np.asarray(u, dtype=float)
        f, df = spec._positive(np.abs(arr))
        f = np.sign(arr) * f
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(df))):
            raise DomainError(f"non-finite value of {self.source} at u={u!r}")
        if arr.ndim == 0:
            return float(f), float(df)
        return f, df

    def __call__(self, u, alpha: float = 0.0, N: int | None = None):
        return self.evaluate(u, alpha, N)[0]

    def scalar(self) -> Callable[[float], float]:
        """Fast scalar F for ODE right-hand sides (spec must already be bound)."""
        P, m = self.params, self.m
        if self.kind == "pow":
            p = P["p"]
            if p == 3.0:
                return lambda v: v * v * v - m * v
            if p == 2.0:
                return lambda v: v * abs(v) - m * v

            def f(v, p=p, m=m):
                return math.copysign(abs(v) ** p, v) - m * v

            return f
        if self.kind == "alphapow":
            raise DomainError("bind alphapow before requesting a scalar evaluator")

        def f(v, spec=self):
            return spec.evaluate(v)[0]

        return f

    def primitive(self, u: float) -> float:
        """Integral of F over [0, u] for u >= 0."""
        if self.kind in ("pow", "poly"):
            p, m = self.params["p"], self.m
            val = u ** (p + 1) / (p + 1) - m * u * u / 2
            for q, c in self.coeffs:
                val += c * u ** (q + 1) / (q + 1)
            return val
        if self.kind == "maxpow":
            p, q = self.params["p"], self.params["q"]
            hi, lo = max(p, q), min(p, q)
            if u <= 1:
                return u ** (lo + 1) / (lo + 1) - self.m * u * u / 2
            return 1 / (lo + 1) + (u ** (hi + 1) - 1) / (hi + 1) - self.m * u * u / 2
        spec = self if self.kind != "alphapow" else None
        if spec is None:
            raise DomainError("bind alphapow before integrating")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(lambda s: spec.evaluate(s)[0], 0.0, u, epsabs=1e-14, epsrel=1e-13, limit=200)
        return val


def parse(text: str) -> NonlinearitySpec:
    return NonlinearitySpec.parse(text)


def eval_F(F: NonlinearitySpec, u, alpha: float = 0.0, N: int | None = None):
    """Module-level alias of :meth:`NonlinearitySpec.evaluate`."""
    return F.evaluate(u, alpha, N)


# ---------------------------------------------------------------------------
# Assumption checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionReport:
    theta: float | None
    phi: float | None
    lambda_limit: float
    ell: float
    s_witness: float | None
    passes: dict
    witnesses: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "phi": self.phi,
            "lambda_limit": self.lambda_limit,
            "ell": self.ell,
            "s_witness": self.s_witness,
            "passes": dict(self.passes),
            "witnesses": dict(self.witnesses),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AssumptionReport":
        return cls(
            d["theta"], d["phi"], d["lambda_limit"], d["ell"], d["s_witness"], dict(d["passes"]), dict(d.get("witnesses", {}))
        )


def _bisect(fun: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-15) -> float:
    flo = fun(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= xtol * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def default_scan_grid(F: NonlinearitySpec, n: int = 10_000) -> np.ndarray:
    theta = find_theta(F, np.geomspace(1e-8, 1e6, 4000))
    upper = max(100.0, 10.0 * (theta or 1.0))
    return np.geomspace(1e-6 * (theta or 1.0), upper, n)


def find_theta(F: NonlinearitySpec, grid: np.ndarray) -> float | None:
    """Largest sign change of F from negative to positive on the grid, refined by bisection."""
    f = F.evaluate(np.asarray(grid, float))[0]
    idx = np.nonzero((f[:-1] < 0) & (f[1:] >= 0))[0]
    if idx.size == 0:
        return None
    i = idx[-1]
    if f[i + 1] == 0.0:
        return float(grid[i + 1])
    return _bisect(lambda u: F.evaluate(u)[0], float(grid[i]), float(grid[i + 1]))


def check_assumptions(F: NonlinearitySpec, scan_grid=None) -> AssumptionReport:
    """Sample the structural assumptions on F over a positive, log-spaced grid.

    Failures are reported, never raised. The G-function u F'(u) / F(u) is not
    sampled inside the relative neighbourhood |u - theta| < 1e-3 theta.
    """
    grid = default_scan_grid(F) if scan_grid is None else np.sort(np.asarray(scan_grid, float))
    if np.any(grid <= 0):
        raise DomainError("scan grid must be positive")
    f, df = F.evaluate(grid)
    passes: dict[str, bool] = {}
    wit: dict[str, float | None] = {}

    f0, df0 = F.evaluate(0.0)
    passes["Fin0"] = f0 == 0.0 and df0 < 0 and abs(df0 + F.m) <= 1e-12 * F.m
    p = F.p
    ubig = min(1e12, 10 ** (300.0 / max(p, 1.0)))
    fbig, dfbig = F.evaluate(ubig)
    ell = abs(fbig) / ubig**p
    ratio = np.abs(f) / grid**p
    passes["Fcresce"] = bool(math.isfinite(ell) and np.all(np.isfinite(ratio)))

    theta = find_theta(F, grid)
    phi = None
    s_wit = None
    if theta is not None:
        # coarse sign scan of the primitive, refined with the exact primitive
        prim = F.primitive(float(grid[0])) + integrate.cumulative_trapezoid(f, grid, initial=0.0)
        jdx = np.nonzero((grid > theta) & (prim > 0))[0]
        if jdx.size:
            j = int(jdx[0])
            while j < grid.size - 1 and F.primitive(float(grid[j])) <= 0:
                j += 1
            while j > 0 and grid[j - 1] > theta and F.primitive(float(grid[j - 1])) > 0:
                j -= 1
            if F.primitive(float(grid[j])) > 0:
                s_wit = float(grid[j])
                lo = max(float(grid[j - 1]) if j > 0 else theta, theta)
                phi = _bisect(F.primitive, lo, s_wit, xtol=1e-15)
    passes["Fnozero"] = s_wit is not None
    wit["Fnozero"] = s_wit

    lam = ubig * dfbig / fbig
    if theta is None:
        passes["F2"] = False
        passes["F2_literal"] = False
        wit["F2"] = None
    else:
        below = grid < theta
        above = grid > theta
        neg_ok = bool(np.all(f[below] < 0))
        pos_ok = bool(np.all(f[above] > 0))
        lit_ok = bool(np.all(f[above] > theta))
        near0 = grid <= min(theta, grid[0] * 10)
        d0_ok = bool(np.all(df[near0] <= 0)) and df0 <= 0
        passes["F2"] = neg_ok and pos_ok and d0_ok
        passes["F2_literal"] = neg_ok and lit_ok and d0_ok
        bad = grid[above][f[above] <= theta]
        wit["F2_literal"] = float(bad[-1]) if bad.size else None

    if theta is None or phi is None:
        passes["F3"] = False
        wit["F3"] = None
    else:
        keep = np.abs(grid - theta) >= 1e-3 * theta
        with np.errstate(divide="ignore", invalid="ignore"):
            G = grid * df / f
        G_phi = phi * F.evaluate(phi)[1] / F.evaluate(phi)[0]
        tail = keep & (grid >= phi)
        Gt = G[tail]
        mono = np.all(np.diff(Gt) <= 1e-10 * (1 + np.abs(Gt[:-1])))
        mid = keep & (grid >= theta) & (grid < phi)
        mid_ok = np.all(G[mid] >= G_phi - 1e-10 * (1 + abs(G_phi)))
        low = keep & (grid < theta)
        low_ok = np.all(G[low] <= lam + 1e-10 * (1 + abs(lam)))
        passes["F3"] = bool(mono and mid_ok and low_ok and lam >= 1)
        passes["F3_G_nonincreasing"] = bool(mono)
        if not mono:
            k = int(np.argmax(np.diff(Gt) > 1e-10 * (1 + np.abs(Gt[:-1]))))
            wit["F3"] = float(grid[tail][k + 1])
        else:
            wit["F3"] = None
    return AssumptionReport(theta, phi, float(lam), float(ell), s_wit, passes, wit)


def is_admissible(F: NonlinearitySpec, alpha: float, N: int) -> bool:
    """Admissibility p < (k+3)/(k-1), equivalently alpha > ((N-2)p - (N+2))/2."""
    k = (2 * N - 2 + alpha) / (2 + alpha)
    p = F.exponent(alpha, N)
    return p < (k + 3) / (k - 1)


def admissible_alpha_min(p: float, N: int) -> float:
    return max(0.0, ((N - 2) * p - (N + 2)) / 2)
