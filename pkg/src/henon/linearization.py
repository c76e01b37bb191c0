"""Singular weighted eigenproblems of the linearization around a ground state.

The form ``int t^k (w'^2 - F'(V) w^2)`` is discretized by vertex-centred
finite volumes on a graded mesh of (t0, T]: the flux coefficient between
nodes is the exact reciprocal of ``int t^{-k}`` over the cell edge, and the
mass entries are exact integrals of ``t^k`` and ``t^{k-2}`` over the dual
cells. The node at t0 carries the natural (no-flux) condition, the node at T
is Dirichlet and is dropped from the unknowns.

The mesh is uniform in ``xi = ln t + t/c``: geometric near zero, where the
``t^{k-2}`` weight is singular, and of spacing about ``c dxi`` in the bulk.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.special import lambertw

from . import spectral_geometry as sg


class Weight(enum.Enum):
    K_WEIGHT = "K_WEIGHT"
    KM2_WEIGHT = "KM2_WEIGHT"


class MeshError(ValueError):
    pass


class UnresolvedDegeneracy(ArithmeticError):
    """An eigenvalue is too close to zero to be classified at the mesh resolution."""


MIN_NODES = 200


@dataclass(frozen=True)
class MeshParams:
    """Graded mesh: ``n_nodes`` intervals uniform in xi = ln t + t/c on [t0, T].

    ``T`` and ``c`` default to values derived from the profile (see
    :func:`resolve_mesh`).
    """

    n_nodes: int = 4000
    t0: float = 1e-5
    T: float | None = None
    c: float | None = None

    def halved(self) -> "MeshParams":
        return replace(self, n_nodes=2 * self.n_nodes)

    def to_dict(self) -> dict:
        return {"n_nodes": self.n_nodes, "t0": self.t0, "T": self.T, "c": self.c}


def resolve_mesh(mesh: MeshParams, profile) -> MeshParams:
    sm = math.sqrt(profile.m)
    T_min = profile.t_handoff + 10.0 / sm
    T = mesh.T if mesh.T is not None else max(40.0 / sm, T_min)
    if T < T_min:
        raise MeshError(f"T={T:g} ends before hand-off + 10/sqrt(m) = {T_min:g}")
    c = mesh.c if mesh.c is not None else 1.0 / sm
    return replace(mesh, T=T, c=c)


def mesh_nodes(mesh: MeshParams) -> np.ndarray:
    if mesh.n_nodes < MIN_NODES:
        raise MeshError(f"mesh with {mesh.n_nodes} nodes is coarser than the minimum {MIN_NODES}")
    t0, T, c = mesh.t0, mesh.T, mesh.c
    x0 = math.log(t0) + t0 / c
    x1 = math.log(T) + T / c
    x = np.linspace(x0, x1, mesh.n_nodes + 1)
    # invert xi = ln t + t/c: t = c W(e^xi / c)
    t = c * np.real(lambertw(np.exp(x) / c))
    t[0], t[-1] = t0, T
    return t


def _power_integral(e: float, lo, hi):
    if abs(e + 1) < 1e-14:
        return np.log(hi / lo)
    return (hi ** (e + 1) - lo ** (e + 1)) / (e + 1)


@dataclass(frozen=True)
class DiscreteOperator:
    """Symmetric tridiagonal A and diagonal masses on the unknown nodes.

    ``A`` is stored as (diag, off) and discretizes ``-(t^k w')' - t^k q w``
    with q = F'(V) unless a custom potential was supplied.
    """

    grid: np.ndarray
    diag: np.ndarray
    off: np.ndarray
    B_k: np.ndarray
    B_km2: np.ndarray
    k: float
    mesh: MeshParams
    profile: object = field(repr=False, default=None)
    potential: object = field(repr=False, default=None)
    shift_km2: float = 0.0

    @property
    def n(self) -> int:
        return self.diag.size

    @property
    def nodes(self) -> np.ndarray:
        """Unknown nodes (the Dirichlet node at T excluded)."""
        return self.grid[: self.n]

    def mass(self, which: Weight) -> np.ndarray:
        return self.B_k if which is Weight.K_WEIGHT else self.B_km2

    def shifted(self, c: float) -> "DiscreteOperator":
        """Operator for the form plus ``c int t^{k-2} w^2``."""
        return replace(self, diag=self.diag + c * self.B_km2, shift_km2=self.shift_km2 + c)

    def apply(self, w: np.ndarray) -> np.ndarray:
        out = self.diag * w
        out[:-1] += self.off * w[1:]
        out[1:] += self.off * w[:-1]
        return out

    def form(self, w: np.ndarray) -> float:
        """Quadratic form w^T A w."""
        return float(np.dot(w, self.apply(w)))

    def refined(self) -> "DiscreteOperator":
        if self.profile is None:
            raise ValueError("operator was not assembled from a profile")
        op = assemble(self.profile, mesh=self.mesh.halved(), potential=self.potential)
        return op.shifted(self.shift_km2) if self.shift_km2 else op


def assemble(profile, spec=None, mesh: MeshParams | None = None, potential=None) -> DiscreteOperator:
    """Assemble the finite-volume operator for a ground-state profile.

    Parameters
    ----------
    profile : RadialProfile
    spec : ProblemSpec, optional
        Defaults to ``profile.spec``.
    mesh : MeshParams, optional
    potential : callable or "planted", optional
        q(t, V) replacing F'(V(t)) in the form. ``"planted"`` chooses the
        discrete potential q_i = (S V')_i / (B_k,i V'_i), S the stiffness part,
        which makes the nodal V' an exact kernel vector.
    """
    spec = profile.spec if spec is None else spec
    mesh = resolve_mesh(mesh or MeshParams(), profile)
    t = mesh_nodes(mesh)
    k = spec.k
    n = t.size - 1
    flux = (1.0 - k) / (t[1:] ** (1.0 - k) - t[:-1] ** (1.0 - k))
    edges = np.concatenate([[t[0]], 0.5 * (t[1:] + t[:-1]), [t[-1]]])
    B_k = _power_integral(k, edges[:-1], edges[1:])[:n]
    B_km2 = _power_integral(k - 2.0, edges[:-1], edges[1:])[:n]
    V, dV = profile.evaluate(t[:n])
    diag = flux[:n].copy()
    diag[1:] += flux[: n - 1]
    off = -flux[: n - 1]
    if potential is None:
        q = spec.Fb.evaluate(V)[1]
    elif isinstance(potential, str):
        if potential != "planted":
            raise ValueError(f"unknown potential {potential!r}")
        Sw = diag * dV
        Sw[:-1] += off * dV[1:]
        Sw[1:] += off * dV[:-1]
        q = Sw / (B_k * dV)
    else:
        q = np.asarray(potential(t[:n], V), float) * np.ones(n)
    diag = diag - q * B_k
    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(off))):
        raise MeshError("non-finite operator entries")
    return DiscreteOperator(t, diag, off, B_k, B_km2, k, mesh, profile, potential)


def assemble_constant(k: float, q: float, mesh: MeshParams) -> DiscreteOperator:
    """Operator with constant potential q, no profile needed (mesh must have T and c)."""
    t = mesh_nodes(mesh)
    n = t.size - 1
    flux = (1.0 - k) / (t[1:] ** (1.0 - k) - t[:-1] ** (1.0 - k))
    edges = np.concatenate([[t[0]], 0.5 * (t[1:] + t[:-1]), [t[-1]]])
    B_k = _power_integral(k, edges[:-1], edges[1:])[:n]
    B_km2 = _power_integral(k - 2.0, edges[:-1], edges[1:])[:n]
    diag = flux[:n].copy()
    diag[1:] += flux[: n - 1]
    diag -= q * B_k
    return DiscreteOperator(t, diag, -flux[: n - 1], B_k, B_km2, k, mesh)


# ---------------------------------------------------------------------------
# Sturm counts and eigenpairs
# ---------------------------------------------------------------------------


def sturm_count(diag, off, b, lam: float) -> int:
    """Number of eigenvalues of A v = lam' B v below ``lam``.

    Counts negative pivots of the LDL^T factorization of A - lam B.
    """
    d = (np.asarray(diag, float) - lam * np.asarray(b, float)).tolist()
    e2 = (np.asarray(off, float) ** 2).tolist()
    count = 0
    q = d[0]
    if q < 0:
        count += 1
    tiny = 1e-300
    for i in range(1, len(d)):
        if q == 0.0:
            q = tiny
        q = d[i] - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def negative_count(op: DiscreteOperator, which: Weight = Weight.K_WEIGHT, lam: float = 0.0) -> int:
    return sturm_count(op.diag, op.off, op.mass(which), lam)


def _tridiagonal_eigs(op: DiscreteOperator, which: Weight, n_eigs: int):
    b = op.mass(which)
    s = 1.0 / np.sqrt(b)
    d = op.diag * s * s
    e = op.off * s[:-1] * s[1:]
    # abstol at twice the underflow threshold gives high relative accuracy on graded matrices
    w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, n_eigs - 1), lapack_driver="stebz", tol=2 * np.finfo(float).tiny)
    return w, v * s[:, None]


@dataclass(frozen=True)
class SpectrumResult:
    which_weight: Weight
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    negative_count: int
    fine_eigenvalues: np.ndarray | None = None
    extrapolated: np.ndarray | None = None
    mesh_error: np.ndarray | None = None
    flagged: tuple[int, ...] = ()
    n_nodes: int = 0
    grid: np.ndarray | None = field(repr=False, default=None)

    @property
    def best(self) -> np.ndarray:
        """Extrapolated eigenvalues when available, else the base-mesh values."""
        return self.extrapolated if self.extrapolated is not None else self.eigenvalues

    def refinement_table(self) -> list[dict]:
        rows = []
        for i, lam in enumerate(self.eigenvalues):
            row = {"index": i, "coarse": float(lam)}
            if self.fine_eigenvalues is not None:
                row["fine"] = float(self.fine_eigenvalues[i])
                row["shift"] = float(self.fine_eigenvalues[i] - lam)
                row["extrapolated"] = float(self.extrapolated[i])
                row["mesh_error"] = float(self.mesh_error[i])
            rows.append(row)
        return rows

    def to_dict(self) -> dict:
        return {
            "type": "SpectrumResult",
            "schema": 1,
            "which_weight": self.which_weight.value,
            "eigenvalues": self.eigenvalues.tolist(),
            "negative_count": self.negative_count,
            "n_nodes": self.n_nodes,
            "flagged": list(self.flagged),
            "refinement": self.refinement_table(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumResult":
        if d.get("type") != "SpectrumResult":
            raise ValueError("not a SpectrumResult record")
        ref = d.get("refinement", [])
        has_fine = bool(ref) and "fine" in ref[0]
        arr = lambda key: np.array([r[key] for r in ref]) if has_fine else None  # noqa: E731
        return cls(
            Weight(d["which_weight"]),
            np.array(d["eigenvalues"]),
            np.empty((0, 0)),
            int(d["negative_count"]),
            arr("fine"),
            arr("extrapolated"),
            arr("mesh_error"),
            tuple(d.get("flagged", ())),
            int(d.get("n_nodes", 0)),
        )

    def eigvec_csv_rows(self):
        header = ("t",) + tuple(f"v{i}" for i in range(self.eigenvectors.shape[1]))
        return [header] + [(float(t),) + tuple(map(float, row)) for t, row in zip(self.grid, self.eigenvectors)]


def eigen(op: DiscreteOperator, which_weight: Weight = Weight.KM2_WEIGHT, n_eigs: int = 3, richardson: bool = True) -> SpectrumResult:
    """Smallest ``n_eigs`` eigenpairs of A v = lam B v.

    Eigenvalues come from bisection on the Sturm sequence with eigenvectors
    by inverse iteration (LAPACK stebz/stein on the symmetrically scaled
    pencil). With ``richardson`` the problem is re-solved on the mesh with
    halved xi-spacing and ``(4 lam_{h/2} - lam_h)/3`` is attached, with
    ``|lam_{h/2} - lam_h|/3`` as the error estimate.
    """
    which_weight = Weight(which_weight)
    n_eigs = min(n_eigs, op.n)
    flagged = []
    try:
        w, v = _tridiagonal_eigs(op, which_weight, n_eigs)
    except LinAlgError:
        w, v = np.full(n_eigs, np.nan), np.full((op.n, n_eigs), np.nan)
        flagged = list(range(n_eigs))
    neg = negative_count(op, which_weight)
    fine = extr = err = None
    if richardson:
        opf = op.refined()
        try:
            wf, _ = _tridiagonal_eigs(opf, which_weight, n_eigs)
        except LinAlgError:
            wf = np.full(n_eigs, np.nan)
            flagged = list(range(n_eigs))
        fine = wf
        extr = (4.0 * wf - w) / 3.0
        err = np.abs(wf - w) / 3.0
    return SpectrumResult(which_weight, w, v, neg, fine, extr, err, tuple(flagged), op.n, op.nodes)


# ---------------------------------------------------------------------------
# spectral identities
# ---------------------------------------------------------------------------


def derivative_on_nodes(op: DiscreteOperator) -> np.ndarray:
    return op.profile.evaluate(op.nodes)[1]


def rayleigh_km2(op: DiscreteOperator, w: np.ndarray | None = None) -> float:
    """Rayleigh quotient of w (default V') for the t^{k-2} mass."""
    w = derivative_on_nodes(op) if w is None else w
    return op.form(w) / float(np.dot(w * op.B_km2, w))


def eigvec_error(op: DiscreteOperator, vec: np.ndarray, which: Weight = Weight.KM2_WEIGHT) -> float:
    """Relative weighted L2 distance between ``vec`` and the best multiple of V'."""
    W = derivative_on_nodes(op)
    b = op.mass(which)
    c = np.dot(vec * b, W) / np.dot(W * b, W)
    diff = vec - c * W
    return float(np.sqrt(np.dot(diff * b, diff) / np.dot((c * W) * b, c * W)))


def morse_index_in_E(profile, spec=None, mesh: MeshParams | None = None, check_refined: bool = True) -> int:
    """Negative count of the t^k-weighted problem; checked on the halved mesh too."""
    op = assemble(profile, spec, mesh)
    m = negative_count(op, Weight.K_WEIGHT)
    if check_refined:
        m2 = negative_count(op.refined(), Weight.K_WEIGHT)
        if m2 != m:
            raise UnresolvedDegeneracy(f"negative count changes under refinement ({m} -> {m2})")
    return m


@dataclass(frozen=True)
class DegeneracyReport:
    n_alpha: int
    resolved: bool
    band: float
    near_zero: tuple[float, ...]
    eigenvalues: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"n_alpha": self.n_alpha, "resolved": self.resolved, "band": self.band, "near_zero": list(self.near_zero), "eigenvalues": list(self.eigenvalues)}


def degeneracy_report(op: DiscreteOperator, n_eigs: int = 4, band_factor: float = 10.0, band_floor: float = 1e-9) -> DegeneracyReport:
    """Count K_WEIGHT eigenvalues within the zero band after extrapolation.

    The band is ``band_factor`` times the mesh-error estimate of each
    eigenvalue (at least ``band_floor``). An eigenvalue whose coarse and fine
    values straddle zero while the extrapolated value lies outside its band
    cannot be classified and marks the report unresolved.
    """
    spec = eigen(op, Weight.K_WEIGHT, n_eigs)
    count, near, resolved, bands = 0, [], True, []
    for lam, lf, lr, err in zip(spec.eigenvalues, spec.fine_eigenvalues, spec.extrapolated, spec.mesh_error):
        band = max(band_factor * err, band_floor)
        bands.append(band)
        if abs(lr) <= band:
            count += 1
            near.append(float(lr))
        elif np.sign(lam) != np.sign(lf) or np.sign(lf) != np.sign(lr):
            resolved = False
            near.append(float(lr))
    return DegeneracyReport(count, resolved, float(max(bands)), tuple(near), tuple(map(float, spec.extrapolated)))


def degeneracy(profile, spec=None, mesh: MeshParams | None = None, **kw) -> int:
    """n_alpha in {0, 1, 2}; raises UnresolvedDegeneracy when the band is ambiguous."""
    rep = degeneracy_report(assemble(profile, spec, mesh), **kw)
    if not rep.resolved:
        raise UnresolvedDegeneracy(f"eigenvalue near zero not resolved: {rep.near_zero}")
    return rep.n_alpha


def mode_coefficient(i: int, alpha: float, N: int) -> float:
    """4 mu_i / (2 + alpha)^2: the t^{k-2} coefficient of spherical mode i."""
    return 4.0 * sg.mu(i, N) / (2.0 + alpha) ** 2


def numeric_morse_index(op: DiscreteOperator, alpha: float, N: int, symmetric: bool = False, i_max: int = 200):
    """Sum over spherical modes i of N_i times the negative count of A + c_i B_km2.

    Returns ``(m, per_mode)`` where per_mode lists the negative counts for
    i = 0, 1, ... up to the first mode without negative directions. With
    ``symmetric`` every mode counts once (one invariant harmonic per degree).
    """
    total, per_mode = 0, []
    for i in range(i_max):
        c = mode_coefficient(i, alpha, N)
        neg = sturm_count(op.diag + c * op.B_km2, op.off, op.B_k, 0.0)
        per_mode.append(neg)
        if neg == 0:
            break
        total += neg * (1 if symmetric else sg.multiplicity(i, N))
    return total, per_mode


def planted_zero_mode(profile, mesh: MeshParams | None = None) -> DiscreteOperator:
    """Operator whose discrete kernel contains the nodal V' exactly."""
    return assemble(profile, mesh=mesh, potential="planted")
