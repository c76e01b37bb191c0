"""Exact spherical-harmonic bookkeeping for the radial solution u_alpha.

Everything here is integer or rational arithmetic. Floats enter only as the
weight exponent alpha, which is converted exactly with :class:`fractions.Fraction`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

GUARD = 1e-9


class BoundaryError(ValueError):
    """The Morse index is requested exactly at a jump (even alpha)."""


def mu(i: int, N: int) -> int:
    """i-th eigenvalue i(N-2+i) of the Laplace-Beltrami operator on S^{N-1}."""
    return i * (N - 2 + i)


def multiplicity(i: int, N: int) -> int:
    """Dimension of the degree-i spherical harmonics on S^{N-1}."""
    if i < 0 or N < 2:
        raise ValueError("need i >= 0 and N >= 2")
    if i == 0:
        return 1
    return (N + 2 * i - 2) * math.factorial(N + i - 3) // (math.factorial(N - 2) * math.factorial(i))


def multiplicity_binomial(i: int, N: int) -> int:
    """Same count as C(N+i-1, N-1) - C(N+i-3, N-1)."""
    lower = math.comb(N + i - 3, N - 1) if i >= 2 else 0
    return math.comb(N + i - 1, N - 1) - lower


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

_PRIME = 2_147_483_629  # largest prime below 2**31


def _monomials(degree: int, N: int) -> list[tuple[int, ...]]:
    out = []
    for combo in itertools.combinations_with_replacement(range(N), degree):
        e = [0] * N
        for j in combo:
            e[j] += 1
        out.append(tuple(e))
    return out


def _laplacian_matrix(i: int, N: int) -> np.ndarray:
    """Integer matrix of the Laplacian from degree-i to degree-(i-2) monomials."""
    src = _monomials(i, N)
    dst = _monomials(i - 2, N)
    index = {e: r for r, e in enumerate(dst)}
    mat = np.zeros((len(dst), len(src)), dtype=np.int64)
    for c, e in enumerate(src):
        for j in range(N):
            if e[j] >= 2:
                f = list(e)
                f[j] -= 2
                mat[index[tuple(f)], c] += e[j] * (e[j] - 1)
    return mat


def _rank_mod_p(mat: np.ndarray, p: int = _PRIME) -> int:
    a = np.mod(mat, p).astype(np.int64)
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(a[rank:, c])[0]
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        inv = pow(int(a[rank, c]), p - 2, p)
        a[rank] = (a[rank] * inv) % p
        others = np.nonzero(a[:, c])[0]
        others = others[others != rank]
        if others.size:
            factors = a[others, c].reshape(-1, 1)
            # products stay below 2**62
            a[others] = (a[others] - (factors * a[rank]) % p) % p
        rank += 1
    return rank


def _rank_fraction(mat: np.ndarray) -> int:
    rows = [[Fraction(int(x)) for x in row] for row in mat]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / pr[c]
                rows[r] = [x - f * y for x, y in zip(rows[r], pr)]
        rank += 1
    return rank


def harmonic_dim_oracle(i: int, N: int) -> int:
    """Nullity of the Laplacian on homogeneous degree-i polynomials in N variables.

    The rank is first computed modulo a large prime; full row rank there
    certifies full rank over the rationals. Anything else falls back to exact
    fraction elimination.
    """
    if i > 8 or N > 8:
        raise ValueError("oracle limited to i <= 8, N <= 8")
    if i < 0 or N < 1:
        raise ValueError("need i >= 0, N >= 1")
    dim = math.comb(N + i - 1, N - 1)
    if i < 2:
        return dim
    mat = _laplacian_matrix(i, N)
    rank = _rank_mod_p(mat)
    if rank < mat.shape[0]:
        rank = _rank_fraction(mat)
    return dim - rank


# ---------------------------------------------------------------------------
# degeneracy values and Morse indices
# ---------------------------------------------------------------------------


def k_exact(alpha: Fraction, N: int) -> Fraction:
    return (2 * N - 2 + alpha) / (2 + alpha)


def degeneracy_gap(i: int, alpha, N: int) -> Fraction:
    """4 mu_i / (2+alpha)^2 - k(alpha); vanishes exactly at alpha = 2(i-1)."""
    a = Fraction(alpha)
    return Fraction(4 * mu(i, N)) / (2 + a) ** 2 - k_exact(a, N)


def degeneracy_alphas(i_max: int) -> list[int]:
    """Values alpha = 2(i-1), i = 2..i_max+1, where the radial solution degenerates."""
    return [2 * (i - 1) for i in range(2, i_max + 2)]


def degeneracy_scan(N: int, i_max: int = 12, alpha_max: float = 20.0, step: float = 1e-3, guard: float = GUARD):
    """Sign-change scan of the degeneracy condition on a uniform alpha grid.

    Returns ``(roots, false_positives)``: ``roots`` lists ``(i, alpha)`` for every
    bracketed sign change or exact zero in (0, alpha_max); ``false_positives``
    lists grid points farther than ``guard`` from an even integer where the gap
    is within ``guard`` of zero.
    """
    n = int(round(alpha_max / step))
    alphas = [j * step for j in range(1, n)]
    roots: list[tuple[int, float]] = []
    false_pos: list[tuple[int, float]] = []
    for i in range(0, i_max + 1):
        m4 = 4 * mu(i, N)
        prev_a = None
        prev_s = None
        for af in alphas:
            # cleared denominators: sign of 4 mu_i - (2N-2+a)(2+a)
            val = m4 - (2 * N - 2 + af) * (2 + af)
            s = (val > 0) - (val < 0)
            if s == 0:
                roots.append((i, af))
            elif prev_s is not None and prev_s != 0 and s != prev_s:
                roots.append((i, _refine_root(i, N, prev_a, af)))
            near_even = abs(af - 2 * round(af / 2)) <= guard
            gap = m4 / (2 + af) ** 2 - (2 * N - 2 + af) / (2 + af)
            if not near_even and abs(gap) <= 2 * guard and abs(float(degeneracy_gap(i, af, N))) <= guard:
                false_pos.append((i, af))
            prev_a, prev_s = af, s
    return roots, false_pos


def _refine_root(i: int, N: int, lo: float, hi: float) -> float:
    g = lambda a: 4 * mu(i, N) - (2 * N - 2 + a) * (2 + a)
    glo = g(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0 or hi - lo < 1e-15:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _even_index(alpha: float, guard: float = GUARD) -> int | None:
    """Return i when alpha is within guard of 2i (i >= 1), else None."""
    i = round(alpha / 2)
    if i >= 1 and abs(alpha - 2 * i) <= guard:
        return int(i)
    return None


def _negative_modes(alpha, N: int, side: int = 0):
    """Indices i with 4 mu_i/(2+alpha)^2 < k(alpha), optionally at alpha +/- eps."""
    a = Fraction(alpha)
    out = []
    i = 0
    while True:
        gap = degeneracy_gap(i, a, N)
        if gap < 0 or (gap == 0 and side > 0):
            out.append(i)
            i += 1
            continue
        break
    return out


def morse_index(alpha: float, N: int) -> int:
    """Morse index of u_alpha: sum of multiplicities over 0 <= i < 1 + alpha/2."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if _even_index(alpha) is not None:
        raise BoundaryError(f"Morse index jumps at alpha={alpha}; use morse_index_one_sided")
    return sum(multiplicity(i, N) for i in _negative_modes(alpha, N))


def morse_index_one_sided(alpha_even: int, N: int, side: int) -> int:
    """Morse index at alpha_even + side*eps for infinitesimal eps."""
    if side not in (-1, 1):
        raise ValueError("side must be -1 or +1")
    return sum(multiplicity(i, N) for i in _negative_modes(alpha_even, N, side))


def symmetric_morse_index(alpha: float, N: int) -> int:
    """Morse index restricted to O(N-1)-invariant functions: one mode per degree."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if _even_index(alpha) is not None:
        raise BoundaryError(f"symmetric Morse index jumps at alpha={alpha}")
    return len(_negative_modes(alpha, N))


def symmetric_morse_index_one_sided(alpha_even: int, N: int, side: int) -> int:
    if side not in (-1, 1):
        raise ValueError("side must be -1 or +1")
    return len(_negative_modes(alpha_even, N, side))


def kernel_dimension(alpha: float, N: int, n_alpha: int = 0) -> int:
    """Dimension of the solution space of the linearized problem at u_alpha."""
    if n_alpha not in (0, 1, 2):
        raise ValueError("n_alpha must be 0, 1 or 2")
    i = _even_index(alpha)
    if i is None and abs(alpha) <= GUARD:
        i = 0
    if i is None:
        return n_alpha
    nonradial = (N + 2 * i) * math.factorial(N + i - 2) // (math.factorial(N - 2) * math.factorial(i + 1))
    return n_alpha + nonradial


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MorseReport:
    alpha: float
    N: int
    m_closed: int | None
    m_numeric: int | None
    m_symmetric: int | None
    is_bifurcation_value: bool
    kernel_dim: int
    n_alpha_input: int = 0
    one_sided: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MorseReport":
        return cls(**d)


def morse_report(alpha: float, N: int, n_alpha: int = 0, m_numeric: int | None = None) -> MorseReport:
    i = _even_index(alpha)
    if i is None:
        return MorseReport(
            alpha, N, morse_index(alpha, N), m_numeric, symmetric_morse_index(alpha, N), False, kernel_dimension(alpha, N, n_alpha), n_alpha
        )
    sides = {
        "m_left": morse_index_one_sided(2 * i, N, -1),
        "m_right": morse_index_one_sided(2 * i, N, +1),
        "m_symmetric_left": symmetric_morse_index_one_sided(2 * i, N, -1),
        "m_symmetric_right": symmetric_morse_index_one_sided(2 * i, N, +1),
    }
    return MorseReport(alpha, N, None, m_numeric, None, True, kernel_dimension(alpha, N, n_alpha), n_alpha, sides)


@dataclass(frozen=True)
class BranchReport:
    alpha_i: int
    i: int
    branch_count: int
    groups: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"alpha_i": self.alpha_i, "i": self.i, "branch_count": self.branch_count, "groups": list(self.groups)}

    @classmethod
    def from_dict(cls, d: dict) -> "BranchReport":
        return cls(d["alpha_i"], d["i"], d["branch_count"], list(d["groups"]))


def branch_census(alpha_even, N: int) -> BranchReport:
    """Count of nonradial continua bifurcating at alpha = 2i and their symmetry groups."""
    if isinstance(alpha_even, float):
        if not alpha_even.is_integer():
            raise ValueError(f"alpha={alpha_even} is not an even integer")
        alpha_even = int(alpha_even)
    if alpha_even < 2 or alpha_even % 2:
        raise ValueError(f"alpha={alpha_even} is not an even integer >= 2")
    i = alpha_even // 2
    if i % 2 == 0:
        groups = [f"O({N - 1})"]
    else:
        groups = [f"O({h})xO({N - h})" for h in range(1, N // 2 + 1)]
    return BranchReport(alpha_even, i, len(groups), groups)


def morse_table(N: int, alphas) -> list[dict]:
    """Rows (alpha, side, m, m_H, kernel_dim); even alpha gives a '-' and a '+' row."""
    rows = []
    for a in alphas:
        i = _even_index(a)
        if i is None:
            rows.append(
                {"alpha": a, "side": "", "m": morse_index(a, N), "m_H": symmetric_morse_index(a, N), "kernel_dim": kernel_dimension(a, N, 0)}
            )
        else:
            for side, tag in ((-1, "-"), (1, "+")):
                rows.append(
                    {
                        "alpha": a,
                        "side": tag,
                        "m": morse_index_one_sided(2 * i, N, side),
                        "m_H": symmetric_morse_index_one_sided(2 * i, N, side),
                        "kernel_dim": kernel_dimension(a, N, 0),
                    }
                )
    return rows
