"""JLO cochains on the flat torus, their small-time limit and the pairing with
projections.

Simplex integrals of products of heat operators are evaluated exactly in the
eigenbasis of ``D^2``: with eigenvalues ``mu_0 .. mu_n`` the weight
``int_simplex exp(-t sum s_j mu_j) ds`` is a divided difference of the
exponential. A block-matrix exponential gives an independent route for any
degree.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from .charclass import FormField, IdempotentField, TorusGrid, integrate_top
from .heat import heat_supertrace
from .models import (
    OperatorMatrix,
    SpectralModel,
    UnsupportedModelError,
    dirac_commutator,
    iterated_commutator,
    multiplication_operator,
)

__all__ = [
    "JloQuery",
    "JloValue",
    "SimplexMoment",
    "LimitResult",
    "PairingResult",
    "ConjugationTable",
    "WindowError",
    "IndeterminateIndexError",
    "divided_difference_exp",
    "simplex_exp_batch",
    "simplex_moment",
    "moment_coefficient",
    "jlo_cochain",
    "richardson",
    "de_rham_side",
    "jlo_small_t_limit",
    "spectral_index",
    "k_pairing_index",
    "conjugation_expansion_residual",
]

_TAYLOR_DEGREE = 17


class WindowError(ValueError):
    """A time lies outside the range where truncation is controlled."""


class IndeterminateIndexError(RuntimeError):
    """No clear gap separates near-zero singular values from the rest."""


# ---------------------------------------------------------------------------
# Divided differences and simplex moments


def simplex_exp_batch(lambdas: np.ndarray, t: float) -> np.ndarray:
    """``int_simplex exp(-t sum_j s_j lambda_j) ds`` for each row of ``lambdas``.

    The value is the corner entry of ``exp(Z)`` where ``Z`` is bidiagonal with
    ``-t (lambda_j - min lambda)`` on the diagonal and ones above it; the
    shift is undone by ``exp(-t min lambda)``. ``exp`` is taken by Taylor
    expansion after scaling each matrix to norm <= 1/2, then squaring.
    """
    lam = np.atleast_2d(np.asarray(lambdas, dtype=float))
    B, n1 = lam.shape
    lmin = lam.min(axis=1)
    if n1 == 1:
        return np.exp(-t * lam[:, 0])
    Z = np.zeros((B, n1, n1))
    i = np.arange(n1)
    Z[:, i, i] = -t * (lam - lmin[:, None])
    Z[:, i[:-1], i[1:]] = 1.0
    nrm = np.abs(Z).sum(axis=2).max(axis=1)
    s = np.maximum(0, np.ceil(np.log2(nrm / 0.5))).astype(int)
    Z /= (2.0**s)[:, None, None]
    E = np.broadcast_to(np.eye(n1), Z.shape).copy()
    term = E.copy()
    for k in range(1, _TAYLOR_DEGREE + 1):
        term = term @ Z / k
        E += term
    for j in range(int(s.max(initial=0))):
        m = s > j
        E[m] = E[m] @ E[m]
    return E[:, 0, -1] * np.exp(-t * lmin)


def divided_difference_exp(lambdas: Sequence[float], t: float) -> float:
    """Simplex integral ``int_{Delta_n} exp(-t sum s_i lambda_i) ds``.

    Equal to the ``n``-th divided difference of ``exp`` at the points
    ``-t lambda_i``; finite and smooth as points coalesce.

    Examples
    --------
    >>> round(divided_difference_exp([0.0, 1.0], 1.0), 6)
    0.632121
    """
    if not t > 0:
        raise ValueError("t must be positive")
    return float(simplex_exp_batch(np.asarray(lambdas, dtype=float)[None, :], t)[0])


def simplex_moment(k: Sequence[int]) -> Fraction:
    """Exact ``int_{Delta_n} sigma_1^k_1 ... sigma_n^k_n ds``, ``sigma_j = s_0 + ... + s_{j-1}``.

    Equals ``1 / prod_j (k_1 + ... + k_j + j)``.
    """
    k = [int(x) for x in k]
    if not k or any(x < 0 for x in k):
        raise ValueError("multi-index must be non-empty with nonnegative entries")
    den = 1
    acc = 0
    for j, kj in enumerate(k, start=1):
        acc += kj
        den *= acc + j
    return Fraction(1, den)


def moment_coefficient(k: Sequence[int]) -> Fraction:
    """Signed coefficient ``(-1)^|k| / (k_1! ... k_n!) * simplex_moment(k)``.

    This is the weight of ``a_1^(k_1) ... a_n^(k_n)`` when all heat factors
    are pushed to the right.
    """
    k = [int(x) for x in k]
    fact = math.prod(math.factorial(x) for x in k)
    return Fraction((-1) ** sum(k), fact) * simplex_moment(k)


@dataclass(frozen=True)
class SimplexMoment:
    multi_index: tuple[int, ...]
    value: Fraction

    @classmethod
    def of(cls, k: Sequence[int]) -> "SimplexMoment":
        return cls(tuple(int(x) for x in k), simplex_moment(k))


# ---------------------------------------------------------------------------
# Cochains


Argument = Any  # Fourier mapping, grid samples, or OperatorMatrix


@dataclass(frozen=True)
class JloQuery:
    """Arguments of ``JLO_n^t(a_0, ..., a_n)``.

    ``args`` holds ``a_0 .. a_n`` as Fourier mappings ``{(p, q): c}``, grid
    samples, or ready :class:`OperatorMatrix` instances (``a_0`` as
    multiplication operator, the others are commuted with ``D``).
    """

    model: SpectralModel
    degree: int
    args: tuple
    t: float
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.degree < 0 or self.degree % 2:
            raise ValueError("degree must be even and nonnegative")
        if len(self.args) != self.degree + 1:
            raise ValueError(f"degree {self.degree} needs {self.degree + 1} arguments")
        if not self.t > 0:
            raise ValueError("t must be positive")

    def with_t(self, t: float) -> "JloQuery":
        return JloQuery(self.model, self.degree, self.args, t, self.metadata)


@dataclass(frozen=True)
class JloValue:
    value: complex
    tail_estimate: float
    t: float
    degree: int
    warnings: tuple[str, ...] = ()

    def as_record(self) -> dict:
        return {
            "degree": self.degree,
            "t": self.t,
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "tail_bound": self.tail_estimate,
        }


def _is_constant_one(a) -> bool:
    if isinstance(a, Mapping):
        return set(a) <= {(0, 0)} and all(np.all(np.asarray(v) == 1) for v in a.values()) and bool(a)
    if isinstance(a, (int, float, complex)):
        return a == 1
    return False


def _as_operator(model: SpectralModel, a) -> OperatorMatrix:
    if isinstance(a, OperatorMatrix):
        return a
    if isinstance(a, (int, float, complex)):
        a = {(0, 0): a}
    return multiplication_operator(model, a)


def _classes(mu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scale = max(1.0, float(np.max(np.abs(mu))))
    vals, cls = np.unique(np.round(mu / scale, 12), return_inverse=True)
    return vals * scale, cls


def _jlo2_spectral(A, B1, B2, mu, gamma, t) -> complex:
    vals, cls = _classes(mu)
    K = vals.size
    a, b, c = np.meshgrid(vals, vals, vals, indexing="ij")
    W = simplex_exp_batch(np.stack([a.ravel(), b.ravel(), c.ravel()], axis=1), t).reshape(K, K, K)
    GA = gamma[:, None] * A
    pair = (cls[:, None] * K + cls[None, :]).ravel()
    total = 0j
    for g in range(K):
        L = np.nonzero(cls == g)[0]
        G = B2[:, L] @ GA[L, :]
        S = (B1 * G.T).ravel()
        sr = np.bincount(pair, weights=S.real, minlength=K * K).reshape(K, K)
        si = np.bincount(pair, weights=S.imag, minlength=K * K).reshape(K, K)
        total += np.sum((sr + 1j * si) * W[:, :, g])
    return t * total


def _jlo_block(A, Bs, mu, gamma, t) -> complex:
    """Van Loan block exponential: corner of ``exp`` of a block bidiagonal matrix."""
    n = len(Bs)
    N = mu.size
    big = np.zeros(((n + 1) * N, (n + 1) * N), dtype=complex)
    for j in range(n + 1):
        big[j * N : (j + 1) * N, j * N : (j + 1) * N] = np.diag(-t * mu)
    for j, Bj in enumerate(Bs):
        big[j * N : (j + 1) * N, (j + 1) * N : (j + 2) * N] = Bj
    corner = expm(big)[:N, n * N :]
    return t ** (n / 2) * np.sum(gamma * np.einsum("ij,ji->i", A, corner))


def jlo_cochain(q: JloQuery, method: str = "auto") -> JloValue:
    """``t^(n/2) int_{Delta_n} Str(a_0 e^{-t s_0 D^2} [D, a_1] ... [D, a_n] e^{-t s_n D^2}) ds``.

    Parameters
    ----------
    q : JloQuery
    method : {"auto", "spectral", "block"}
        ``"spectral"`` sums over classes of equal ``D^2`` eigenvalues with
        exact divided-difference weights (degrees 0 and 2); ``"block"``
        exponentiates a block bidiagonal matrix (any degree, small cutoffs).

    Returns
    -------
    JloValue
        Value with a heuristic estimate of the truncation tail.
    """
    model, n, t = q.model, q.degree, q.t
    if n == 0 and _is_constant_one(q.args[0]):
        st = heat_supertrace(model, t)
        return JloValue(complex(st.value), st.tail_bound, t, 0)
    if model.name != "flat_torus":
        raise UnsupportedModelError("cochains with non-constant arguments need the flat torus model")
    ops = [_as_operator(model, a) for a in q.args]
    colors = ops[0].colors
    if any(o.colors != colors for o in ops):
        raise ValueError("arguments have different matrix sizes")
    A = ops[0].matrix
    Bs = [dirac_commutator(model, o).matrix for o in ops[1:]]
    mu = model.d2_diagonal(colors)
    gamma = model.grading(colors)
    if method == "auto":
        method = "spectral" if n <= 2 else "block"
    if method == "spectral":
        if n == 0:
            value = complex(np.sum(gamma * np.diag(A) * np.exp(-t * mu)))
        elif n == 2:
            value = complex(_jlo2_spectral(A, Bs[0], Bs[1], mu, gamma, t))
        else:
            raise ValueError("spectral method covers degrees 0 and 2")
    elif method == "block":
        value = complex(_jlo_block(A, Bs, mu, gamma, t))
    else:
        raise ValueError(f"unknown method {method!r}")
    edge = 4 * np.pi**2 * model.cutoff**2
    norms = math.prod(float(np.linalg.norm(m, 2)) for m in [A, *Bs])
    tail = t ** (n / 2) * norms * mu.size * math.exp(-t * edge)
    notes = tuple(w for o in ops for w in o.warnings)
    return JloValue(value, tail, t, n, notes)


# ---------------------------------------------------------------------------
# Small-time limit


def richardson(ts: Sequence[float], values: Sequence[complex], order: int = 2) -> complex:
    """Value at ``t = 0`` of the polynomial of degree ``order`` through the last
    ``order + 1`` samples (eliminates the ``t, ..., t^order`` corrections)."""
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(values, dtype=complex)
    if ts.size < order + 1:
        raise ValueError(f"need at least {order + 1} samples for order {order}")
    x = ts[-(order + 1) :]
    y = vals[-(order + 1) :]
    # Lagrange weights at 0
    w = np.array([np.prod([-x[m] / (x[j] - x[m]) for m in range(x.size) if m != j]) for j in range(x.size)])
    return complex(np.sum(w * y))


def _samples(a, grid: TorusGrid) -> np.ndarray:
    x, y = grid.nodes()
    if isinstance(a, Mapping):
        out = np.zeros(grid.shape, dtype=complex)
        for (p, q), c in a.items():
            out += complex(c) * np.exp(2j * np.pi * (p * x + q * y))
        return out
    if isinstance(a, (int, float, complex)):
        return np.full(grid.shape, complex(a))
    arr = np.asarray(a, dtype=complex)
    if arr.shape != grid.shape:
        raise ValueError("grid samples do not match the quadrature grid")
    return arr


def de_rham_side(args: Sequence, grid_size: int = 64) -> complex:
    """``(n! (2 pi i)^(n/2))^-1 int a_0 da_1 ... da_n`` on the flat unit torus.

    Â and ch are trivial for the flat untwisted torus; the integral vanishes
    for ``n > 2`` by degree and for ``n = 0`` since there is no top form.
    """
    n = len(args) - 1
    if n != 2:
        return 0j
    grid = TorusGrid(grid_size)
    a0, a1, a2 = (_samples(a, grid) for a in args)
    d1 = grid.gradient(a1)
    d2 = grid.gradient(a2)
    form = FormField(grid, {(): a0}).wedge(FormField(grid, {(1,): d1[0], (2,): d1[1]})).wedge(
        FormField(grid, {(1,): d2[0], (2,): d2[1]})
    )
    return integrate_top(form) / (math.factorial(n) * (2j * math.pi) ** (n / 2))


def _window_bound(model: SpectralModel, window: float) -> float:
    lam2 = 4 * np.pi**2 * (model.cutoff + 1) ** 2
    return window / lam2


@dataclass(frozen=True)
class LimitResult:
    ts: np.ndarray
    values: np.ndarray
    extrapolated: complex
    de_rham: complex
    discrepancy: float
    relative_discrepancy: float

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "value_re", "value_im"])
            for t, v in zip(self.ts, self.values):
                w.writerow([repr(float(t)), repr(v.real), repr(v.imag)])
            w.writerow(["0", repr(self.extrapolated.real), repr(self.extrapolated.imag)])
        return path


def jlo_small_t_limit(
    query: JloQuery,
    ts: Sequence[float],
    order: int = 2,
    window: float = 5.0,
    grid_size: int = 64,
) -> LimitResult:
    """Extrapolate ``JLO_n^t`` to ``t = 0`` and compare with the de Rham side.

    ``ts`` must decrease and satisfy ``t * lambda_cut^2 >= window`` with
    ``lambda_cut^2 = 4 pi^2 (M + 1)^2``.
    """
    ts = np.asarray(ts, dtype=float)
    if ts.size < 2 or np.any(np.diff(ts) >= 0):
        raise ValueError("t sequence must be strictly decreasing")
    if query.model.name == "flat_torus":
        tmin = _window_bound(query.model, window)
        if ts[-1] < tmin:
            raise WindowError(f"t = {ts[-1]:g} violates t * lambda_cut^2 >= {window} (needs t >= {tmin:.3g})")
    vals = np.array([jlo_cochain(query.with_t(float(t))).value for t in ts])
    ext = richardson(ts, vals, min(order, ts.size - 1))
    if query.model.name == "flat_torus" or query.degree != 0:
        dr = de_rham_side(query.args, grid_size)
    else:
        dr = complex(query.model.index())
    disc = abs(ext - dr)
    rel = disc / abs(dr) if abs(dr) > 0 else math.inf if disc > 0 else 0.0
    return LimitResult(ts, vals, ext, dr, disc, rel)


# ---------------------------------------------------------------------------
# Pairing with projections


@dataclass(frozen=True)
class SpectralIndex:
    index: int
    signed_weight: float
    near_zero: np.ndarray
    threshold: float
    gap_ratio: float
    singular_values: np.ndarray


def spectral_index(model: SpectralModel, e: IdempotentField | None, gap_min: float = 100.0) -> SpectralIndex:
    """Signed count of zero modes of ``P_e D P_e`` on the truncated space.

    ``P_e`` projects onto the span of the eigenvectors of ``op(e)`` with
    eigenvalue above 1/2. The chiral block ``P_e D_+ P_e`` is square after
    truncation, so kernel and cokernel vectors come in pairs; spurious ones
    concentrate on the edge of the Fourier box. Each near-zero singular pair
    contributes (weight of the kernel vector in ``|m|, |n| <= M/2``) minus
    (same for the cokernel vector).
    """
    mm, nn = model.modes()
    M = model.cutoff
    if e is None:
        k = 1
        W = np.eye(mm.size, dtype=complex)
    else:
        op = multiplication_operator(model, e.values)
        k = op.colors
        A = op.matrix[::2, ::2]  # chirality + components; index mode * k + c
        w, U = np.linalg.eigh(A)
        W = U[:, w > 0.5]
    dplus = np.repeat(-2 * np.pi * (mm + 1j * nn), k)
    B = W.conj().T @ (dplus[:, None] * W)
    u, s, vh = np.linalg.svd(B)
    order = np.argsort(s)
    s_sorted = s[order]
    floor = np.finfo(float).eps * max(s_sorted[-1], 1.0)
    half = max(1, s_sorted.size // 2)
    ratios = s_sorted[1 : half + 1] / np.maximum(s_sorted[:half], floor)
    i_star = int(np.argmax(ratios))
    gap = float(ratios[i_star])
    if gap < gap_min:
        raise IndeterminateIndexError(f"largest relative singular-value gap {gap:.3g} below {gap_min:g}")
    chosen = order[: i_star + 1]
    inner = np.repeat((np.abs(mm) <= M // 2) & (np.abs(nn) <= M // 2), k)
    signed = 0.0
    for j in chosen:
        right = W @ vh[j].conj()
        left = W @ u[:, j]
        signed += np.sum(np.abs(right[inner]) ** 2) - np.sum(np.abs(left[inner]) ** 2)
    idx = int(round(signed))
    if abs(signed - idx) > 0.25:
        raise IndeterminateIndexError(f"signed zero-mode weight {signed:.3f} is not near an integer")
    threshold = float(np.sqrt(s_sorted[i_star] * s_sorted[i_star + 1])) if s_sorted[i_star] > 0 else float(s_sorted[i_star + 1] / 2)
    return SpectralIndex(idx, float(signed), s_sorted[: i_star + 1], threshold, gap, s_sorted)


@dataclass(frozen=True)
class PairingResult:
    pairing: complex
    spectral_index: int
    terms: dict
    index_detail: SpectralIndex
    t: float
    degree_cap: int


def k_pairing_index(
    model: SpectralModel,
    e: IdempotentField | None,
    t: float,
    degree_cap: int = 2,
) -> PairingResult:
    """Pairing of the JLO cocycle with ``[e]`` and the spectral index of ``e D e``.

    ``pairing = JLO_0(e) + sum_{k=1}^{cap/2} (-1)^k (2k)!/k! JLO_2k(e - 1/2, e, ..., e)``
    on the space amplified by the matrix size of ``e``; ``e = None`` means the
    unit, for which the pairing is ``Str exp(-t D^2)``.
    """
    if degree_cap < 0 or degree_cap % 2:
        raise ValueError("degree cap must be even and nonnegative")
    terms: dict[int, complex] = {}
    if e is None:
        st = heat_supertrace(model, t)
        terms[0] = complex(st.value)
        for k in range(1, degree_cap // 2 + 1):
            terms[2 * k] = 0j  # [D, 1] = 0
        total = terms[0]
        idx = spectral_index(model, None) if model.name == "flat_torus" else None
        if idx is None:
            idx = SpectralIndex(model.index(), float(model.index()), np.zeros(0), 0.0, math.inf, np.zeros(0))
        return PairingResult(total, idx.index, terms, idx, t, degree_cap)
    if not isinstance(e.domain, TorusGrid):
        raise UnsupportedModelError("projections must live on the torus grid")
    op = multiplication_operator(model, e.values)
    half = OperatorMatrix(op.matrix - 0.5 * np.eye(op.shape[0]), "even", op.colors)
    total = 0j
    for k in range(0, degree_cap // 2 + 1):
        n = 2 * k
        args = (op,) if n == 0 else (half,) + (op,) * n
        val = jlo_cochain(JloQuery(model, n, args, t)).value
        coeff = 1 if k == 0 else (-1) ** k * math.factorial(2 * k) / math.factorial(k)
        terms[n] = val
        total += coeff * val
    idx = spectral_index(model, e)
    return PairingResult(total, idx.index, terms, idx, t, degree_cap)


# ---------------------------------------------------------------------------
# Conjugation expansion


@dataclass(frozen=True)
class ConjugationTable:
    ts: np.ndarray
    residuals: np.ndarray
    order: int
    slope: float

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "residual", "K", "fitted_slope"])
            for t, r in zip(self.ts, self.residuals):
                w.writerow([repr(float(t)), repr(float(r)), self.order, repr(self.slope)])
        return path


def conjugation_expansion_residual(
    model: SpectralModel,
    a,
    order: int,
    ts: Sequence[float] | None = None,
) -> ConjugationTable:
    """Residual of ``e^{-tD^2} a e^{tD^2} ~ sum_{k<=K} (-t)^k/k! a^(k)`` over a t sweep.

    The exact side is a dense conjugation; the series uses
    :func:`iterated_commutator`. The slope of log residual against log t is
    fitted by least squares.
    """
    x = _as_operator(model, a)
    ts = np.geomspace(1e-4, 1e-3, 6) if ts is None else np.asarray(ts, dtype=float)
    mu = model.d2_diagonal(x.colors)
    res = []
    for t in ts:
        E = np.exp(-t * mu)
        exact = (E[:, None] * x.matrix) * (1 / E)[None, :]
        series = np.zeros_like(x.matrix)
        for k in range(order + 1):
            series += (-t) ** k / math.factorial(k) * iterated_commutator(model, x, k).matrix
        res.append(np.linalg.norm(exact - series, 2))
    res = np.array(res)
    slope = float(np.polyfit(np.log(ts), np.log(res), 1)[0])
    return ConjugationTable(ts, res, order, slope)
