"""Exactly solvable Dirac operators in dimension two.

Three geometries are provided:

* the flat unit-area torus, with an explicit plane-wave basis so that
  multiplication operators and commutators have exact matrix elements;
* the Landau-twisted torus (spinors tensored with a line bundle of flux ``k``);
* the round unit sphere carrying a monopole bundle of charge ``q``.

Chirality ``+1`` is the first spinor component. Spectra of the twisted models
are listed per chiral sector; ``eigenvalue**2`` is the eigenvalue of ``D^2`` on
that sector.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .charclass import IdempotentField, SphereGrid, TorusGrid

__all__ = [
    "SpectralModel",
    "OperatorMatrix",
    "UnsupportedModelError",
    "TruncationWarning",
    "flat_torus_dirac",
    "landau_model",
    "monopole_model",
    "multiplication_operator",
    "dirac_commutator",
    "iterated_commutator",
    "lichnerowicz_residual",
    "bott_projection",
    "bott_vector",
    "sphere_projection",
    "fourier_coefficients",
]

SIGMA = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
    dtype=complex,
)


class UnsupportedModelError(ValueError):
    """Requested operation needs data the model does not carry."""


class TruncationWarning(UserWarning):
    """Fourier support of an input exceeds half the mode cutoff."""


@dataclass(frozen=True)
class SpectralModel:
    """Diagonalized Dirac operator.

    Attributes
    ----------
    name : str
        ``"flat_torus"``, ``"landau"`` or ``"monopole"``.
    eigenvalues : ndarray
        Nonnegative ``|lambda|`` per listed level (``lambda**2`` is the D^2
        eigenvalue on the level's chiral sector).
    chirality : ndarray of int
        ``+1`` or ``-1`` per level.
    multiplicity : ndarray of int
    labels : tuple of str
    cutoff : int
        Mode, Landau-level or angular cutoff.
    charge : int
        Flux (Landau), charge (monopole) or 0.
    twist : float
        Scalar twisting-curvature strength (``B`` or ``q/2``).
    bochner : ndarray
        Bochner Laplacian eigenvalue per level, assembled independently of the
        D^2 spectrum.
    curvature_term : ndarray
        Chirality-diagonal twisting curvature ``F^{E/S}`` per level.
    scalar_curvature : float
    tail : callable
        ``tail(t)`` bounds the discarded part of ``sum mult * exp(-t lambda^2)``.
    """

    name: str
    eigenvalues: np.ndarray
    chirality: np.ndarray
    multiplicity: np.ndarray
    labels: tuple[str, ...]
    cutoff: int
    charge: int = 0
    twist: float = 0.0
    bochner: np.ndarray | None = None
    curvature_term: np.ndarray | None = None
    scalar_curvature: float = 0.0
    tail: Callable[[float], float] = field(default=lambda t: 0.0, repr=False, compare=False)
    dimension: int = 2

    def __post_init__(self):
        for name in ("eigenvalues", "chirality", "multiplicity", "bochner", "curvature_term"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.eigenvalues.size
        if not (self.chirality.size == self.multiplicity.size == len(self.labels) == n):
            raise ValueError("level arrays differ in length")
        if np.any(self.multiplicity < 1):
            raise ValueError("multiplicities must be >= 1")
        if not np.all(np.isin(self.chirality, (-1, 1))):
            raise ValueError("chirality must be +-1")

    @property
    def d2(self) -> np.ndarray:
        """D^2 eigenvalue per level."""
        return self.eigenvalues**2

    def zero_modes(self, atol: float = 1e-12) -> tuple[int, int]:
        """``(plus, minus)`` counts of zero modes including multiplicity."""
        z = np.abs(self.eigenvalues) <= atol
        plus = int(np.sum(self.multiplicity[z & (self.chirality > 0)]))
        minus = int(np.sum(self.multiplicity[z & (self.chirality < 0)]))
        return plus, minus

    def index(self) -> int:
        p, m = self.zero_modes()
        return p - m

    def to_csv(self, path: str | Path) -> Path:
        """Write ``eigenvalue, chirality, multiplicity, label`` rows."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eigenvalue", "chirality", "multiplicity", "label"])
            for lam, c, m, lab in zip(self.eigenvalues, self.chirality, self.multiplicity, self.labels):
                w.writerow([repr(float(lam)), int(c), int(m), lab])
        return path

    # --- plane-wave realization (flat torus only) -------------------------

    def _require_basis(self):
        if self.name != "flat_torus":
            raise UnsupportedModelError(
                f"{self.name} model has no plane-wave basis; matrix elements exist on the flat torus only"
            )

    def modes(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer Fourier labels ``(m, n)`` of the retained plane waves."""
        self._require_basis()
        r = np.arange(-self.cutoff, self.cutoff + 1)
        mm, nn = np.meshgrid(r, r, indexing="ij")
        return mm.ravel(), nn.ravel()

    def basis_size(self, colors: int = 1) -> int:
        self._require_basis()
        return 2 * colors * (2 * self.cutoff + 1) ** 2

    def grading(self, colors: int = 1) -> np.ndarray:
        """Chirality per basis vector; index ``(mode * colors + c) * 2 + s``."""
        nb = self.basis_size(colors) // 2
        return np.tile([1.0, -1.0], nb)

    def d2_diagonal(self, colors: int = 1) -> np.ndarray:
        """D^2 is diagonal in the plane-wave basis; its entries."""
        mm, nn = self.modes()
        return np.repeat(4 * np.pi**2 * (mm**2 + nn**2).astype(float), 2 * colors)

    def dirac_blocks(self) -> np.ndarray:
        """2x2 spinor block of D on each plane wave: ``-2 pi (m s1 + n s2)``."""
        mm, nn = self.modes()
        return -2 * np.pi * (mm[:, None, None] * SIGMA[0] + nn[:, None, None] * SIGMA[1])

    def dirac_matrix(self, colors: int = 1) -> "OperatorMatrix":
        """Dense D on the (optionally colour-amplified) truncated space."""
        blk = self.dirac_blocks()
        nb = blk.shape[0]
        out = np.zeros((nb, colors, 2, nb, colors, 2), dtype=complex)
        idx = np.arange(nb)
        for c in range(colors):
            out[idx, c, :, idx, c, :] = blk
        dim = 2 * colors * nb
        return OperatorMatrix(out.reshape(dim, dim), "odd", colors=colors)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on a truncated plane-wave basis with a parity flag."""

    matrix: np.ndarray
    parity: str = "even"
    colors: int = 1
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        if self.parity not in ("even", "odd"):
            raise ValueError("parity must be 'even' or 'odd'")
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def grading(self) -> np.ndarray:
        return np.tile([1.0, -1.0], self.shape[0] // 2)

    def parity_defect(self) -> float:
        """Norm of the block that the parity flag says must vanish."""
        g = self.grading()
        same = g[:, None] == g[None, :]
        mask = ~same if self.parity == "even" else same
        return float(np.max(np.abs(self.matrix[mask]), initial=0.0))

    def _combine(self, other, mat, parity):
        w = self.warnings + tuple(x for x in other.warnings if x not in self.warnings)
        return OperatorMatrix(mat, parity, self.colors, w)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        p = "even" if self.parity == other.parity else "odd"
        return self._combine(other, self.matrix @ other.matrix, p)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.parity != self.parity:
            raise ValueError("adding operators of different parity")
        return self._combine(other, self.matrix + other.matrix, self.parity)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.parity != self.parity:
            raise ValueError("subtracting operators of different parity")
        return self._combine(other, self.matrix - other.matrix, self.parity)

    def __mul__(self, c: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix * c, self.parity, self.colors, self.warnings)

    __rmul__ = __mul__

    def commutator(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self @ other - other @ self

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.conj().T, self.parity, self.colors, self.warnings)

    def norm(self) -> float:
        """Spectral norm."""
        return float(np.linalg.norm(self.matrix, 2))


# ---------------------------------------------------------------------------
# Model constructors


def _flat_tail(M: int) -> Callable[[float], float]:
    def tail(t: float) -> float:
        a = 4 * np.pi**2 * t
        one_dim = 2 * math.exp(-a * (M + 1) ** 2) / (1 - math.exp(-2 * a * (M + 1)))
        full = 1 + 1 / (2 * math.sqrt(math.pi * t))  # bound on sum over all m of exp(-a m^2)
        return 2 * 2 * full * one_dim

    return tail


def flat_torus_dirac(mode_cutoff: int) -> SpectralModel:
    """Untwisted Dirac operator on the unit-area flat torus.

    Plane waves ``exp(2 pi i (m x + n y))`` with ``|m|, |n| <= M`` and two
    spinor components; ``D = -2 pi (m sigma1 + n sigma2)`` on each wave.
    """
    M = int(mode_cutoff)
    if M < 2:
        raise ValueError("mode cutoff must be >= 2")
    r = np.arange(-M, M + 1)
    mm, nn = (a.ravel() for a in np.meshgrid(r, r, indexing="ij"))
    lam = 2 * np.pi * np.hypot(mm, nn)
    lap = 4 * np.pi**2 * (mm**2 + nn**2).astype(float)
    labels = tuple(f"({m},{n}){s}" for m, n in zip(mm, nn) for s in "+-")
    return SpectralModel(
        name="flat_torus",
        eigenvalues=np.repeat(lam, 2),
        chirality=np.tile([1, -1], mm.size),
        multiplicity=np.ones(2 * mm.size, dtype=int),
        labels=labels,
        cutoff=M,
        bochner=np.repeat(lap, 2),
        curvature_term=np.zeros(2 * mm.size),
        scalar_curvature=0.0,
        tail=_flat_tail(M),
    )


def landau_model(flux: int, level_cutoff: int = 64) -> SpectralModel:
    """Dirac operator on the unit-area torus twisted by a line bundle of flux ``k``.

    With ``B = 2 pi |k|`` the Bochner Laplacian has Landau levels
    ``B (2n + 1)`` of multiplicity ``|k|``; the Clifford term shifts them by
    ``-sign(k) B`` on chirality ``+`` and ``+sign(k) B`` on chirality ``-``.
    """
    k = int(flux)
    if k == 0:
        raise ValueError("flux must be nonzero; use flat_torus_dirac for k = 0")
    N = int(level_cutoff)
    if N < 1:
        raise ValueError("level cutoff must be >= 1")
    B = 2 * np.pi * abs(k)
    sgn = 1 if k > 0 else -1
    levels, chir, boch, curv, labels = [], [], [], [], []
    # sector carrying the zero modes: n = 0..N
    for n in range(N + 1):
        levels.append(2 * B * n)
        chir.append(sgn)
        boch.append(B * (2 * n + 1))
        curv.append(-B)
        labels.append(f"LL{n}{'+' if sgn > 0 else '-'}")
    for n in range(N):
        levels.append(2 * B * (n + 1))
        chir.append(-sgn)
        boch.append(B * (2 * n + 1))
        curv.append(B)
        labels.append(f"LL{n}{'-' if sgn > 0 else '+'}")
    mult = abs(k)

    def tail(t: float) -> float:
        r = math.exp(-2 * B * t)
        return 2 * mult * r ** (N + 1) / (1 - r)

    return SpectralModel(
        name="landau",
        eigenvalues=np.sqrt(np.array(levels)),
        chirality=np.array(chir),
        multiplicity=np.full(len(levels), mult),
        labels=tuple(labels),
        cutoff=N,
        charge=k,
        twist=B,
        bochner=np.array(boch),
        curvature_term=np.array(curv),
        scalar_curvature=0.0,
        tail=tail,
    )


def monopole_model(charge: int, angular_cutoff: int = 64) -> SpectralModel:
    """Dirac operator on the unit round sphere twisted by a monopole of charge ``q``.

    Spinors of chirality ``+-`` coupled to the monopole are sections of spin
    weight ``s = (q -+ 1)/2``; their Bochner Laplacian has eigenvalues
    ``j (j + 1) - s**2``, ``j = |s|, |s| + 1, ...``, multiplicity ``2 j + 1``.
    Adding ``r/4 = 1/2`` and the Clifford term ``-(q/2)`` (chirality ``+``) or
    ``+(q/2)`` (chirality ``-``) gives ``D^2 = n (n + |q|)``.
    """
    q = int(charge)
    L = int(angular_cutoff)
    if L < 1:
        raise ValueError("angular cutoff must be >= 1")
    levels, chir, boch, curv, mult, labels = [], [], [], [], [], []
    for c in (1, -1):
        s = (q - c) / 2
        j0 = abs(s)
        for l in range(L + 2):
            j = j0 + l
            lap = j * (j + 1) - s * s
            val = lap + 0.5 - c * q / 2
            if val > L * (L + abs(q)) + 1e-9:
                break
            levels.append(max(val, 0.0))
            chir.append(c)
            boch.append(lap)
            curv.append(-c * q / 2)
            mult.append(int(round(2 * j + 1)))
            labels.append(f"j={j:g}{'+' if c > 0 else '-'}")
    aq = abs(q)

    def tail(t: float) -> float:
        r = math.exp(-t * (L + 1 + aq))
        n0 = L + 1
        s0 = r**n0 / (1 - r)
        s1 = r**n0 * (n0 - L * r) / (1 - r) ** 2
        return 2 * (2 * s1 + aq * s0)

    return SpectralModel(
        name="monopole",
        eigenvalues=np.sqrt(np.array(levels)),
        chirality=np.array(chir),
        multiplicity=np.array(mult),
        labels=tuple(labels),
        cutoff=L,
        charge=q,
        twist=q / 2,
        bochner=np.array(boch),
        curvature_term=np.array(curv),
        scalar_curvature=2.0,
        tail=tail,
    )


# ---------------------------------------------------------------------------
# Operators on the flat torus


def fourier_coefficients(samples: np.ndarray) -> np.ndarray:
    """Coefficients ``c[p, q]`` with ``f = sum c exp(2 pi i (p x + q y))``.

    ``samples`` has leading axes ``(N, N)`` on the uniform torus grid; index
    ``p`` is stored modulo ``N``.
    """
    s = np.asarray(samples, dtype=complex)
    N = s.shape[0]
    return np.fft.fft2(s, axes=(0, 1)) / N**2


def multiplication_operator(
    model: SpectralModel,
    fourier_coeffs: Mapping[tuple[int, int], complex | np.ndarray] | np.ndarray,
) -> OperatorMatrix:
    """Galerkin matrix of multiplication by a (matrix-valued) function.

    Parameters
    ----------
    model : SpectralModel
        Flat-torus model.
    fourier_coeffs : mapping or ndarray
        Either ``{(p, q): c}`` with scalar or ``k x k`` coefficients, or grid
        samples of shape ``(N, N)`` / ``(N, N, k, k)`` on the uniform grid,
        which are Fourier transformed (``N > 4 M`` avoids aliasing).

    Returns
    -------
    OperatorMatrix
        Even operator on the space amplified by ``k`` colours. A truncation
        warning is recorded when the input support exceeds half the cutoff.
    """
    mm, nn = model.modes()
    M = model.cutoff
    nb = mm.size
    dm = mm[:, None] - mm[None, :]
    dn = nn[:, None] - nn[None, :]
    notes: list[str] = []
    if isinstance(fourier_coeffs, Mapping):
        items = {tuple(map(int, k)): np.atleast_2d(np.asarray(v, dtype=complex)) for k, v in fourier_coeffs.items()}
        if not items:
            items = {(0, 0): np.zeros((1, 1), dtype=complex)}
        kc = next(iter(items.values())).shape[0]
        A = np.zeros((nb, nb, kc, kc), dtype=complex)
        for (p, q), c in items.items():
            sel = (dm == p) & (dn == q)
            A[sel] += c
        wide = [pq for pq, c in items.items() if max(abs(pq[0]), abs(pq[1])) > M / 2 and np.any(c != 0)]
        if wide:
            notes.append(f"Fourier support {max(max(abs(p), abs(q)) for p, q in wide)} exceeds half the cutoff {M}")
    else:
        s = np.asarray(fourier_coeffs, dtype=complex)
        if s.ndim == 2:
            s = s[:, :, None, None]
        Ng = s.shape[0]
        if Ng <= 4 * M:
            raise ValueError(f"grid size {Ng} aliases mode differences up to {2 * M}; need > {4 * M}")
        C = fourier_coefficients(s)
        A = C[dm % Ng, dn % Ng]
        kc = s.shape[-1]
        freq = np.abs(np.fft.fftfreq(Ng, 1.0 / Ng))
        outside = (freq[:, None] > M / 2) | (freq[None, :] > M / 2)
        excess = float(np.max(np.abs(C[outside]), initial=0.0))
        if excess > 1e-12:
            notes.append(f"Fourier coefficients beyond half the cutoff {M} up to {excess:.2e}")
    for msg in notes:
        warnings.warn(msg, TruncationWarning, stacklevel=2)
    full = np.einsum("ijab,st->iasjbt", A, np.eye(2)).reshape(nb * kc * 2, nb * kc * 2)
    return OperatorMatrix(full, "even", colors=kc, warnings=tuple(notes))


def dirac_commutator(model: SpectralModel, a) -> OperatorMatrix:
    """``[D, op(a)]``, the Clifford action of ``da``; ``a`` as for multiplication_operator."""
    A = a if isinstance(a, OperatorMatrix) else multiplication_operator(model, a)
    D = model.dirac_matrix(A.colors)
    return D @ A - A @ D


def iterated_commutator(model: SpectralModel, x: OperatorMatrix, k: int) -> OperatorMatrix:
    """``ad^k(D^2)(x)``; exact because D^2 is diagonal in the plane-wave basis."""
    if k < 0:
        raise ValueError("k must be >= 0")
    mu = model.d2_diagonal(x.colors)
    diff = mu[:, None] - mu[None, :]
    return OperatorMatrix(x.matrix * diff**k, x.parity, x.colors, x.warnings)


def lichnerowicz_residual(model: SpectralModel) -> float:
    """``|| D^2 - (Delta^E + F^{E/S} + r/4) ||`` on the truncated space.

    On the flat torus D^2 is formed from the dense Dirac matrix; on the twisted
    models from the listed spectrum. The right side uses the independently
    assembled Bochner eigenvalues and curvature term.
    """
    if model.bochner is None or model.curvature_term is None:
        raise UnsupportedModelError("model carries no Bochner/curvature decomposition")
    rhs = model.bochner + model.curvature_term + model.scalar_curvature / 4
    if model.name == "flat_torus":
        D = model.dirac_matrix().matrix
        return float(np.linalg.norm(D @ D - np.diag(rhs.astype(complex)), 2))
    return float(np.max(np.abs(model.d2 - rhs)))


# ---------------------------------------------------------------------------
# Projections


def _smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)

    def bump(x):
        out = np.zeros_like(x)
        m = x > 0
        out[m] = np.exp(-1.0 / x[m])
        return out

    return bump(s) / (bump(s) + bump(1 - s))


def bott_vector(x: np.ndarray, y: np.ndarray, profile: str = "trigonometric", radius: float = 0.45) -> np.ndarray:
    """Unit vector field ``v: T^2 -> S^2`` of degree one (up to sign).

    ``"trigonometric"`` normalizes ``(sin 2 pi x, sin 2 pi y, 1 + cos 2 pi x + cos 2 pi y)``;
    ``"bump"`` wraps a disc of the given radius once around the sphere and maps
    its complement to the north pole.
    """
    if profile == "trigonometric":
        d = np.stack(
            [np.sin(2 * np.pi * x), np.sin(2 * np.pi * y), 1 + np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y)]
        )
        return d / np.linalg.norm(d, axis=0)
    if profile == "bump":
        X, Y = x - 0.5, y - 0.5
        th = np.pi * _smoothstep(np.hypot(X, Y) / radius)
        ph = np.arctan2(Y, X)
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    raise ValueError(f"unknown profile {profile!r}")


def _projection_from_vector(v: np.ndarray) -> np.ndarray:
    e = 0.5 * (np.eye(2)[None, None] + np.einsum("aij,axy->xyij", SIGMA, v))
    return e


def bott_projection(grid_size: int, profile: str = "trigonometric") -> IdempotentField:
    """Rank-one projection ``(1 + v . sigma)/2`` on the ``N x N`` torus grid."""
    if grid_size < 16:
        raise ValueError("grid size must be >= 16")
    grid = TorusGrid(grid_size)
    x, y = grid.nodes()
    return IdempotentField(grid, _projection_from_vector(bott_vector(x, y, profile)))


def sphere_projection(grid: SphereGrid) -> IdempotentField:
    """Tautological rank-one projection ``(1 + x . sigma)/2`` on the unit sphere."""
    th, ph = grid.nodes()
    v = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    return IdempotentField(grid, _projection_from_vector(v))
