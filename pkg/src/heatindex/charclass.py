"""Characteristic classes of nilpotent curvature matrices and sampled forms on
the model surfaces (flat unit-area torus, unit round sphere).

Power series are evaluated over the commutative ring of even forms; every
series terminates because the entries are nilpotent, so truncation is exact.
Series coefficients are ``Fraction`` so integer inputs give exact outputs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .exterior_clifford import Blade, DimensionError, MultiVector, blade_product_sign, exterior_exp, wedge

__all__ = [
    "FormMatrix",
    "TorusGrid",
    "SphereGrid",
    "FormField",
    "IdempotentField",
    "IdempotencyError",
    "a_hat",
    "chern_character",
    "ch_de_rham",
    "integrate_top",
    "exterior_derivative",
    "rhs_index",
    "root_block",
    "real_block",
    "line_bundle_curvature",
    "landau_curvature",
    "monopole_curvature",
    "sphere_curvature",
    "x_over_sinh_coefficients",
]


class IdempotencyError(ValueError):
    """Input matrix field is not an idempotent within tolerance."""


# ---------------------------------------------------------------------------
# Matrices of forms


class FormMatrix:
    """Square matrix whose entries are nilpotent even forms.

    Parameters
    ----------
    entries : sequence of sequences of MultiVector
        All over the same generator count. Each entry must have no degree-0
        and no odd-degree component.
    """

    def __init__(self, entries: Sequence[Sequence[MultiVector]], check: bool = True):
        rows = [list(r) for r in entries]
        m = len(rows)
        if m == 0 or any(len(r) != m for r in rows):
            raise DimensionError("FormMatrix needs a non-empty square array")
        n = rows[0][0].n
        for r in rows:
            for x in r:
                if x.n != n:
                    raise DimensionError("entries over different generator counts")
                if check and any(g == 0 or g % 2 for g in x.grades()):
                    raise ValueError("FormMatrix entries must be even forms of degree >= 2 (nilpotent)")
        self.m = m
        self.n = n
        self.entries = rows

    @classmethod
    def zeros(cls, m: int, n: int) -> "FormMatrix":
        return cls([[MultiVector(n) for _ in range(m)] for _ in range(m)])

    @classmethod
    def direct_sum(cls, *blocks: "FormMatrix") -> "FormMatrix":
        n = blocks[0].n
        m = sum(b.m for b in blocks)
        out = [[MultiVector(n) for _ in range(m)] for _ in range(m)]
        off = 0
        for b in blocks:
            for i in range(b.m):
                for j in range(b.m):
                    out[off + i][off + j] = b.entries[i][j]
            off += b.m
        return cls(out)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def transpose(self) -> "FormMatrix":
        return FormMatrix([[self.entries[j][i] for j in range(self.m)] for i in range(self.m)], check=False)

    def is_antisymmetric(self, atol: float = 0.0) -> bool:
        return all(
            (self.entries[i][j] + self.entries[j][i]).norm() <= atol
            for i in range(self.m)
            for j in range(self.m)
        )

    def trace(self) -> MultiVector:
        out = MultiVector(self.n)
        for i in range(self.m):
            out = out + self.entries[i][i]
        return out

    def scale(self, c: Number) -> "FormMatrix":
        return FormMatrix([[x * c for x in r] for r in self.entries], check=False)

    def __add__(self, other: "FormMatrix") -> "FormMatrix":
        return FormMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)], check=False
        )

    def __matmul__(self, other: "FormMatrix") -> "FormMatrix":
        if other.m != self.m or other.n != self.n:
            raise DimensionError("FormMatrix shapes differ")
        out = []
        for i in range(self.m):
            row = []
            for j in range(self.m):
                acc = MultiVector(self.n)
                for k in range(self.m):
                    acc = acc + wedge(self.entries[i][k], other.entries[k][j])
                row.append(acc)
            out.append(row)
        return FormMatrix(out, check=False)

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.entries for x in r)


def _identity_plus(series: Sequence[tuple[Number, "FormMatrix"]], m: int, n: int):
    """Return ``sum c_k X_k`` as an entry list (helper for scalar + matrix)."""
    out = [[MultiVector(n) for _ in range(m)] for _ in range(m)]
    for c, mat in series:
        for i in range(m):
            for j in range(m):
                out[i][j] = out[i][j] + mat.entries[i][j] * c
    return out


def _powers(x: FormMatrix, kmax: int) -> list[FormMatrix]:
    pw = [x]
    for _ in range(kmax - 1):
        nxt = pw[-1] @ x
        if nxt.is_zero():
            break
        pw.append(nxt)
    return pw


def _to_exact(c):
    # products like 1j * -1j arrive as complex floats holding integers
    if isinstance(c, complex) and c.imag == 0 and float(c.real).is_integer():
        return int(c.real)
    return c


def _exact_real(x: FormMatrix) -> FormMatrix:
    return FormMatrix(
        [[MultiVector(v.n, {b: _to_exact(c) for b, c in v.coeffs.items()}) for v in r] for r in x.entries],
        check=False,
    )


@lru_cache(maxsize=None)
def x_over_sinh_coefficients(order: int) -> tuple[Fraction, ...]:
    """Exact coefficients ``c_j`` of ``x/sinh(x) = sum_j c_j x**(2j)``, j <= order.

    Obtained by inverting the series ``sinh(x)/x = sum x**(2j)/(2j+1)!``.
    """
    s = [Fraction(1, math.factorial(2 * j + 1)) for j in range(order + 1)]
    c = [Fraction(1)]
    for j in range(1, order + 1):
        c.append(-sum(s[i] * c[j - i] for i in range(1, j + 1)))
    return tuple(c)


def a_hat(R: FormMatrix) -> MultiVector:
    """Â-genus form ``det^{1/2}((R/2)/sinh(R/2))`` of a curvature matrix.

    Evaluated as ``exp(tr(log(f(R/2)))/2)`` with ``f(x) = x/sinh(x)``. The
    result lives in degrees divisible by four and starts with 1.
    """
    if not R.is_antisymmetric():
        raise ValueError("a_hat expects an antisymmetric curvature matrix")
    n, m = R.n, R.m
    jmax = n // 4
    one = MultiVector.scalar(n, 1)
    if jmax == 0:
        return one
    X2 = _exact_real(R @ R).scale(Fraction(1, 4))  # (R/2)^2
    coeffs = x_over_sinh_coefficients(jmax)
    x2_pows = _powers(X2, jmax)
    # Y = f(R/2) - 1
    Y = FormMatrix(
        _identity_plus([(coeffs[j + 1], p) for j, p in enumerate(x2_pows)], m, n), check=False
    )
    y_pows = _powers(Y, jmax)
    log_tr = MultiVector(n)
    for k, p in enumerate(y_pows, start=1):
        log_tr = log_tr + p.trace() * Fraction((-1) ** (k + 1), k)
    half = log_tr * Fraction(1, 2)
    out = one
    term = one
    for k in range(1, jmax + 1):
        term = wedge(term, half) * Fraction(1, k)
        out = out + term
    return out


def chern_character(F: FormMatrix) -> MultiVector:
    """Chern character form ``tr exp(-F)``; degree-0 part is the rank."""
    n, m = F.n, F.m
    out = MultiVector.scalar(n, m)
    if F.is_zero():
        return out
    negF = F.scale(-1)
    for k, p in enumerate(_powers(negF, n // 2), start=1):
        out = out + p.trace() * Fraction(1, math.factorial(k))
    return out


def root_block(x: MultiVector | Number, n: int | None = None) -> FormMatrix:
    """Antisymmetric 2x2 block ``x * [[0, i], [-i, 0]]`` with eigenvalues ``+-x``.

    This is the curvature block whose formal root is ``x``; with it
    ``a_hat(root_block(x)) = (x/2)/sinh(x/2)`` as a power series in ``x``.
    """
    if not isinstance(x, MultiVector):
        if n is None:
            raise ValueError("give n when x is a number")
        x = MultiVector.scalar(n, x)
    z = MultiVector(x.n)
    return FormMatrix([[z, x * 1j], [x * (-1j), z]], check=not x.is_zero() and x[()] == 0)


def real_block(theta: MultiVector) -> FormMatrix:
    """Real rotation-generator block ``[[0, theta], [-theta, 0]]``."""
    z = MultiVector(theta.n)
    return FormMatrix([[z, theta], [-theta, z]])


def line_bundle_curvature(scalar: complex, n: int = 2) -> FormMatrix:
    """1x1 curvature ``scalar * e1^e2`` over ``n`` generators."""
    return FormMatrix([[MultiVector(n, {(1, 2): scalar})]])


def landau_curvature(flux: int) -> FormMatrix:
    """Line-bundle curvature on the unit-area torus with integer flux.

    Chosen as ``-2 pi i k dx^dy`` so that ``(2 pi i)^-1 int ch_[2] = k``.
    """
    return line_bundle_curvature(-2j * math.pi * flux)


def monopole_curvature(charge: int) -> FormMatrix:
    """Monopole curvature on the unit sphere, ``-i (q/2) vol`` (area 4 pi)."""
    return line_bundle_curvature(-0.5j * charge)


def sphere_curvature() -> FormMatrix:
    """Riemann curvature of the unit round sphere in an orthonormal coframe."""
    return real_block(MultiVector(2, {(1, 2): 1.0}))


# ---------------------------------------------------------------------------
# Grids and sampled forms


@dataclass(frozen=True)
class TorusGrid:
    """Uniform ``N x N`` grid on the unit-area flat torus ``[0,1)^2``."""

    N: int

    def __post_init__(self):
        if self.N < 4:
            raise ValueError("torus grid needs N >= 4")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        g = np.arange(self.N) / self.N
        return np.meshgrid(g, g, indexing="ij")

    def weights(self) -> np.ndarray:
        return np.full(self.shape, 1.0 / self.N**2)

    def gradient(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Spectral derivatives along x and y of samples with leading grid axes."""
        N = self.N
        k = 2j * np.pi * np.fft.fftfreq(N, 1.0 / N)
        if N % 2 == 0:
            k[N // 2] = 0.0
        extra = (1,) * (f.ndim - 2)
        F = np.fft.fft2(f, axes=(0, 1))
        fx = np.fft.ifft2(F * k.reshape((N, 1) + extra), axes=(0, 1))
        fy = np.fft.ifft2(F * k.reshape((1, N) + extra), axes=(0, 1))
        return fx, fy

    def coordinate_names(self) -> tuple[str, str]:
        return ("x", "y")


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre nodes in ``cos(theta)`` times uniform ``phi`` on the unit sphere.

    The coframe is orthonormal: ``e1 = dtheta``, ``e2 = sin(theta) dphi``, so
    ``e1^e2`` is the outward-oriented area form.
    """

    n_theta: int
    n_phi: int

    def __post_init__(self):
        if self.n_theta < 4 or self.n_phi < 4:
            raise ValueError("sphere grid needs at least 4 nodes per direction")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_theta, self.n_phi)

    def _legendre(self):
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        # north pole first
        return x[::-1], w[::-1]

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        x, _ = self._legendre()
        phi = 2 * np.pi * np.arange(self.n_phi) / self.n_phi
        return np.meshgrid(np.arccos(x), phi, indexing="ij")

    def weights(self) -> np.ndarray:
        _, w = self._legendre()
        return np.outer(w, np.full(self.n_phi, 2 * np.pi / self.n_phi))

    def gradient(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Derivatives along the orthonormal coframe ``(dtheta, sin(theta) dphi)``.

        Fourier in ``phi``; in ``theta`` each azimuthal mode ``m`` is written as
        ``sin(theta)**|m| g_m(cos theta)`` and ``g_m`` is interpolated by a
        Legendre series. Accurate for fields of moderate azimuthal bandwidth.
        """
        x, w = self._legendre()
        nt, nph = self.shape
        s = np.sqrt(1 - x**2)
        extra = (1,) * (f.ndim - 2)
        m = np.fft.fftfreq(nph, 1.0 / nph)
        Fm = np.fft.fft(f, axis=1)
        dphi = np.fft.ifft(Fm * (1j * m).reshape((1, nph) + extra), axis=1)
        V = np.polynomial.legendre.legvander(x, nt - 1)  # (nt, nt)
        proj = (V * w[:, None]).T * ((2 * np.arange(nt) + 1) / 2)[:, None]  # coefficients = proj @ g
        Vd = np.stack(
            [np.polynomial.legendre.legval(x, np.polynomial.legendre.legder(np.eye(nt)[l])) for l in range(nt)],
            axis=1,
        )  # derivative of P_l at nodes
        dtheta_modes = np.zeros_like(Fm)
        scale = np.max(np.abs(Fm), initial=0.0)
        for j, mj in enumerate(m):
            am = int(abs(mj))
            # roundoff in empty modes would be amplified by sin(theta)**-|m|
            if np.max(np.abs(Fm[:, j])) <= 1e-13 * scale:
                continue
            fac = s**am
            g = Fm[:, j] / fac.reshape((nt,) + extra)
            coef = np.tensordot(proj, g, axes=(1, 0))
            gp = np.tensordot(Vd, coef, axes=(1, 0))
            gv = np.tensordot(V, coef, axes=(1, 0))
            sr = s.reshape((nt,) + extra)
            xr = x.reshape((nt,) + extra)
            # d/dtheta [s^m g(x)] = s^(m-1) (m x g - s^2 g')
            dtheta_modes[:, j] = sr ** (am - 1) * (am * xr * gv - sr**2 * gp) if am else -sr * gp
        dtheta = np.fft.ifft(dtheta_modes, axis=1)
        sin_t = s.reshape((nt, 1) + extra)
        return dtheta, dphi / sin_t

    def coordinate_names(self) -> tuple[str, str]:
        return ("theta", "phi")


Domain = TorusGrid | SphereGrid


@dataclass
class FormField:
    """A differential form on a 2D model surface sampled at grid nodes.

    Stored blade-wise: ``coeffs[blade]`` is an array of shape ``domain.shape``
    holding that coefficient at every node (coordinates w.r.t. the domain's
    orthonormal coframe).
    """

    domain: Domain
    coeffs: dict[Blade, np.ndarray] = field(default_factory=dict)
    n: int = 2

    def __post_init__(self):
        for b, arr in list(self.coeffs.items()):
            arr = np.broadcast_to(np.asarray(arr, dtype=complex), self.domain.shape).copy()
            if not np.all(np.isfinite(arr)):
                raise ValueError("form field values must be finite")
            self.coeffs[tuple(b)] = arr

    @classmethod
    def constant(cls, domain: Domain, mv: MultiVector) -> "FormField":
        return cls(domain, {b: np.full(domain.shape, complex(v)) for b, v in mv.coeffs.items()}, n=mv.n)

    @classmethod
    def function(cls, domain: Domain, values) -> "FormField":
        return cls(domain, {(): values})

    def __getitem__(self, blade) -> np.ndarray:
        return self.coeffs.get(tuple(blade), np.zeros(self.domain.shape, dtype=complex))

    def __add__(self, other: "FormField") -> "FormField":
        out = {b: v.copy() for b, v in self.coeffs.items()}
        for b, v in other.coeffs.items():
            out[b] = out.get(b, 0) + v
        return FormField(self.domain, out, self.n)

    def scale(self, c) -> "FormField":
        return FormField(self.domain, {b: v * c for b, v in self.coeffs.items()}, self.n)

    def wedge(self, other: "FormField | MultiVector") -> "FormField":
        if isinstance(other, MultiVector):
            other = FormField.constant(self.domain, other)
        if other.n != self.n:
            raise DimensionError("form fields over different generator counts")
        out: dict[Blade, np.ndarray] = {}
        for ka, va in self.coeffs.items():
            for kb, vb in other.coeffs.items():
                s = blade_product_sign(ka, kb)
                if s:
                    key = tuple(sorted(ka + kb))
                    out[key] = out.get(key, 0) + s * va * vb
        return FormField(self.domain, out, self.n)

    __xor__ = wedge

    def degree_part(self, i: int) -> "FormField":
        return FormField(self.domain, {b: v for b, v in self.coeffs.items() if len(b) == i}, self.n)

    def top(self) -> np.ndarray:
        return self[tuple(range(1, self.n + 1))]

    def at(self, index) -> MultiVector:
        return MultiVector(self.n, {b: complex(v[index]) for b, v in self.coeffs.items()})

    def to_csv(self, path: str | Path) -> Path:
        """Write node coordinates and one real/imag column pair per blade."""
        path = Path(path)
        c1, c2 = self.domain.nodes()
        names = self.domain.coordinate_names()
        blades = sorted(self.coeffs, key=lambda b: (len(b), b))
        header = list(names)
        for b in blades:
            tag = "e" + "".join(map(str, b)) if b else "scalar"
            header += [f"{tag}_re", f"{tag}_im"]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for idx in np.ndindex(self.domain.shape):
                row = [repr(float(c1[idx])), repr(float(c2[idx]))]
                for b in blades:
                    v = self.coeffs[b][idx]
                    row += [repr(float(v.real)), repr(float(v.imag))]
                w.writerow(row)
        return path


def exterior_derivative(f: np.ndarray, domain: Domain) -> FormField:
    """``df`` of a scalar function sampled on ``domain``."""
    d1, d2 = domain.gradient(np.asarray(f, dtype=complex))
    return FormField(domain, {(1,): d1, (2,): d2})


@dataclass
class IdempotentField:
    """Matrix-valued function ``e(x)`` with ``e(x)^2 = e(x)`` at every node."""

    domain: Domain
    values: np.ndarray  # shape domain.shape + (k, k)
    tol: float = 1e-12

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape[:2] != self.domain.shape or v.ndim != 4 or v.shape[2] != v.shape[3]:
            raise ValueError("values must have shape domain.shape + (k, k)")
        self.values = v
        err = self.idempotency_error()
        if err > self.tol:
            raise IdempotencyError(f"max |e^2 - e| = {err:.3e} exceeds {self.tol:.1e}")
        tr = np.trace(v, axis1=2, axis2=3)
        if np.max(np.abs(tr - tr.flat[0])) > 1e-9:
            raise IdempotencyError("pointwise rank is not constant")

    @property
    def k(self) -> int:
        return self.values.shape[-1]

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.values[0, 0]).real))

    def idempotency_error(self) -> float:
        v = self.values
        return float(np.max(np.abs(v @ v - v)))

    @classmethod
    def identity(cls, domain: Domain, k: int = 1) -> "IdempotentField":
        return cls(domain, np.broadcast_to(np.eye(k, dtype=complex), domain.shape + (k, k)).copy())


def ch_de_rham(e: IdempotentField) -> FormField:
    """Chern character form of the projection's Grassmann connection.

    The curvature of ``e d e`` is ``e de de``; consistently with
    :func:`chern_character` the result is ``Tr exp(-e de de)``.
    """
    dom = e.domain
    d1, d2 = dom.gradient(e.values)
    v = e.values
    curv = v @ (d1 @ d2 - d2 @ d1)  # coefficient of e1^e2
    rank = np.trace(v, axis1=2, axis2=3)
    return FormField(dom, {(): rank, (1, 2): -np.trace(curv, axis1=2, axis2=3)})


def integrate_top(f: FormField) -> complex:
    """Quadrature of the top-degree coefficient against the area element."""
    return complex(np.sum(f.domain.weights() * f.top()))


def rhs_index(
    e: IdempotentField,
    R: FormMatrix | None = None,
    F: FormMatrix | None = None,
    prefactor_power: int | None = None,
) -> complex:
    """``(2 pi i)^(-p) int ch_dR(e) ^ Â(R) ^ ch(F)``, ``p = dim/2`` by default.

    ``R`` and ``F`` are constant curvature matrices in the domain's
    orthonormal coframe (``None`` means flat / untwisted). For an untwisted
    Clifford module ``ch(F)`` is taken as 1.
    """
    dim = 2
    p = dim // 2 if prefactor_power is None else prefactor_power
    form = ch_de_rham(e)
    if R is not None:
        form = form.wedge(a_hat(R))
    if F is not None:
        form = form.wedge(chern_character(F))
    return integrate_top(form) / (2j * math.pi) ** p
