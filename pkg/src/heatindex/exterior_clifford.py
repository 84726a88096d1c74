"""Grassmann algebra, spinor representations of the Clifford algebra, and the
symbol map between them.

Conventions
-----------
* Generators square to minus one: ``gamma_i @ gamma_i == -1``.
* The chirality operator is ``i**(n/2) * gamma_1 ... gamma_n``; with it the
  supertrace of the top monomial is ``(-2i)**(n/2)``.
* Blades are strictly increasing tuples of 1-based generator indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

MAX_GENERATORS = 8

Blade = tuple[int, ...]


class DimensionError(ValueError):
    """Operands live over different generator counts."""


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 0 or n > MAX_GENERATORS:
        raise DimensionError(f"generator count must be an integer in [0, {MAX_GENERATORS}], got {n!r}")


def blade_product_sign(a: Blade, b: Blade) -> int:
    """Sign of ``e_a ^ e_b`` relative to the sorted blade, or 0 if they overlap."""
    if set(a) & set(b):
        return 0
    inversions = sum(1 for i in a for j in b if i > j)
    return -1 if inversions % 2 else 1


def all_blades(n: int) -> list[Blade]:
    """Every blade over ``n`` generators, ordered by degree then lexicographically."""
    return [c for k in range(n + 1) for c in itertools.combinations(range(1, n + 1), k)]


class MultiVector:
    """Element of the complex Grassmann algebra on ``n`` generators.

    Coefficients are kept in a sparse dict keyed by blades. Any numeric type
    works as a coefficient (``complex``, ``float``, ``int``, ``Fraction``), which
    lets exact rational computations stay exact.

    Examples
    --------
    >>> e1, e2 = MultiVector.basis(2, 1), MultiVector.basis(2, 2)
    >>> (e1 ^ e2).coeffs
    {(1, 2): 1}
    """

    __slots__ = ("n", "_coeffs")

    def __init__(self, n: int, coeffs: Mapping[Iterable[int], Number] | None = None):
        _check_n(n)
        self.n = int(n)
        clean: dict[Blade, Number] = {}
        for key, val in (coeffs or {}).items():
            blade = tuple(key)
            if any(i < 1 or i > n for i in blade) or any(
                blade[j] >= blade[j + 1] for j in range(len(blade) - 1)
            ):
                raise ValueError(f"blade {blade} is not a strictly increasing index tuple in 1..{n}")
            if val != 0:
                clean[blade] = clean.get(blade, 0) + val
        self._coeffs = {k: v for k, v in clean.items() if v != 0}

    @classmethod
    def scalar(cls, n: int, value: Number = 1) -> "MultiVector":
        return cls(n, {(): value})

    @classmethod
    def basis(cls, n: int, *indices: int) -> "MultiVector":
        """Wedge of the listed generators, e.g. ``basis(4, 1, 2)`` is e1^e2."""
        sign = 1
        blade: Blade = ()
        for i in indices:
            s = blade_product_sign(blade, (i,))
            if s == 0:
                return cls(n)
            sign *= s
            blade = tuple(sorted(blade + (i,)))
        return cls(n, {blade: sign})

    @classmethod
    def from_dense(cls, n: int, vector) -> "MultiVector":
        blades = all_blades(n)
        return cls(n, {b: complex(v) for b, v in zip(blades, vector) if v != 0})

    @property
    def coeffs(self) -> dict[Blade, Number]:
        return dict(self._coeffs)

    def to_dense(self) -> np.ndarray:
        index = {b: i for i, b in enumerate(all_blades(self.n))}
        out = np.zeros(len(index), dtype=complex)
        for b, v in self._coeffs.items():
            out[index[b]] = complex(v)
        return out

    def __getitem__(self, blade: Iterable[int]) -> Number:
        return self._coeffs.get(tuple(blade), 0)

    def grades(self) -> set[int]:
        return {len(b) for b in self._coeffs}

    def is_zero(self) -> bool:
        return not self._coeffs

    def _coerce(self, other) -> "MultiVector":
        if isinstance(other, MultiVector):
            if other.n != self.n:
                raise DimensionError(f"generator counts differ: {self.n} vs {other.n}")
            return other
        if isinstance(other, Number):
            return MultiVector.scalar(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._coeffs)
        for b, v in other._coeffs.items():
            out[b] = out.get(b, 0) + v
        return MultiVector(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiVector(self.n, {b: -v for b, v in self._coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return MultiVector(self.n, {b: v * other for b, v in self._coeffs.items()})
        if isinstance(other, MultiVector):
            return wedge(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return MultiVector(self.n, {b: other * v for b, v in self._coeffs.items()})
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return MultiVector(self.n, {b: v / other for b, v in self._coeffs.items()})
        return NotImplemented

    def __xor__(self, other):
        return wedge(self, self._coerce(other))

    def __rxor__(self, other):
        return wedge(self._coerce(other), self)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.n, frozenset(self._coeffs.items())))

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(complex(v)) ** 2 for v in self._coeffs.values())))

    def isclose(self, other, atol: float = 1e-12) -> bool:
        return (self - other).norm() <= atol

    def __repr__(self):
        if not self._coeffs:
            return f"MultiVector({self.n}, 0)"
        terms = []
        for b in sorted(self._coeffs, key=lambda b: (len(b), b)):
            name = "e" + "".join(str(i) for i in b) if b else "1"
            terms.append(f"({self._coeffs[b]})*{name}")
        return f"MultiVector({self.n}, " + " + ".join(terms) + ")"


def wedge(a: MultiVector, b: MultiVector) -> MultiVector:
    """Exterior product ``a ^ b``."""
    if a.n != b.n:
        raise DimensionError(f"generator counts differ: {a.n} vs {b.n}")
    out: dict[Blade, Number] = {}
    for ka, va in a._coeffs.items():
        for kb, vb in b._coeffs.items():
            s = blade_product_sign(ka, kb)
            if s:
                key = tuple(sorted(ka + kb))
                out[key] = out.get(key, 0) + s * va * vb
    return MultiVector(a.n, out)


def degree_part(a: MultiVector, i: int) -> MultiVector:
    """The homogeneous degree-``i`` component ``a_[i]``."""
    if not 0 <= i <= a.n:
        raise ValueError(f"degree {i} outside 0..{a.n}")
    return MultiVector(a.n, {b: v for b, v in a._coeffs.items() if len(b) == i})


def berezin_top(a: MultiVector) -> Number:
    """Coefficient of ``e_1 ^ ... ^ e_n``."""
    return a[tuple(range(1, a.n + 1))]


def exterior_exp(a: MultiVector) -> MultiVector:
    """``exp`` in the Grassmann algebra for an even element (series terminates)."""
    if any(g % 2 for g in a.grades()):
        raise ValueError("exterior_exp needs an even element")
    s0 = a[()]
    nil = a - s0
    out = MultiVector.scalar(a.n, 1)
    term = MultiVector.scalar(a.n, 1)
    for k in range(1, a.n // 2 + 1):
        term = wedge(term, nil) / k
        if term.is_zero():
            break
        out = out + term
    if s0 != 0:
        out = out * complex(np.exp(complex(s0)))
    return out


# ---------------------------------------------------------------------------
# Spinor representation

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class CliffordMatrix:
    """An operator on the spinor module of ``Cl(n)``, ``n`` even."""

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if m.shape != (2 ** (self.n // 2),) * 2:
            raise DimensionError(f"expected a {2 ** (self.n // 2)}-square matrix, got {m.shape}")

    @property
    def grading(self) -> np.ndarray:
        return chirality(self.n)

    def __matmul__(self, other: "CliffordMatrix") -> "CliffordMatrix":
        if other.n != self.n:
            raise DimensionError("Clifford dimensions differ")
        return CliffordMatrix(self.n, self.matrix @ other.matrix)

    def __add__(self, other: "CliffordMatrix") -> "CliffordMatrix":
        if other.n != self.n:
            raise DimensionError("Clifford dimensions differ")
        return CliffordMatrix(self.n, self.matrix + other.matrix)

    def __sub__(self, other: "CliffordMatrix") -> "CliffordMatrix":
        return self + (-1) * other

    def __mul__(self, scalar: Number) -> "CliffordMatrix":
        return CliffordMatrix(self.n, scalar * self.matrix)

    __rmul__ = __mul__


def _check_even(n: int) -> None:
    if n % 2 or n < 2 or n > MAX_GENERATORS:
        raise NotImplementedError(f"only even n in 2..{MAX_GENERATORS} are supported, got {n}")


@lru_cache(maxsize=None)
def _gamma_arrays(n: int) -> tuple[np.ndarray, ...]:
    m = n // 2
    gammas = []
    for j in range(m):
        for p in ("X", "Y"):
            factors = ["Z"] * j + [p] + ["I"] * (m - j - 1)
            mat = np.array([[1.0 + 0j]])
            for f in factors:
                mat = np.kron(mat, _PAULI[f])
            mat = 1j * mat
            mat.setflags(write=False)
            gammas.append(mat)
    return tuple(gammas)


def clifford_generators(n: int) -> list[CliffordMatrix]:
    """Jordan-Wigner generators ``gamma_1..gamma_n`` of size ``2**(n/2)``."""
    _check_even(n)
    return [CliffordMatrix(n, g) for g in _gamma_arrays(n)]


@lru_cache(maxsize=None)
def chirality(n: int) -> np.ndarray:
    """Grading operator ``i**(n/2) gamma_1 ... gamma_n`` (squares to one)."""
    _check_even(n)
    g = np.eye(2 ** (n // 2), dtype=complex)
    for gamma in _gamma_arrays(n):
        g = g @ gamma
    g = (1j ** (n // 2)) * g
    # entries are exactly 0 or +-1; scrub rounding in the imaginary part
    g = np.round(g.real) + 0j
    g.setflags(write=False)
    return g


def _monomial(n: int, blade: Blade) -> np.ndarray:
    gammas = _gamma_arrays(n)
    out = np.eye(2 ** (n // 2), dtype=complex)
    for i in blade:
        out = out @ gammas[i - 1]
    return out


def quantize(a: MultiVector) -> CliffordMatrix:
    """Inverse symbol map: ``e_I -> gamma_I`` extended linearly."""
    _check_even(a.n)
    out = np.zeros((2 ** (a.n // 2),) * 2, dtype=complex)
    for blade, v in a.coeffs.items():
        out += complex(v) * _monomial(a.n, blade)
    return CliffordMatrix(a.n, out)


def symbol_map(x: CliffordMatrix, atol: float = 0.0) -> MultiVector:
    """Symbol ``sigma``: expand ``x`` in ordered gamma monomials.

    Uses trace orthogonality ``Tr(gamma_I^{-1} gamma_J) = 2**(n/2) delta_IJ``.
    Coefficients with modulus below ``atol`` are dropped.
    """
    n = x.n
    dim = 2 ** (n // 2)
    coeffs = {}
    for blade in all_blades(n):
        mono = _monomial(n, blade)
        # gamma_I^{-1} = gamma_I^dagger since the generators are unitary
        c = np.trace(mono.conj().T @ x.matrix) / dim
        if abs(c) > atol:
            coeffs[blade] = complex(c)
    return MultiVector(n, coeffs)


def supertrace(x: CliffordMatrix | np.ndarray, n: int | None = None) -> complex:
    """``Str(x) = Tr(Gamma x)``."""
    if isinstance(x, CliffordMatrix):
        n, mat = x.n, x.matrix
    else:
        mat = np.asarray(x)
        if n is None:
            n = 2 * int(round(np.log2(mat.shape[0])))
    return complex(np.trace(chirality(n) @ mat))


def supertrace_constant(n: int) -> complex:
    """``Str(gamma_1 ... gamma_n) = (-2i)**(n/2)``."""
    return (-2j) ** (n // 2)
