"""Shared numerical domain types and the two pairings.

Everything downstream works with dense complex128 arrays.  The one
distinction that matters throughout is between the sesquilinear inner
product (second argument conjugated, the Hilbert-space pairing) and the
bilinear moment pairing (no conjugation, the pairing under which the
recurrence polynomials are orthonormal).  Mixing them up is the classic
bug in this problem domain, so both live here with loud names.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-9


class InputError(ValueError):
    """Malformed or inadmissible input (CLI exit code 2)."""


class PreconditionError(ValueError):
    """A stated mathematical hypothesis fails for the given data (exit code 3)."""


class ConsistencyError(RuntimeError):
    """An internal invariant that should hold by construction was violated."""


def as_complex_matrix(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"{name} must be a square 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains non-finite entries")
    return a


def as_complex_vector(v, name: str = "vector") -> np.ndarray:
    a = np.asarray(v, dtype=np.complex128)
    if a.ndim != 1:
        raise InputError(f"{name} must be a 1-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains non-finite entries")
    return a


def rel_zero(x: float, scale: float, tol: float = DEFAULT_TOL) -> bool:
    """Relative zero test: |x| <= tol * max(1, scale).

    Absolute tests are useless here because the atom radii produced by
    the measure construction grow geometrically; every "equals zero"
    decision is made relative to the largest magnitude entering the
    computation.
    """
    return abs(x) <= tol * max(1.0, scale)


@dataclass
class TridiagonalSymmetric:
    """A complex symmetric tridiagonal matrix given by its two bands.

    ``diag`` holds b_0..b_{d-1}, ``offdiag`` holds a_0..a_{d-2}; the full
    matrix has m[k,k] = b_k and m[k,k+1] = m[k+1,k] = a_k, zero elsewhere,
    so symmetry and bandedness hold by construction.  Membership in the
    admissible class additionally requires every |a_k| bounded away from
    zero; that is checked by ``classify.is_class_matrix``, not here.
    """

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        self.diag = as_complex_vector(self.diag, "diag")
        self.offdiag = as_complex_vector(self.offdiag, "offdiag")
        if self.dim < 2:
            raise InputError("dimension must be at least 2")
        if len(self.offdiag) != self.dim - 1:
            raise InputError(
                f"offdiag must have length {self.dim - 1}, got {len(self.offdiag)}"
            )

    @property
    def dim(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        m += np.diag(self.offdiag, 1)
        m += np.diag(self.offdiag, -1)
        return m


@dataclass
class ConjugationMap:
    """Antilinear involution J x = C conj(x).

    C must be unitary and symmetric; together these are equivalent to
    J being an involution with the reversed isometry law (Jx, Jy) = (y, x).
    """

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = as_complex_matrix(self.matrix, "conjugation matrix")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.conj(np.asarray(x, dtype=np.complex128))

    def residuals(self) -> tuple[float, float]:
        """(unitarity residual, symmetry residual), max-entry magnitude."""
        c = self.matrix
        eye = np.eye(self.dim)
        return (
            float(np.max(np.abs(c.conj().T @ c - eye))),
            float(np.max(np.abs(c - c.T))),
        )

    def check(self, tol: float = DEFAULT_TOL) -> None:
        uni, sym = self.residuals()
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        if not rel_zero(uni, scale, tol):
            raise InputError(f"conjugation matrix is not unitary (residual {uni:.3e})")
        if not rel_zero(sym, scale, tol):
            raise InputError(f"conjugation matrix is not symmetric (residual {sym:.3e})")

    @classmethod
    def standard(cls, dim: int) -> "ConjugationMap":
        """Plain coordinatewise conjugation."""
        return cls(np.eye(dim))


@dataclass
class AtomicMeasure:
    """Finitely atomic positive measure on the complex plane."""

    atoms: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.atoms = as_complex_vector(self.atoms, "atoms")
        self.masses = np.asarray(self.masses, dtype=np.float64)
        if self.masses.ndim != 1 or len(self.masses) != len(self.atoms):
            raise InputError("atoms and masses must have equal length")
        if len(self.atoms) == 0:
            raise InputError("measure must have at least one atom")
        if not np.all(self.masses > 0):
            raise InputError("all masses must be strictly positive")
        if len(np.unique(self.atoms)) != len(self.atoms):
            raise InputError("atom locations must be pairwise distinct")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def moment(self, k: int) -> complex:
        """Exact atom sum for the k-th power moment."""
        return complex(np.sum(self.masses * self.atoms**k))

    def union(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return AtomicMeasure(
            np.concatenate([self.atoms, other.atoms]),
            np.concatenate([self.masses, other.masses]),
        )


def _values_at_atoms(f, mu: AtomicMeasure) -> np.ndarray:
    if callable(f):
        return np.asarray([f(z) for z in mu.atoms], dtype=np.complex128)
    vals = np.asarray(f, dtype=np.complex128)
    if vals.shape != mu.atoms.shape:
        raise InputError("per-atom value array does not match the number of atoms")
    return vals


def inner_l2mu(f, g, mu: AtomicMeasure) -> complex:
    """Sesquilinear L^2(mu) inner product: sum_j m_j f(z_j) conj(g(z_j)).

    ``f`` and ``g`` may be callables or arrays of per-atom values.
    """
    fv = _values_at_atoms(f, mu)
    gv = _values_at_atoms(g, mu)
    # spelled out in real arithmetic so that swapping f and g conjugates
    # the result bit-exactly (numpy's vectorized complex multiply is not
    # bitwise commutative)
    fr, fi = fv.real, fv.imag
    gr, gi = gv.real, gv.imag
    re = float(np.sum(mu.masses * (fr * gr + fi * gi)))
    im = float(np.sum(mu.masses * (fi * gr - fr * gi)))
    return complex(re, im)


def bilinear_moment(f, g, mu: AtomicMeasure) -> complex:
    """Bilinear pairing: sum_j m_j f(z_j) g(z_j), no conjugation.

    This is the pairing that makes the recurrence polynomials orthonormal;
    it is NOT the L^2(mu) inner product.
    """
    fv = _values_at_atoms(f, mu)
    gv = _values_at_atoms(g, mu)
    # real arithmetic keeps the f <-> g symmetry bit-exact, see inner_l2mu
    fr, fi = fv.real, fv.imag
    gr, gi = gv.real, gv.imag
    re = float(np.sum(mu.masses * (fr * gr - fi * gi)))
    im = float(np.sum(mu.masses * (fr * gi + fi * gr)))
    return complex(re, im)


def gram_det(vectors) -> complex:
    """Determinant of the Gram matrix [(y_k, y_l)] (second slot conjugated).

    Computed through a pivoted LU factorization of the Gram matrix, not
    cofactor expansion.
    """
    if len(vectors) == 0:
        raise InputError("gram_det needs at least one vector")
    vs = [as_complex_vector(v) for v in vectors]
    n = len(vs[0])
    if any(len(v) != n for v in vs):
        raise InputError("all vectors must have the same dimension")
    v = np.array(vs)
    g = v @ v.conj().T
    return complex(np.linalg.det(g))


def hadamard_scale(vectors) -> float:
    """Product of squared norms; the natural magnitude scale for a Gram det."""
    out = 1.0
    for v in vectors:
        out *= float(np.vdot(v, v).real)
    return out


@dataclass
class GramReport:
    """Gram determinants Gamma_n for n = 1..d-1 with their zero-test scales."""

    values: list[tuple[int, complex]]
    scales: list[float] = field(default_factory=list)
    tol: float = DEFAULT_TOL

    @property
    def passed(self) -> bool:
        return all(
            rel_zero(abs(g), s, self.tol) for (_, g), s in zip(self.values, self.scales)
        )

    def max_relative(self) -> float:
        return max(
            abs(g) / max(1.0, s) for (_, g), s in zip(self.values, self.scales)
        )


# --- JSON helpers: complex numbers travel as [re, im] pairs -----------------

def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v) -> complex:
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise InputError(f"expected [re, im] pair, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def cvector_to_json(v: np.ndarray) -> list[list[float]]:
    return [complex_to_json(z) for z in np.asarray(v, dtype=np.complex128)]


def cvector_from_json(v) -> np.ndarray:
    if not isinstance(v, (list, tuple)):
        raise InputError("expected a list of [re, im] pairs")
    return np.array([complex_from_json(z) for z in v], dtype=np.complex128)


def cmatrix_to_json(m: np.ndarray) -> list[list[list[float]]]:
    return [cvector_to_json(row) for row in np.asarray(m, dtype=np.complex128)]


def cmatrix_from_json(rows) -> np.ndarray:
    if not isinstance(rows, (list, tuple)) or len(rows) == 0:
        raise InputError("expected a non-empty list of rows")
    return np.array([cvector_from_json(r) for r in rows], dtype=np.complex128)
