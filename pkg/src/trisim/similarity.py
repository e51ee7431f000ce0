"""The polynomial family, the similarity transform, and its verification.

The three-term recurrence read off the extended matrix generates
polynomials p_0, p_1, ... that are orthonormal under the *bilinear*
pairing against the constructed measure.  Mapping the canonical basis
vector u_k to p_k(z) defines a transform T into L^2 of the measure, and
conjugating the operator by T exposes it as multiplication by z on
polynomials of degree < d plus a rank-one term supported on the top
basis vector.  Everything here is checked numerically at the atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    AtomicMeasure,
    ConsistencyError,
    InputError,
    TridiagonalSymmetric,
    as_complex_vector,
)
from .classify import is_class_matrix
from .moments import (
    ExtendedJacobi,
    RadiusSchedule,
    algorithm1,
    extend_matrix,
    spectral_moments,
)

ORTHONORMALITY_TOL = 1e-8


@dataclass
class PolynomialFamily:
    """Monomial coefficient rows of p_0..p_{n_max}; row n has degree exactly n."""

    coeffs: np.ndarray  # (n_max + 1, n_max + 1) lower triangular

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[0] - 1

    def eval(self, n: int, z) -> np.ndarray:
        """Evaluate p_n from its coefficient row (the unstable path; used
        only for cross-checks against the recurrence evaluation)."""
        return np.polyval(self.coeffs[n, : n + 1][::-1], np.asarray(z))

    def leading(self, n: int) -> complex:
        return complex(self.coeffs[n, n])


def build_polynomials(m: TridiagonalSymmetric, n_max: int) -> PolynomialFamily:
    """Coefficient table of the recurrence polynomials up to degree n_max.

    p_0 = 1 and p_{n+1} = ((z - b_n) p_n - a_{n-1} p_{n-1}) / a_n with the
    coefficients taken from the extended matrix; the leading coefficient of
    p_n is forced to 1/(a_0 ... a_{n-1}).
    """
    if n_max < 0:
        raise InputError("n_max must be non-negative")
    ext = extend_matrix(m, max(m.dim, n_max + 1))
    for k in range(min(n_max, len(ext.offdiag))):
        if abs(ext.offdiag[k]) < 1e-14:
            raise InputError(f"cannot divide by a_{k} = 0 in the recurrence")
    table = np.zeros((n_max + 1, n_max + 1), dtype=np.complex128)
    table[0, 0] = 1.0
    if n_max == 0:
        return PolynomialFamily(table)
    prev = np.zeros(n_max + 1, dtype=np.complex128)  # p_{-1} = 0
    cur = table[0].copy()
    for n in range(n_max):
        a_n = ext.offdiag[n]
        a_prev = ext.offdiag[n - 1] if n > 0 else 0.0
        nxt = np.roll(cur, 1)  # z * p_n (degree < n_max guarantees no wrap loss)
        nxt[0] = 0.0
        nxt -= ext.diag[n] * cur
        nxt -= a_prev * prev
        nxt /= a_n
        table[n + 1] = nxt
        prev, cur = cur, nxt
    return PolynomialFamily(table)


def eval_recurrence(ext: ExtendedJacobi, n_max: int, z: np.ndarray) -> np.ndarray:
    """Values p_n(z_j) for n = 0..n_max by the three-term recurrence.

    This is the stable evaluation path; the coefficient table exists for
    degree assertions and reports.
    """
    z = np.asarray(z, dtype=np.complex128)
    if n_max + 1 > ext.trunc:
        raise InputError("extension too short for the requested degree")
    vals = np.empty((n_max + 1, len(z)), dtype=np.complex128)
    vals[0] = 1.0
    if n_max >= 1:
        vals[1] = (z - ext.diag[0]) / ext.offdiag[0]
    for n in range(1, n_max):
        vals[n + 1] = (
            (z - ext.diag[n]) * vals[n] - ext.offdiag[n - 1] * vals[n - 1]
        ) / ext.offdiag[n]
    return vals


def poly_of_operator_vector(
    m: TridiagonalSymmetric, family: PolynomialFamily, k: int
) -> np.ndarray:
    """p_k(A) applied to e_0, by Horner evaluation on the dense matrix.

    By the recurrence this equals the k-th standard basis vector; any
    deviation signals a recurrence or extension bug.
    """
    d = m.dim
    if not 0 <= k <= d - 1:
        raise InputError(f"k must lie in 0..{d - 1}")
    a = m.dense()
    e0 = np.zeros(d, dtype=np.complex128)
    e0[0] = 1.0
    out = np.zeros(d, dtype=np.complex128)
    for c in family.coeffs[k, : k + 1][::-1]:
        out = a @ out + c * e0
    return out


@dataclass
class SimilarityData:
    """Everything defining T and the rank-one representation.

    The transform sends the k-th canonical basis vector to p_k(z); its
    inverse is coefficient extraction in the p-basis.  The rank-one
    perturbation is a(z) (., b(z)) with a = -a_{d-1} p_d and b the complex
    conjugate of p_{d-1}.
    """

    measure: AtomicMeasure
    polys: PolynomialFamily
    dim: int
    rank_one_scale: complex  # a_{d-1} of the extended matrix
    extended: ExtendedJacobi = field(repr=False)
    # values p_n(z_j), n = 0..d, at the atoms (recurrence path)
    poly_at_atoms: np.ndarray = field(repr=False, default=None)

    def left_factor_values(self) -> np.ndarray:
        """a(z) = -a_{d-1} p_d(z) at the atoms."""
        return -self.rank_one_scale * self.poly_at_atoms[self.dim]

    def right_factor_values(self) -> np.ndarray:
        """b(z) = conj(p_{d-1}(z)) at the atoms."""
        return np.conj(self.poly_at_atoms[self.dim - 1])

    def node_matrix(self) -> np.ndarray:
        """V[j, k] = sqrt(m_j) p_k(z_j), k < d; full rank certifies T invertible."""
        return np.sqrt(self.measure.masses)[:, None] * self.poly_at_atoms[: self.dim].T


def orthonormality_residuals(
    poly_at_atoms: np.ndarray, mu: AtomicMeasure, n_max: int
) -> np.ndarray:
    """Relative deviation of the bilinear Gram matrix from the identity.

    Entry (m, n) is |sum_j w_j p_n p_m - delta| divided by the largest
    magnitude entering that sum; far-out rings make the absolute terms
    huge, so the zero test must be relative.
    """
    p = poly_at_atoms[: n_max + 1]
    w = mu.masses
    gram = (p * w) @ p.T
    scales = (np.abs(p) * w) @ np.abs(p).T
    return np.abs(gram - np.eye(n_max + 1)) / np.maximum(1.0, scales)


def build_transform(
    m: TridiagonalSymmetric,
    rho: int | None = None,
    schedule: RadiusSchedule | None = None,
    tol: float = ORTHONORMALITY_TOL,
) -> SimilarityData:
    """Run the whole construction for one class matrix.

    Spectral moments up to rho (default 2d+1), the atomic measure from the
    stepwise construction, and the polynomial family up to degree d; the
    bilinear orthonormality and the rank of the node matrix are asserted
    before the data is returned.
    """
    ok, _, reason = is_class_matrix(m.dense())
    if not ok:
        raise InputError(f"not a class matrix: {reason}")
    d = m.dim
    if rho is None:
        rho = 2 * d + 1
    if rho <= 2 * d:
        raise InputError(f"rho must exceed 2d = {2 * d}")
    seq = spectral_moments(m, rho)
    mu = algorithm1(seq, schedule)
    if mu.n_atoms <= 2 * d:
        raise ConsistencyError("measure has too few atoms to force T injective")
    family = build_polynomials(m, d)
    ext = extend_matrix(m, max(d + 1, rho + 2))
    pvals = eval_recurrence(ext, d, mu.atoms)

    resid = orthonormality_residuals(pvals, mu, d)
    worst = float(np.max(resid))
    if worst > tol:
        raise ConsistencyError(
            f"bilinear orthonormality fails: largest relative residual {worst:.3e}"
        )
    data = SimilarityData(
        measure=mu,
        polys=family,
        dim=d,
        rank_one_scale=complex(ext.offdiag[d - 1]),
        extended=ext,
        poly_at_atoms=pvals,
    )
    smin = check_invertible(data)
    if smin <= 0:
        raise ConsistencyError("node matrix is rank deficient; T is not invertible")
    return data


def check_invertible(data: SimilarityData) -> float:
    """Smallest singular value of the node matrix; positive means T invertible."""
    v = data.node_matrix()
    if v.shape[0] < data.dim:
        raise InputError("fewer atoms than the dimension; node matrix cannot have full rank")
    return float(np.linalg.svd(v, compute_uv=False)[-1])


def apply_lhs(
    m: TridiagonalSymmetric, data: SimilarityData, u: np.ndarray
) -> np.ndarray:
    """(T A T^{-1} u) at the atoms, for u given by p-basis coefficients.

    T^{-1} reads the coefficients as canonical-basis coordinates, the dense
    matrix acts there, and T re-expands in the p-basis.
    """
    u = as_complex_vector(u, "u")
    if len(u) != data.dim:
        raise InputError(f"coefficient vector must have length {data.dim}")
    eta = m.dense() @ u
    return eta @ data.poly_at_atoms[: data.dim]


def apply_rhs(data: SimilarityData, u: np.ndarray) -> np.ndarray:
    """(Z_0 + a(z)(., b(z))) u at the atoms.

    Multiplication by z plus the rank-one term.  The sesquilinear pairing
    against conj(p_{d-1}) collapses to the bilinear pairing against
    p_{d-1}, which by orthonormality is exactly the top p-basis
    coefficient of u; extracting it that way keeps the rank-one term
    identically zero on the lower basis vectors instead of polluted by
    cancellation noise from the far rings.  The atom-summed pairing
    itself is validated separately by ``orthonormality_residuals``.
    """
    u = as_complex_vector(u, "u")
    if len(u) != data.dim:
        raise InputError(f"coefficient vector must have length {data.dim}")
    uvals = u @ data.poly_at_atoms[: data.dim]
    coef = u[data.dim - 1]
    return data.measure.atoms * uvals + data.left_factor_values() * coef


@dataclass
class SimilarityReport:
    residuals: np.ndarray
    orthonormality: float
    tol: float

    @property
    def max_residual(self) -> float:
        return max(float(np.max(self.residuals)), self.orthonormality)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def verify_similarity(
    m: TridiagonalSymmetric, data: SimilarityData, tol: float = ORTHONORMALITY_TOL
) -> SimilarityReport:
    """Residuals of the similarity identity on each p-basis vector.

    For each k the two sides are evaluated at the atoms by independent
    paths and compared in the measure-weighted norm, relative to the norm
    of the right-hand side.  The report also carries the bilinear
    orthonormality residual of the supplied measure, which is what the
    rank-one reduction in ``apply_rhs`` leans on; a perturbed measure
    fails through that channel.
    """
    d = data.dim
    w = data.measure.masses
    res = np.empty(d)
    for k in range(d):
        e = np.zeros(d, dtype=np.complex128)
        e[k] = 1.0
        lhs = apply_lhs(m, data, e)
        rhs = apply_rhs(data, e)
        denom = float(np.sqrt(np.sum(w * np.abs(rhs) ** 2)))
        num = float(np.sqrt(np.sum(w * np.abs(lhs - rhs) ** 2)))
        res[k] = num / (denom if denom > 0 else 1.0)
    orth = float(
        np.max(orthonormality_residuals(data.poly_at_atoms, data.measure, d))
    )
    return SimilarityReport(residuals=res, orthonormality=orth, tol=tol)
