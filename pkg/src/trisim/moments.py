"""Spectral moments and the truncated moment problem on the complex plane.

Two jobs live here.  First, extracting the power moments s_k of the
bilinear spectral functional attached to a class matrix: extend the
matrix down-right with zero diagonal and unit off-diagonal entries,
truncate, and read s_k off the (0,0) entry of the plain (unconjugated)
k-th power.  Second, building a finitely atomic measure with prescribed
moments s_0..s_rho: a single atom handles (s_0, s_1), and each remaining
moment is supplied by a ring of equally spaced atoms on a circle whose
masses sample the density 1 + 2 Re(conj(ct) z^n).  With 2n+1 atoms the
roots-of-unity sums kill every aliased term, so the prescribed moments of
each ring hold exactly up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    AtomicMeasure,
    ConsistencyError,
    InputError,
    TridiagonalSymmetric,
    as_complex_vector,
)
from .classify import is_class_matrix

# Margin keeping |ct| <= 1/2 - MASS_DELTA, which floors every ring mass
# at 2 * MASS_DELTA * s0 / N.
MASS_DELTA = 1e-3
RADIUS_GROWTH = 1.5


@dataclass
class MomentSequence:
    """Power moments s_0..s_rho, with s_0 real and positive."""

    rho: int
    values: np.ndarray

    def __post_init__(self):
        self.values = as_complex_vector(self.values, "moments")
        if self.rho < 1:
            raise InputError("rho must be at least 1")
        if len(self.values) != self.rho + 1:
            raise InputError(f"expected {self.rho + 1} moments, got {len(self.values)}")
        s0 = self.values[0]
        if abs(s0.imag) > 1e-12 * max(1.0, abs(s0)) or s0.real <= 0:
            raise InputError("s_0 must be real and strictly positive")

    @property
    def s0(self) -> float:
        return float(self.values[0].real)


@dataclass
class ExtendedJacobi:
    """A class matrix extended down-right by b = 0, a = 1 and truncated at N."""

    base: TridiagonalSymmetric
    trunc: int
    diag: np.ndarray
    offdiag: np.ndarray

    def dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        m += np.diag(self.offdiag, 1)
        m += np.diag(self.offdiag, -1)
        return m


def extend_matrix(m: TridiagonalSymmetric, n: int) -> ExtendedJacobi:
    """Extend ``m`` to size ``n`` with zero diagonal and unit off-diagonal."""
    d = m.dim
    if n < d:
        raise InputError(f"truncation size {n} is below the base dimension {d}")
    diag = np.zeros(n, dtype=np.complex128)
    diag[:d] = m.diag
    offdiag = np.ones(n - 1, dtype=np.complex128)
    offdiag[: d - 1] = m.offdiag
    return ExtendedJacobi(base=m, trunc=n, diag=diag, offdiag=offdiag)


def _tri_matvec(diag: np.ndarray, offdiag: np.ndarray, c: np.ndarray) -> np.ndarray:
    # Fixed per-entry operation order so results are bit-identical across
    # truncation sizes (the extra rows only ever contribute exact zeros).
    out = diag * c
    out[:-1] += offdiag * c[1:]
    out[1:] += offdiag * c[:-1]
    return out


def spectral_moments(
    m: TridiagonalSymmetric, rho: int, trunc: int | None = None
) -> MomentSequence:
    """Moments s_k of the spectral functional of a class matrix.

    s_k is the coefficient of p_0 in the p-basis expansion of lambda^k;
    the coefficient vectors follow the same three-term pattern as the
    extended matrix, so s_k is the (0,0) entry of its plain k-th power.
    Any truncation size >= rho + 2 gives bit-identical results; the
    recursion cannot reach the extra rows in rho steps.
    """
    ok, _, reason = is_class_matrix(m.dense())
    if not ok:
        raise InputError(f"not a class matrix: {reason}")
    if rho < 1:
        raise InputError("rho must be at least 1")
    if trunc is None:
        trunc = rho + 2
    if trunc < rho + 2:
        raise InputError(f"truncation size must be at least rho + 2 = {rho + 2}")
    ext = extend_matrix(m, max(trunc, m.dim))
    c = np.zeros(ext.trunc, dtype=np.complex128)
    c[0] = 1.0
    s = np.empty(rho + 1, dtype=np.complex128)
    for k in range(rho + 1):
        s[k] = c[0]
        if k < rho:
            c = _tri_matvec(ext.diag, ext.offdiag, c)
    return MomentSequence(rho=rho, values=s)


@dataclass
class CircleSolution:
    """Atoms on the circle |z| = radius solving a gap moment problem.

    Prescribed moments: s_0 at order 0, zero at orders 1..order-1, and
    ``target`` at ``order``.
    """

    radius: float
    order: int
    target: complex
    measure: AtomicMeasure


def solve_rho1(s0: float, s1: complex) -> AtomicMeasure:
    """One atom at s1/s0 with mass s0 reproduces (s_0, s_1) exactly."""
    if s0 <= 0:
        raise InputError("s_0 must be strictly positive")
    return AtomicMeasure(np.array([complex(s1) / s0]), np.array([float(s0)]))


def toeplitz_solvability(ctilde: complex, rho: int) -> float:
    """Determinant 1 - |ct|^2 of the gap-moment Toeplitz matrix.

    The (rho+1) x (rho+1) Toeplitz matrix of the normalized circle problem
    is the identity with ct and conj(ct) in the corners; a positive
    determinant certifies solvability of the embedded truncated
    trigonometric moment problem.
    """
    if rho < 2:
        raise InputError("rho must be at least 2")
    return 1.0 - abs(complex(ctilde)) ** 2


def admissible_radius(s0: float, c: complex, n: int, delta: float = MASS_DELTA) -> float:
    """Smallest schedule-compliant radius for a gap problem, floored at 1."""
    need = (abs(complex(c)) / (s0 * (0.5 - delta))) ** (1.0 / n)
    # tiny pad so the |ct| check cannot fail to rounding at the boundary
    return max(1.0, need * (1.0 + 1e-9))


def solve_gap_moments(
    s0: float, c: complex, n: int, r: float, delta: float = MASS_DELTA
) -> CircleSolution:
    """Ring of 2n+1 atoms with moments (s0, 0, ..., 0, c) through order n.

    Atoms sit at r * exp(2 pi i j / N), N = 2n+1, with masses
    (s0/N) * (1 + 2 Re(conj(ct) exp(2 pi i j n / N))) for ct = (c/s0)/r^n.
    N = 2n+1 is what prevents the z^n density term from aliasing into any
    moment of order 1..n-1, so all n+1 prescribed moments are exact sums
    over roots of unity.  Masses stay positive as long as |ct| < 1/2.
    """
    if s0 <= 0:
        raise InputError("s_0 must be strictly positive")
    if n < 2:
        raise InputError("gap order must be at least 2")
    if r <= 0:
        raise InputError("radius must be positive")
    c = complex(c)
    ct = (c / s0) / r**n
    # delta = 0 admits the boundary |c~| = 1/2 (masses can still all be
    # positive there, as the positivity check below decides); the default
    # margin guarantees the mass floor 2*delta*s0/N
    if abs(ct) > 0.5 - delta:
        raise InputError(
            f"|c~| = {abs(ct):.4f} exceeds {0.5 - delta}; "
            f"choose a radius of at least {admissible_radius(s0, c, n, delta):.6g}"
        )
    big_n = 2 * n + 1
    j = np.arange(big_n)
    atoms = r * np.exp(2j * np.pi * j / big_n)
    masses = (s0 / big_n) * (
        1.0 + 2.0 * np.real(np.conj(ct) * np.exp(2j * np.pi * j * n / big_n))
    )
    if not np.all(masses > 0):
        raise ConsistencyError("non-positive ring mass despite the |c~| margin")
    return CircleSolution(
        radius=float(r), order=n, target=c, measure=AtomicMeasure(atoms, masses)
    )


@dataclass
class RadiusSchedule:
    """Knobs for choosing the ring radii in the measure construction."""

    gamma: float = RADIUS_GROWTH
    delta: float = MASS_DELTA

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise InputError("gamma must exceed 1 to keep the rings disjoint")
        if not (0.0 < self.delta < 0.5):
            raise InputError("delta must lie strictly between 0 and 1/2")


def algorithm1(
    seq: MomentSequence, schedule: RadiusSchedule | None = None
) -> AtomicMeasure:
    """Finitely atomic measure matching the prescribed moments s_0..s_rho.

    Step 1 spends a single atom on (s_0/rho, s_1).  Step n (2..rho) places
    a ring carrying mass s_0/rho whose order-n moment equals s_n minus the
    exact atom-sum contribution of everything built so far; lower ring
    moments vanish by construction.  The union of all pieces matches every
    prescribed moment.  Ring radii grow at least geometrically, so the
    rings are pairwise disjoint and never pass through the first atom.
    """
    if schedule is None:
        schedule = RadiusSchedule()
    rho = seq.rho
    if rho < 2:
        raise InputError("the stepwise construction needs rho >= 2")
    s0_step = seq.s0 / rho

    mu = solve_rho1(s0_step, seq.values[1])
    first_atom = complex(mu.atoms[0])
    r_prev = abs(first_atom) if first_atom != 0 else 1.0
    radii: list[float] = []
    for n in range(2, rho + 1):
        c_n = complex(seq.values[n]) - mu.moment(n)
        r_n = max(
            admissible_radius(s0_step, c_n, n, schedule.delta),
            schedule.gamma * r_prev,
            schedule.gamma * abs(first_atom),
            1.0,
        )
        ring = solve_gap_moments(s0_step, c_n, n, r_n, schedule.delta)
        mu = mu.union(ring.measure)
        radii.append(r_n)
        r_prev = r_n

    # schedule sanity: strictly separated radii, none through the first atom
    seps = np.diff(np.array([abs(first_atom)] + radii))
    if np.any(seps <= 1e-6 * np.array(radii)):
        raise ConsistencyError("radius schedule produced insufficiently separated rings")
    return mu


def verify_measure(mu: AtomicMeasure, seq: MomentSequence) -> np.ndarray:
    """Relative residual |sum m z^k - s_k| for each prescribed moment.

    The denominator max(1, |s_k|, max|z|^k * total mass) reflects the
    largest magnitude entering the atom sum; ring radii grow geometrically
    so an absolute residual would be meaningless at high orders.
    """
    zmax = float(np.max(np.abs(mu.atoms)))
    out = np.empty(seq.rho + 1)
    for k in range(seq.rho + 1):
        target = seq.values[k]
        got = mu.moment(k)
        scale = max(1.0, abs(target), zmax**k * mu.total_mass)
        out[k] = abs(got - target) / scale
    return out
