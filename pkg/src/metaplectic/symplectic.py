"""Linear algebra on the symplectic group Sp(n).

Matrices act on phase-space vectors ``z = (x, p)`` and are stored in block
form ``[[A, B], [C, D]]``. The symplectic form is ``J = [[0, I], [-I, 0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    FactorizationError,
    InvalidDimensionError,
    InvalidInputError,
    MaslovParityError,
    NotFreeError,
)

TOL_SYM = 1e-9
TOL_FREE = 1e-6

# Angles used by ``factor_free``: 64 evenly spaced points strictly inside (0, pi).
FACTOR_ANGLES = (np.arange(64) + 0.5) * np.pi / 64


def standard_symplectic_form(n: int) -> np.ndarray:
    """Return ``J = [[0, I_n], [-I_n, 0]]``."""
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def _half_dim(S: np.ndarray) -> int:
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {S.shape}")
    if S.shape[0] % 2 or S.shape[0] == 0:
        raise InvalidDimensionError(f"expected even dimension, got {S.shape[0]}")
    return S.shape[0] // 2


def symplectic_residual(S) -> float:
    """``max |S^T J S - J|``."""
    S = np.asarray(S, dtype=float)
    J = standard_symplectic_form(_half_dim(S))
    return float(np.max(np.abs(S.T @ J @ S - J)))


def is_symplectic(S, tol: float = TOL_SYM) -> bool:
    return symplectic_residual(S) <= tol


@dataclass(frozen=True)
class SymplecticMatrix:
    """A real ``2n x 2n`` matrix with ``S^T J S = J``.

    Validated on construction at ``tol``; the stored array is read-only.
    """

    entries: np.ndarray
    tol: float = field(default=TOL_SYM, compare=False, repr=False)

    def __post_init__(self):
        S = np.array(self.entries, dtype=float)
        _half_dim(S)
        if not np.all(np.isfinite(S)):
            raise InvalidInputError("matrix has non-finite entries")
        res = symplectic_residual(S)
        if res > self.tol:
            raise InvalidInputError(
                f"matrix is not symplectic: max|S^T J S - J| = {res:.3e} > {self.tol:.1e}"
            )
        S.setflags(write=False)
        object.__setattr__(self, "entries", S)

    @property
    def n(self) -> int:
        return self.entries.shape[0] // 2

    @property
    def A(self) -> np.ndarray:
        return self.entries[: self.n, : self.n]

    @property
    def B(self) -> np.ndarray:
        return self.entries[: self.n, self.n :]

    @property
    def C(self) -> np.ndarray:
        return self.entries[self.n :, : self.n]

    @property
    def D(self) -> np.ndarray:
        return self.entries[self.n :, self.n :]

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix(self.entries @ other.entries, tol=max(self.tol, other.tol))

    def inverse(self) -> "SymplecticMatrix":
        # S^{-1} = -J S^T J
        J = standard_symplectic_form(self.n)
        return SymplecticMatrix(-J @ self.entries.T @ J, tol=self.tol)

    def det_B(self) -> float:
        return float(np.linalg.det(self.B))

    @classmethod
    def identity(cls, n: int) -> "SymplecticMatrix":
        return cls(np.eye(2 * n))

    @classmethod
    def J(cls, n: int) -> "SymplecticMatrix":
        return cls(standard_symplectic_form(n))

    @classmethod
    def rotation(cls, angle: float, n: int = 1) -> "SymplecticMatrix":
        """``[[cos a I, sin a I], [-sin a I, cos a I]]``, the oscillator flow at time ``a``."""
        c, s = np.cos(angle), np.sin(angle)
        I = np.eye(n)
        return cls(np.block([[c * I, s * I], [-s * I, c * I]]))

    @classmethod
    def shear(cls, t: float, n: int = 1) -> "SymplecticMatrix":
        """Free-particle flow ``[[I, t I], [0, I]]``."""
        I = np.eye(n)
        return cls(np.block([[I, t * I], [np.zeros((n, n)), I]]))

    @classmethod
    def from_blocks(cls, A, B, C, D) -> "SymplecticMatrix":
        return cls(np.block([[np.atleast_2d(A), np.atleast_2d(B)],
                             [np.atleast_2d(C), np.atleast_2d(D)]]))


def is_free(S: SymplecticMatrix, tol_free: float = TOL_FREE) -> bool:
    """True iff ``|det B| > tol_free``."""
    return abs(S.det_B()) > tol_free


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """``H(z) = 1/2 z^T M z`` with ``M`` real symmetric."""

    M: np.ndarray
    tol: float = field(default=TOL_SYM, compare=False, repr=False)

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        _half_dim(M)
        if np.max(np.abs(M - M.T)) > self.tol:
            raise InvalidInputError("Hamiltonian matrix M is not symmetric")
        M = 0.5 * (M + M.T)
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @property
    def n(self) -> int:
        return self.M.shape[0] // 2

    def is_separable(self) -> bool:
        """No ``x p`` cross terms."""
        return not np.any(self.M[: self.n, self.n :])


def hamiltonian_flow(H: QuadraticHamiltonian, t: float) -> SymplecticMatrix:
    """Flow ``exp(t J M)`` of the linear Hamilton equations.

    ``scipy.linalg.expm`` uses scaling-and-squaring with a Pade approximant;
    symplecticity is checked on the result rather than enforced.
    """
    if not isinstance(H, QuadraticHamiltonian):
        H = QuadraticHamiltonian(H)
    J = standard_symplectic_form(H.n)
    return SymplecticMatrix(scipy.linalg.expm(t * (J @ H.M)))


def random_symplectic(n: int, seed: int) -> SymplecticMatrix:
    """``exp(J M)`` for a seeded symmetric ``M`` with entries in [-1, 1]."""
    J = standard_symplectic_form(n)
    rng = np.random.default_rng(seed)
    R = rng.uniform(-1.0, 1.0, size=(2 * n, 2 * n))
    M = 0.5 * (R + R.T)
    return SymplecticMatrix(scipy.linalg.expm(J @ M))


def fractional_rotation(alpha: float, n: int) -> SymplecticMatrix:
    return SymplecticMatrix.rotation(alpha, n)


def factor_free(S: SymplecticMatrix, tol_free: float = TOL_FREE):
    """Split ``S`` into two free factors ``(S1, S2)`` with ``S1 @ S2 == S``.

    The right factor is a fractional rotation ``F_a``; ``a`` is picked from a
    fixed angle grid to maximise ``min(|det B(S F_a^{-1})|, |det B(F_a)|)``.
    ``det(B cos a - A sin a)`` is a nonzero trigonometric polynomial, so only
    finitely many angles are excluded.
    """
    n = S.n
    A, B = S.A, S.B
    scores = []
    for a in FACTOR_ANGLES:
        left = abs(np.linalg.det(B * np.cos(a) - A * np.sin(a)))
        right = np.sin(a) ** n
        scores.append(min(left, right))
    scores = np.array(scores)
    k = int(np.argmax(scores))
    if scores[k] <= tol_free:
        raise FactorizationError(
            f"no admissible rotation angle: best score {scores[k]:.3e} at "
            f"alpha={FACTOR_ANGLES[k]:.4f} (tol_free={tol_free:.1e}); "
            f"det B = {S.det_B():.3e}"
        )
    F = fractional_rotation(FACTOR_ANGLES[k], n)
    S1 = SymplecticMatrix(S.entries @ F.inverse().entries, tol=S.tol)
    return S1, F


def admissible_maslov(det_B: float) -> int:
    """Smallest Maslov index compatible with ``sign(det B)``: 0 if positive, 1 if negative."""
    return 0 if det_B > 0 else 1


def check_maslov_parity(m: int, det_B: float) -> None:
    if (int(m) % 2 == 0) != (det_B > 0):
        raise MaslovParityError(
            f"Maslov index m={m} has wrong parity for det B = {det_B:.6g} "
            "(m must be even iff det B > 0)"
        )


@dataclass(frozen=True)
class QuadraticGeneratingFunction:
    """Coefficients of ``W(x, x') = 1/2 Px.x - Lx.x' + 1/2 Qx'.x'`` and Maslov index ``m``.

    For a free matrix: ``P = D B^-1``, ``L = B^-1``, ``Q = B^-1 A``.
    """

    P: np.ndarray
    L: np.ndarray
    Q: np.ndarray
    m: int

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def to_symplectic(self) -> SymplecticMatrix:
        Linv = np.linalg.inv(self.L)
        B = Linv
        A = Linv @ self.Q
        D = self.P @ Linv
        C = self.P @ Linv @ self.Q - self.L.T
        return SymplecticMatrix(np.block([[A, B], [C, D]]))

    def W(self, x, xp) -> np.ndarray:
        """Evaluate the quadratic form; the last axis of ``x``/``xp`` indexes coordinates."""
        x = np.asarray(x, dtype=float)
        xp = np.asarray(xp, dtype=float)
        return (
            0.5 * np.einsum("...i,ij,...j->...", x, self.P, x)
            - np.einsum("...i,ij,...j->...", xp, self.L, x)
            + 0.5 * np.einsum("...i,ij,...j->...", xp, self.Q, xp)
        )


def generating_function(
    S: SymplecticMatrix, m: int | None = None, tol_free: float = TOL_FREE
) -> QuadraticGeneratingFunction:
    if not is_free(S, tol_free):
        raise NotFreeError(f"generating function needs det B != 0 (det B = {S.det_B():.3e})")
    det_B = S.det_B()
    if m is None:
        m = admissible_maslov(det_B)
    check_maslov_parity(m, det_B)
    L = np.linalg.inv(S.B)
    P = S.D @ L
    Q = L @ S.A
    P = 0.5 * (P + P.T)
    Q = 0.5 * (Q + Q.T)
    for arr in (P, L, Q):
        arr.setflags(write=False)
    return QuadraticGeneratingFunction(P=P, L=L, Q=Q, m=int(m) % 4)
