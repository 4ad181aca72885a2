"""Free metaplectic operators on sampled wavefunctions.

A free symplectic matrix ``S`` (``det B != 0``) lifts to the quadratic Fourier
integral operator

    mu(S) f(x) = (2 pi hbar)^(-n/2) i^(m - n/2) |det B|^(-1/2)
                 * int exp(i W(x, x') / hbar) f(x') dx'

with ``W`` from :func:`~metaplectic.symplectic.generating_function`. The
Maslov index ``m`` is even iff ``det B > 0``; ``m`` and ``m + 2`` give the two
lifts ``+-mu(S)``. Non-free matrices are handled by splitting them into two
free factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import czt

from .errors import (
    AliasingRiskError,
    DivergentGaussianError,
    InvalidInputError,
    NotFreeError,
)
from .symplectic import (
    TOL_FREE,
    QuadraticGeneratingFunction,
    SymplecticMatrix,
    admissible_maslov,
    factor_free,
    generating_function,
    is_free,
)
from .wavefunction import SampledWavefunction

# rows of the dense kernel built at once by the n = 2 direct method
_CHUNK = 256


def maslov_phase(m: int, n: int) -> complex:
    """``i^(m - n/2)`` on the principal branch."""
    return complex(np.exp(0.5j * np.pi * (m - 0.5 * n)))


@dataclass(frozen=True)
class FreeMetaplecticOp:
    gen: QuadraticGeneratingFunction
    source: SymplecticMatrix
    hbar: float = 1.0

    @classmethod
    def from_matrix(cls, S: SymplecticMatrix, m: int | None = None, hbar: float = 1.0,
                    tol_free: float = TOL_FREE) -> "FreeMetaplecticOp":
        return cls(generating_function(S, m, tol_free), S, float(hbar))

    @property
    def n(self) -> int:
        return self.source.n

    def prefactor(self) -> complex:
        n = self.n
        return (
            (2 * np.pi * self.hbar) ** (-0.5 * n)
            * maslov_phase(self.gen.m, n)
            * abs(np.linalg.det(self.gen.L)) ** 0.5
        )


def aliasing_margin(op: FreeMetaplecticOp, psi: SampledWavefunction) -> float:
    """``pi hbar / dx`` minus the largest chirp/kernel frequency reached on the grid.

    Negative means the quadratic phases are undersampled.
    """
    g = op.gen
    x_max = max(ax.x_max for ax in psi.axes)
    dx = max(ax.dx for ax in psi.axes)
    chirp = max(np.linalg.norm(g.P, 2), np.linalg.norm(g.Q, 2))
    reach = (chirp + np.linalg.norm(g.L, 2)) * x_max
    return np.pi * psi.hbar / dx - reach


def _check(op: FreeMetaplecticOp, psi: SampledWavefunction, allow_aliasing: bool) -> None:
    if not np.isclose(op.hbar, psi.hbar, rtol=1e-12, atol=0):
        raise InvalidInputError(f"hbar mismatch: operator {op.hbar}, wavefunction {psi.hbar}")
    if op.n != psi.n:
        raise InvalidInputError(f"operator acts on n={op.n}, wavefunction has n={psi.n}")
    if not allow_aliasing:
        margin = aliasing_margin(op, psi)
        if margin < 0:
            raise AliasingRiskError(
                f"grid too coarse for the quadratic phase: frequency reach exceeds "
                f"pi*hbar/dx by {-margin:.3g}; refine dx or pass allow_aliasing=True"
            )


def _direct_1d(op: FreeMetaplecticOp, psi: SampledWavefunction) -> np.ndarray:
    (ax,) = psi.axes
    x = ax.points
    P, L, Q = (float(M[0, 0]) for M in (op.gen.P, op.gen.L, op.gen.Q))
    phase = (0.5 * P * x[:, None] ** 2 - L * x[:, None] * x[None, :]
             + 0.5 * Q * x[None, :] ** 2) / op.hbar
    return np.exp(1j * phase) @ (ax.trapezoid_weights() * psi.values)


def _direct_nd(op: FreeMetaplecticOp, psi: SampledWavefunction) -> np.ndarray:
    X = psi.points()
    w = np.ones(1)
    for ax in psi.axes:
        w = np.multiply.outer(w, ax.trapezoid_weights())
    src = (w.reshape(psi.values.shape) * psi.values).ravel()
    src = src * np.exp(0.5j * np.einsum("ki,ij,kj->k", X, op.gen.Q, X) / op.hbar)
    out = np.empty(X.shape[0], dtype=complex)
    for start in range(0, X.shape[0], _CHUNK):
        Xo = X[start : start + _CHUNK]
        cross = (Xo @ op.gen.L.T) @ X.T  # (L x) . x'
        out[start : start + _CHUNK] = np.exp(-1j * cross / op.hbar) @ src
    out *= np.exp(0.5j * np.einsum("ki,ij,kj->k", X, op.gen.P, X) / op.hbar)
    return out.reshape(psi.values.shape)


def _fast_1d(op: FreeMetaplecticOp, psi: SampledWavefunction) -> np.ndarray:
    """Chirp multiply, chirp-Z transform for the ``exp(-i L x x'/hbar)`` kernel, chirp multiply."""
    (ax,) = psi.axes
    h = op.hbar
    x0, dx, N = ax.x0, ax.dx, ax.N
    x = ax.points
    j = np.arange(N)
    P, L, Q = (float(M[0, 0]) for M in (op.gen.P, op.gen.L, op.gen.Q))
    # x_k x_j = x0^2 + x0 dx (j + k) + dx^2 j k
    g = ax.trapezoid_weights() * psi.values * np.exp(1j * (0.5 * Q * x**2 - L * x0 * dx * j) / h)
    X = czt(g, m=N, w=np.exp(-1j * L * dx * dx / h), a=1.0)
    return X * np.exp(1j * (0.5 * P * x**2 - L * x0 * x0 - L * x0 * dx * j) / h)


def apply_free(op: FreeMetaplecticOp, psi: SampledWavefunction, method: str = "fast",
               allow_aliasing: bool = False) -> SampledWavefunction:
    """Apply ``mu_{W,m}(S)`` on the input grid (output grid == input grid).

    ``method="direct"`` is the dense trapezoid quadrature, ``O(N^(2n))``;
    ``method="fast"`` (n = 1 only) evaluates the same discrete sum in
    ``O(N log N)``.
    """
    _check(op, psi, allow_aliasing)
    if method == "fast":
        if psi.n != 1:
            raise InvalidInputError("method='fast' supports n = 1 only")
        vals = _fast_1d(op, psi)
    elif method == "direct":
        vals = _direct_1d(op, psi) if psi.n == 1 else _direct_nd(op, psi)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    return psi.with_values(op.prefactor() * vals)


def default_method(psi: SampledWavefunction) -> str:
    return "fast" if psi.n == 1 else "direct"


def apply(S: SymplecticMatrix, m_choice: int, psi: SampledWavefunction, method: str | None = None,
          tol_free: float = TOL_FREE, allow_aliasing: bool = False) -> SampledWavefunction:
    """Apply one of the two lifts ``+-mu(S)`` for any symplectic ``S``.

    Free matrices use the integral operator directly with the smallest
    admissible Maslov index. Otherwise ``S = S1 S2`` with both factors free and
    the result is ``mu(S1) mu(S2) psi``. ``m_choice`` in {0, 1} flips the sign.
    """
    if m_choice not in (0, 1):
        raise InvalidInputError(f"m_choice must be 0 or 1, got {m_choice!r}")
    method = method or default_method(psi)
    hbar = psi.hbar
    if is_free(S, tol_free):
        m = admissible_maslov(S.det_B()) + 2 * m_choice
        return apply_free(FreeMetaplecticOp.from_matrix(S, m, hbar, tol_free), psi,
                          method, allow_aliasing)
    S1, S2 = factor_free(S, tol_free)
    mid = apply_free(FreeMetaplecticOp.from_matrix(S2, None, hbar, tol_free), psi,
                     method, allow_aliasing)
    out = apply_free(FreeMetaplecticOp.from_matrix(S1, None, hbar, tol_free), mid,
                     method, allow_aliasing)
    return out * -1.0 if m_choice else out


def gaussian_oracle(op: FreeMetaplecticOp, a: complex):
    """Exact image of ``exp(-a x^2 / (2 hbar))`` under ``op`` (n = 1).

    Returns ``(b, c)`` with ``op psi = c exp(-b x^2 / (2 hbar))``:

        b = L^2 / (a - iQ) - iP,   c = i^(m - 1/2) |L|^(1/2) (a - iQ)^(-1/2)

    using the principal square root (valid since ``Re(a - iQ) > 0``).
    """
    if op.n != 1:
        raise InvalidInputError("gaussian_oracle is one-dimensional")
    a = complex(a)
    if not a.real > 0:
        raise DivergentGaussianError(f"need Re a > 0, got a = {a}")
    P, L, Q = (float(M[0, 0]) for M in (op.gen.P, op.gen.L, op.gen.Q))
    s = a - 1j * Q
    b = L * L / s - 1j * P
    c = maslov_phase(op.gen.m, 1) * abs(L) ** 0.5 / np.sqrt(s)
    return complex(b), complex(c)


def compose_and_compare(S1: SymplecticMatrix, S2: SymplecticMatrix, psi: SampledWavefunction,
                        method: str | None = None, tol_free: float = TOL_FREE) -> complex:
    """Best-fit scalar ``c`` with ``mu(S1) mu(S2) psi ~= c mu(S1 S2) psi``.

    All three matrices must be free; for genuine lifts ``c`` is +1 or -1.
    """
    S12 = S1 @ S2
    for name, S in (("S1", S1), ("S2", S2), ("S1 S2", S12)):
        if not is_free(S, tol_free):
            raise NotFreeError(f"{name} is not free (det B = {S.det_B():.3e})")
    method = method or default_method(psi)
    hbar = psi.hbar
    op = lambda S: FreeMetaplecticOp.from_matrix(S, None, hbar, tol_free)  # noqa: E731
    phi1 = apply_free(op(S1), apply_free(op(S2), psi, method), method)
    phi2 = apply_free(op(S12), psi, method)
    return phi2.inner(phi1) / phi2.inner(phi2)
