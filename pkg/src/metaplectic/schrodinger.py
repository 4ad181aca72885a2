"""Schrodinger equations with quadratic Weyl symbol.

The exact solver evaluates ``f(t) = mu(A_t) f0`` where ``A_t = exp(t J M)`` is
the Hamiltonian flow; a Strang split-step integrator serves as an independent
reference for separable Hamiltonians.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidComparisonError,
    InvalidInputError,
    MetaplecticError,
    StabilityError,
    UnsupportedHamiltonianError,
)
from .operators import apply
from .symplectic import TOL_FREE, QuadraticHamiltonian, hamiltonian_flow
from .wavefunction import Axis, SampledWavefunction

MAX_HERMITE = 40


@dataclass(frozen=True)
class PropagationJob:
    hamiltonian: QuadraticHamiltonian
    initial: SampledWavefunction
    times: tuple
    method: str = "metaplectic"
    splitstep_dt: float | None = None

    def __post_init__(self):
        times = tuple(float(t) for t in np.atleast_1d(self.times))
        if not times:
            raise InvalidInputError("times must be nonempty")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidInputError("times must be strictly increasing")
        if self.method not in ("metaplectic", "splitstep"):
            raise InvalidInputError(f"unknown method {self.method!r}")
        if self.hamiltonian.n != self.initial.n:
            raise InvalidInputError("Hamiltonian and wavefunction dimensions differ")
        if self.method == "splitstep":
            if self.splitstep_dt is None or not self.splitstep_dt > 0:
                raise InvalidInputError("splitstep needs a positive splitstep_dt")
            if times[0] < 0:
                raise InvalidInputError("splitstep propagates forward from t = 0")
            _step_counts(times, self.splitstep_dt)
        object.__setattr__(self, "times", times)


def _step_counts(times, dt) -> list[int]:
    counts = []
    prev = 0.0
    for t in times:
        gap = t - prev
        k = int(round(gap / dt))
        if abs(k * dt - gap) > 1e-12 * max(1.0, abs(gap)):
            raise InvalidInputError(f"splitstep_dt={dt} does not divide the gap {gap} before t={t}")
        counts.append(k)
        prev = t
    return counts


@dataclass
class PropagationResult:
    snapshots: list
    method: str
    metadata: dict = field(default_factory=dict)

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self.snapshots]

    @property
    def norms(self) -> list[float]:
        return [psi.l2_norm() for _, psi in self.snapshots]


def propagate_metaplectic(job: PropagationJob, method: str | None = None,
                          tol_free: float = TOL_FREE) -> PropagationResult:
    """Evaluate ``mu(A_t) f0`` independently at each requested time.

    ``t = 0`` returns ``f0`` itself (the ``+`` sheet). Non-free instants go
    through the two-factor decomposition. Sheets are not tracked continuously
    in ``t``, so snapshots agree with the true solution up to sign.
    """
    f0 = job.initial
    snaps = []
    for t in job.times:
        if t == 0.0:
            snaps.append((t, f0.with_values(f0.values.copy())))
            continue
        try:
            A_t = hamiltonian_flow(job.hamiltonian, t)
            snaps.append((t, apply(A_t, 0, f0, method=method, tol_free=tol_free)))
        except MetaplecticError as exc:
            raise type(exc)(f"at t={t}: {exc}") from exc
    return PropagationResult(snaps, "metaplectic", {"tol_free": tol_free})


def _kinetic_wavenumbers(axes):
    ks = [2 * np.pi * np.fft.fftfreq(ax.N, ax.dx) for ax in axes]
    return np.meshgrid(*ks, indexing="ij")


def propagate_splitstep(job: PropagationJob) -> PropagationResult:
    """Strang splitting ``e^{-iV dt/2} e^{-iK dt} e^{-iV dt/2}`` with FFT kinetic steps.

    Only ``H = 1/2 x.Vx + 1/2 p.Kp`` (no ``x p`` cross terms) is supported.
    """
    H = job.hamiltonian
    if not H.is_separable():
        raise UnsupportedHamiltonianError(
            "split-step reference handles separable M only (Weyl-ordered x.p terms unsupported)"
        )
    n = H.n
    V, K = H.M[:n, :n], H.M[n:, n:]
    f0 = job.initial
    hbar = f0.hbar
    X = np.stack(np.meshgrid(*[ax.points for ax in f0.axes], indexing="ij"), axis=-1)
    k = np.stack(_kinetic_wavenumbers(f0.axes), axis=-1)
    pot = 0.5 * np.einsum("...i,ij,...j->...", X, V, X)
    kin = 0.5 * hbar**2 * np.einsum("...i,ij,...j->...", k, K, k)
    axes = tuple(range(n))

    psi = f0.values.copy()
    snaps = []
    prev = 0.0
    for t, steps in zip(job.times, _step_counts(job.times, job.splitstep_dt)):
        if steps:
            dt = (t - prev) / steps
            half_v = np.exp(-0.5j * dt * pot / hbar)
            full_k = np.exp(-1j * dt * kin / hbar)
            for _ in range(steps):
                psi = half_v * psi
                psi = np.fft.ifftn(full_k * np.fft.fftn(psi, axes=axes), axes=axes)
                psi = half_v * psi
        snaps.append((t, f0.with_values(psi.copy())))
        prev = t
    return PropagationResult(snaps, "splitstep", {"dt": job.splitstep_dt})


def propagate(job: PropagationJob, **kwargs) -> PropagationResult:
    if job.method == "metaplectic":
        return propagate_metaplectic(job, **kwargs)
    return propagate_splitstep(job)


def hermite_state(k: int, axis: Axis, hbar: float = 1.0) -> SampledWavefunction:
    """Normalized oscillator eigenfunction ``h_k(x/sqrt(hbar)) hbar^(-1/4)``.

    Uses the three-term recurrence
    ``h_{j+1} = sqrt(2/(j+1)) xi h_j - sqrt(j/(j+1)) h_{j-1}``.
    """
    if int(k) != k or k < 0:
        raise InvalidInputError(f"k must be a nonnegative integer, got {k!r}")
    k = int(k)
    if k > MAX_HERMITE:
        raise StabilityError(f"k={k} exceeds the supported bound {MAX_HERMITE}")
    turning = np.sqrt(hbar * (2 * k + 1))
    lo, hi = axis.x0, axis.x0 + (axis.N - 1) * axis.dx
    margin = 6.0 * np.sqrt(hbar)
    if lo > -(turning + margin) or hi < turning + margin:
        raise StabilityError(
            f"grid [{lo:.3g}, {hi:.3g}] does not cover the turning points +-{turning:.3g} "
            f"with a {margin:.3g} decay margin"
        )
    if np.pi / axis.dx < (turning + margin) / hbar:
        raise StabilityError(f"grid step {axis.dx:.3g} too coarse for h_{k}")
    xi = axis.points / np.sqrt(hbar)
    h_prev = np.zeros_like(xi)
    h = np.pi**-0.25 * np.exp(-0.5 * xi**2)
    for j in range(k):
        h, h_prev = np.sqrt(2.0 / (j + 1)) * xi * h - np.sqrt(j / (j + 1)) * h_prev, h
    return SampledWavefunction((axis,), h * hbar**-0.25, hbar, label=f"hermite(k={k})")


@dataclass
class ComparisonReport:
    mode: str
    rows: list  # (t, l2_error, phase)

    @property
    def errors(self) -> list[float]:
        return [r[1] for r in self.rows]

    @property
    def max_error(self) -> float:
        return max(self.errors) if self.rows else 0.0


def compare_wavefunctions(a: SampledWavefunction, b: SampledWavefunction,
                          mode: str = "l2") -> tuple[float, float]:
    """``(L2 distance, phase)``; with ``up_to_global_phase`` the distance is
    ``min_phi ||a - e^{i phi} b||`` and ``phi = arg <b, a>``."""
    if not a.same_grid(b):
        raise InvalidComparisonError("wavefunctions live on different grids")
    if mode == "l2":
        phase = 0.0
    elif mode == "up_to_global_phase":
        ov = b.inner(a)
        phase = float(np.angle(ov)) if abs(ov) > 0 else 0.0
    else:
        raise InvalidInputError(f"unknown comparison mode {mode!r}")
    return (a - b * np.exp(1j * phase)).l2_norm(), phase


def compare_results(a: PropagationResult, b: PropagationResult,
                    mode: str = "l2") -> ComparisonReport:
    if len(a.snapshots) != len(b.snapshots) or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise InvalidComparisonError("results have different time lists")
    rows = []
    for (t, fa), (_, fb) in zip(a.snapshots, b.snapshots):
        err, phase = compare_wavefunctions(fa, fb, mode)
        rows.append((t, err, phase))
    return ComparisonReport(mode, rows)


def flow_consistency(H: QuadraticHamiltonian, f0: SampledWavefunction, s: float, t: float,
                     method: str | None = None) -> float:
    """Phase-modded L2 gap between ``mu(A_t) f0`` and ``mu(A_{t-s}) mu(A_s) f0``."""
    direct = apply(hamiltonian_flow(H, t), 0, f0, method=method)
    mid = apply(hamiltonian_flow(H, s), 0, f0, method=method)
    stepped = apply(hamiltonian_flow(H, t - s), 0, mid, method=method)
    return compare_wavefunctions(direct, stepped, "up_to_global_phase")[0]


OSCILLATOR = QuadraticHamiltonian(np.eye(2))
FREE_PARTICLE = QuadraticHamiltonian(np.diag([0.0, 1.0]))
