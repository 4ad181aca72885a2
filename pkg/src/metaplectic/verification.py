"""Invariant and oracle checks backing ``metaplectic verify`` and the acceptance tests.

Each check returns a :class:`CheckResult`; tolerances are fixed module constants.
"""

from __future__ import annotations

import functools
import inspect
import math
import time
from dataclasses import dataclass

import numpy as np

from .amalgam import (
    BOUND_SLACK,
    AmalgamNormSpec,
    amalgam_norm,
    cross_estimate_experiment,
    default_family,
    l2_calibration,
    moyal_sum,
    regularity_experiment,
    same_space_estimate_experiment,
)
from .operators import FreeMetaplecticOp, apply_free, compose_and_compare
from .schrodinger import (
    OSCILLATOR,
    PropagationJob,
    compare_results,
    compare_wavefunctions,
    hermite_state,
    propagate_metaplectic,
    propagate_splitstep,
)
from .suites import free_suite, free_triple_suite
from .symplectic import (
    SymplecticMatrix,
    factor_free,
    random_symplectic,
    symplectic_residual,
)
from .wavefunction import Axis, gaussian

TOL_SYMPLECTIC = 1e-9
TOL_FACTOR_RESIDUAL = 1e-9
TOL_FACTOR_FREE = 1e-6
TOL_FAST_DIRECT = 1e-8
TOL_UNITARITY = 1e-5
TOL_DOUBLE_COVER = 1e-5
TOL_EIGENSTATE = 1e-4
TOL_CROSS_METHOD = 1e-4
ORDER_TARGET, ORDER_TOL = 2.0, 0.2
TOL_PARITY = 1e-4
TOL_MOYAL = 1e-4
TOL_L2_CALIBRATION = 1e-3
TOL_REFINEMENT = 5e-3
TOL_SELF_DUAL = 1e-3
TOL_PERIODIC = 1e-3

DEFAULT_AXIS = Axis.symmetric(12.0, 1024)


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: measured={self.measured:.3e} tol={self.tolerance:.1e} "
                f"({self.seconds:.1f}s) {self.detail}")


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    return wrapper


@_timed
def check_symplectic_suite(seed: int = 0, count: int = 100) -> CheckResult:
    """Random matrices are symplectic; both factors are free and multiply back."""
    t0 = time.perf_counter()
    worst_sym = worst_res = 0.0
    worst_det = math.inf
    for i in range(count):
        S = random_symplectic(1 + i % 2, seed + i)
        worst_sym = max(worst_sym, symplectic_residual(S.entries))
        S1, S2 = factor_free(S)
        worst_res = max(worst_res, float(np.max(np.abs(S1.entries @ S2.entries - S.entries))))
        worst_det = min(worst_det, abs(S1.det_B()), abs(S2.det_B()))
    elapsed = time.perf_counter() - t0
    ok = (worst_sym <= TOL_SYMPLECTIC and worst_res <= TOL_FACTOR_RESIDUAL
          and worst_det >= TOL_FACTOR_FREE and elapsed < 5.0)
    return CheckResult("1 symplectic suite", ok, max(worst_sym, worst_res), TOL_SYMPLECTIC,
                       f"min|det B|={worst_det:.3e} time={elapsed:.2f}s<5s")


@_timed
def check_free_operator(seed: int = 0) -> CheckResult:
    """Fast vs direct quadrature on N=256; unitarity on N=1024."""
    t0 = time.perf_counter()
    small = Axis.symmetric(10.0, 256)
    psi_s = gaussian(small, 1.0)
    gap = 0.0
    for _, S in free_suite(20, small, seed=seed):
        op = FreeMetaplecticOp.from_matrix(S)
        d = apply_free(op, psi_s, "direct") - apply_free(op, psi_s, "fast")
        gap = max(gap, d.l2_norm())
    psi = gaussian(DEFAULT_AXIS, 1.0)
    drift = 0.0
    for _, S in free_suite(50, DEFAULT_AXIS, seed=seed):
        out = apply_free(FreeMetaplecticOp.from_matrix(S), psi)
        drift = max(drift, abs(out.l2_norm() / psi.l2_norm() - 1.0))
    elapsed = time.perf_counter() - t0
    ok = gap <= TOL_FAST_DIRECT and drift <= TOL_UNITARITY and elapsed < 30.0
    return CheckResult("2 free operator realization", ok, gap, TOL_FAST_DIRECT,
                       f"unitarity drift={drift:.3e} (tol {TOL_UNITARITY:.0e}) time={elapsed:.2f}s<30s")


@_timed
def check_double_cover(seed: int = 0) -> CheckResult:
    psi = gaussian(DEFAULT_AXIS, 1.0)
    worst = 0.0
    for _, S1, S2 in free_triple_suite(20, DEFAULT_AXIS, seed=seed):
        c = compose_and_compare(S1, S2, psi)
        worst = max(worst, min(abs(c - 1), abs(c + 1)))
    return CheckResult("3 double cover", worst <= TOL_DOUBLE_COVER, worst, TOL_DOUBLE_COVER)


def _richardson_order(f0, t, dts):
    sols = []
    for dt in dts:
        job = PropagationJob(OSCILLATOR, f0, (t,), "splitstep", dt)
        sols.append(propagate_splitstep(job).snapshots[0][1])
    e1 = (sols[0] - sols[1]).l2_norm()
    e2 = (sols[1] - sols[2]).l2_norm()
    return math.log2(e1 / e2)


@_timed
def check_oscillator() -> CheckResult:
    t0 = time.perf_counter()
    times = (np.pi / 8, np.pi / 4, np.pi / 2)
    eig = cross = 0.0
    for k in range(4):
        h = hermite_state(k, DEFAULT_AXIS)
        meta = propagate_metaplectic(PropagationJob(OSCILLATOR, h, times))
        for t, f in meta.snapshots:
            expect = np.exp(-1j * (k + 0.5) * t) * h.values
            eig = max(eig, min(np.max(np.abs(f.values - s * expect)) for s in (1, -1)))
        split = propagate_splitstep(PropagationJob(OSCILLATOR, h, times, "splitstep", np.pi / 2000))
        cross = max(cross, compare_results(meta, split, "up_to_global_phase").max_error)
    order = _richardson_order(gaussian(DEFAULT_AXIS, 2.0, center=1.0), np.pi / 2,
                              (np.pi / 100, np.pi / 200, np.pi / 400))
    elapsed = time.perf_counter() - t0
    ok = (eig < TOL_EIGENSTATE and cross < TOL_CROSS_METHOD
          and abs(order - ORDER_TARGET) <= ORDER_TOL and elapsed < 60.0)
    return CheckResult("4 oscillator propagation", ok, eig, TOL_EIGENSTATE,
                       f"splitstep gap={cross:.3e} order={order:.3f} time={elapsed:.2f}s<60s")


def caustic_phase(n: int = 1) -> complex:
    """Phase of the lift reached at ``A_t = -I``: ``mu(-I) = +- i^(-n) * parity``."""
    return complex(1j ** (-n))


@_timed
def check_caustic() -> CheckResult:
    inputs = [hermite_state(k, DEFAULT_AXIS) for k in range(4)]
    inputs.append(gaussian(DEFAULT_AXIS, 2.0, center=1.5))
    inputs.append(gaussian(DEFAULT_AXIS, 1.0 - 0.5j, center=-2.0))
    worst = 0.0
    worst_phase_free = 0.0
    for f0 in inputs:
        f = propagate_metaplectic(PropagationJob(OSCILLATOR, f0, (np.pi,))).snapshots[0][1]
        parity = f0.reflected()
        worst = max(worst, min(np.max(np.abs(f.values - s * caustic_phase() * parity.values))
                               for s in (1, -1)))
        worst_phase_free = max(worst_phase_free,
                               compare_wavefunctions(f, parity, "up_to_global_phase")[0])
    return CheckResult("5 caustic via factorization", worst < TOL_PARITY, worst, TOL_PARITY,
                       f"phase-free L2 gap={worst_phase_free:.3e}; lift phase i^-1")


@_timed
def check_amalgam_engine() -> CheckResult:
    spec = AmalgamNormSpec(2, 2)
    # (2, 2) is refinement-invariant by Moyal; the others are not
    pairs = ((2, 2), (1, 1), (1, math.inf), (math.inf, 1))
    moyal = calib = refine = 0.0
    for f in default_family(DEFAULT_AXIS):
        nrm2 = f.l2_norm() ** 2
        moyal = max(moyal, abs(moyal_sum(f, spec) / nrm2 - 1))
        a = amalgam_norm(f, spec)
        calib = max(calib, abs(a / (l2_calibration(f.hbar) * f.l2_norm()) - 1))
        for p, q in pairs:
            base = amalgam_norm(f, spec.with_exponents(p, q))
            fine = AmalgamNormSpec(p, q, hop=2 * DEFAULT_AXIS.dx)
            refine = max(refine, abs(amalgam_norm(f, fine) / base - 1))
    ok = moyal <= TOL_MOYAL and calib <= TOL_L2_CALIBRATION and refine < TOL_REFINEMENT
    return CheckResult("6 amalgam engine", ok, moyal, TOL_MOYAL,
                       f"calibration={calib:.3e} refinement={refine:.3e}")


def estimate_matrices(seed: int = 0) -> dict:
    (_, R), = free_suite(1, DEFAULT_AXIS, seed=seed, factors=True)
    return {
        "J": SymplecticMatrix.J(1),
        "rotation(pi/4)": SymplecticMatrix.rotation(np.pi / 4),
        "shear(1)": SymplecticMatrix.shear(1.0),
        "random": R,
    }


EXPONENT_PAIRS = ((1, math.inf), (2, 2), (math.inf, 1), (1, 2))


@_timed
def check_estimates(seed: int = 0) -> CheckResult:
    t0 = time.perf_counter()
    family = default_family(DEFAULT_AXIS)
    finite = True
    self_dual = 0.0
    bound_ok = True
    worst_bound = 0.0
    for S in estimate_matrices(seed).values():
        for p, q in EXPONENT_PAIRS:
            for rep in (cross_estimate_experiment(S, p, q, family),
                        same_space_estimate_experiment(S, p, q, family)):
                finite &= all(np.isfinite(r) and r > 0 for r in rep.ratios)
                if (p, q) == (2, 2):
                    self_dual = max(self_dual, max(abs(r - 1) for r in rep.ratios))
                if rep.factor_bound is not None:
                    bound_ok &= bool(rep.bound_satisfied)
                    worst_bound = max(worst_bound, rep.max_ratio / rep.factor_bound)
    elapsed = time.perf_counter() - t0
    ok = finite and self_dual <= TOL_SELF_DUAL and bound_ok and elapsed < 120.0
    return CheckResult("7 boundedness experiments", ok, self_dual, TOL_SELF_DUAL,
                       f"finite={finite} max C/bound={worst_bound:.4f}<={1 + BOUND_SLACK} time={elapsed:.1f}s<120s")


@_timed
def check_regularity() -> CheckResult:
    times = np.arange(9) * np.pi / 4
    worst = 0.0
    finite = True
    for f0 in (hermite_state(0, DEFAULT_AXIS), gaussian(DEFAULT_AXIS, 2.0, center=1.5)):
        for p, q in ((2, 2), (1, math.inf)):
            series = regularity_experiment(OSCILLATOR, f0, p, q, times)
            vals = np.array([v for _, v in series])
            finite &= bool(np.all(np.isfinite(vals)))
            worst = max(worst, abs(vals[-1] / vals[0] - 1))
    ok = finite and worst <= TOL_PERIODIC
    return CheckResult("8 regularity along the flow", ok, worst, TOL_PERIODIC, f"finite={finite}")


ALL_CHECKS = (
    check_symplectic_suite,
    check_free_operator,
    check_double_cover,
    check_oscillator,
    check_caustic,
    check_amalgam_engine,
    check_estimates,
    check_regularity,
)


def run_all(seed: int = 0) -> list[CheckResult]:
    out = []
    for check in ALL_CHECKS:
        try:
            out.append(check(seed=seed) if "seed" in inspect.signature(check).parameters else check())
        except Exception as exc:  # reported as a failed row
            out.append(CheckResult(check.__name__, False, float("nan"), float("nan"),
                                   f"{type(exc).__name__}: {exc}"))
    return out
