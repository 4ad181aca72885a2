"""Discrete Wiener amalgam norms ``W(FL^p, L^q)`` and boundedness experiments.

The norm is realised as an STFT mixed norm: for each window shift ``x`` take
the ``l^p`` norm over frequency of ``V_g psi(x, .)`` (local ``FL^p``), then the
``l^q`` norm of those over the shift lattice. The window is a unit-L2
Gaussian. All constants reported here are relative to that window and lattice,
and the experiment maxima are lower bounds on the true operator norms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidExponentError, InvalidInputError, NotFreeError
from .operators import FreeMetaplecticOp, apply, apply_free
from .schrodinger import PropagationJob, hermite_state, propagate_metaplectic
from .symplectic import TOL_FREE, QuadraticHamiltonian, SymplecticMatrix, factor_free, is_free
from .wavefunction import Axis, SampledWavefunction, gaussian

DEFAULT_WINDOW_WIDTH = 0.5
# window tail allowed to wrap around the folded frequency period
_FOLD_TAIL = 1e-7
# relative slack allowed over the factor-product bound
BOUND_SLACK = 0.05

EMPIRICAL_NOTE = (
    "empirical maxima over a finite family; lower bounds on the operator norm, "
    "relative to the chosen window and lattice"
)


def _exponent(v) -> float:
    if isinstance(v, str):
        v = math.inf if v.lower() in ("inf", "infinity", "oo") else float(v)
    v = float(v)
    if not (v >= 1.0):
        raise InvalidExponentError(f"exponent must lie in [1, inf], got {v}")
    return v


@dataclass(frozen=True)
class AmalgamNormSpec:
    """Exponents plus STFT lattice. ``hop=None`` means ``4 dx``; ``freq_count=None`` means ``N/4``."""

    p: float = 2.0
    q: float = 2.0
    window_width: float = DEFAULT_WINDOW_WIDTH
    hop: float | None = None
    freq_count: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", _exponent(self.p))
        object.__setattr__(self, "q", _exponent(self.q))
        if not self.window_width > 0:
            raise InvalidInputError("window width must be positive")

    def swapped(self) -> "AmalgamNormSpec":
        return AmalgamNormSpec(self.q, self.p, self.window_width, self.hop, self.freq_count)

    def with_exponents(self, p, q) -> "AmalgamNormSpec":
        return AmalgamNormSpec(p, q, self.window_width, self.hop, self.freq_count)

    def lattice(self, axis: Axis) -> tuple[int, int]:
        """``(shift stride in grid points, frequency bins)`` for ``axis``."""
        hop = 4 * axis.dx if self.hop is None else self.hop
        stride = int(round(hop / axis.dx))
        if stride < 1 or abs(stride * axis.dx - hop) > 1e-9 * hop:
            raise InvalidInputError(f"hop {hop} is not a multiple of the grid step {axis.dx}")
        if hop > self.window_width:
            raise InvalidInputError(f"hop {hop} exceeds the window width {self.window_width}")
        F = axis.N // 4 if self.freq_count is None else int(self.freq_count)
        if F < 1 or axis.N % F:
            raise InvalidInputError(f"freq_count {F} must divide N = {axis.N}")
        half = 0.5 * F * axis.dx
        if np.exp(-0.5 * (half / self.window_width) ** 2) > _FOLD_TAIL:
            raise InvalidInputError(
                f"frequency lattice too coarse: window of width {self.window_width} does not "
                f"fit in the folding period {2 * half:.3g}; raise freq_count"
            )
        return stride, F

    def to_dict(self) -> dict:
        enc = lambda v: "inf" if math.isinf(v) else v  # noqa: E731
        return {"p": enc(self.p), "q": enc(self.q), "window": {"type": "gaussian",
                "width": self.window_width}, "hop": self.hop, "freq_count": self.freq_count}


def window(axis: Axis, width: float) -> np.ndarray:
    """Unit-L2 Gaussian ``(pi w^2)^(-1/4) exp(-x^2 / (2 w^2))`` sampled at offsets from ``x0``."""
    return (np.pi * width**2) ** -0.25 * np.exp(-0.5 * (axis.points / width) ** 2)


@dataclass
class STFT:
    """Samples of ``V_g psi`` on a (shift, frequency) lattice; rows are shifts."""

    values: np.ndarray
    shifts: np.ndarray
    freqs: np.ndarray
    dshift: float
    dfreq: float


def _shift_indices(axis: Axis, stride: int) -> np.ndarray:
    # lattice hop*Z intersected with the grid: anchor on the point nearest 0
    j0 = int(round(-axis.x0 / axis.dx)) % stride
    return np.arange(j0, axis.N, stride)


def stft(psi: SampledWavefunction, spec: AmalgamNormSpec) -> STFT:
    """``V_g psi(x, w) = int psi(x') g(x' - x) exp(-i w x'/hbar) dx'``.

    Frequencies are ``F`` bins spanning ``[-pi hbar/dx, pi hbar/dx)``; the
    windowed signal is folded to period ``F dx`` before an ``F``-point FFT,
    which samples its Fourier transform exactly.
    """
    if psi.n != 1:
        raise InvalidInputError("STFT / amalgam norms are one-dimensional")
    (ax,) = psi.axes
    hbar = psi.hbar
    stride, F = spec.lattice(ax)
    x = ax.points
    rows = _shift_indices(ax, stride)
    shifts = x[rows]
    w = spec.window_width
    g = (np.pi * w**2) ** -0.25 * np.exp(-0.5 * ((x[None, :] - shifts[:, None]) / w) ** 2)
    seg = g * psi.values[None, :]
    folded = seg.reshape(len(rows), ax.N // F, F).sum(axis=1)
    k = np.fft.fftfreq(F) * F
    dfreq = 2 * np.pi * hbar / (F * ax.dx)
    freqs = k * dfreq
    V = ax.dx * np.fft.fft(folded, axis=1) * np.exp(-1j * freqs * ax.x0 / hbar)[None, :]
    order = np.argsort(freqs)
    return STFT(V[:, order], shifts, freqs[order], stride * ax.dx, dfreq)


def window_norm(axis: Axis, width: float) -> float:
    return float(np.sqrt(np.sum(window(axis, width) ** 2) * axis.dx))


def mixed_norm(V: np.ndarray, p: float, q: float, dfreq: float = 1.0, dshift: float = 1.0) -> float:
    """``( sum_x ( sum_w |V|^p dfreq )^(q/p) dshift )^(1/q)`` with max for infinite exponents."""
    p, q = _exponent(p), _exponent(q)
    A = np.abs(V)
    if math.isinf(p):
        inner = A.max(axis=1)
    else:
        inner = (np.sum(A**p, axis=1) * dfreq) ** (1.0 / p)
    if math.isinf(q):
        return float(inner.max())
    return float((np.sum(inner**q) * dshift) ** (1.0 / q))


def amalgam_norm(psi: SampledWavefunction, spec: AmalgamNormSpec) -> float:
    """Discrete ``W(FL^p, L^q)`` norm; equals ``sqrt(2 pi hbar) ||psi||_2`` at ``p = q = 2``."""
    S = stft(psi, spec)
    return mixed_norm(S.values, spec.p, spec.q, S.dfreq, S.dshift)


def l2_calibration(hbar: float = 1.0) -> float:
    """Frozen ratio ``||psi||_{W(FL^2, L^2)} / ||psi||_2``."""
    return math.sqrt(2 * math.pi * hbar)


def moyal_sum(psi: SampledWavefunction, spec: AmalgamNormSpec) -> float:
    """``sum |V_g psi|^2 dx dw / (2 pi hbar)``; approximates ``||psi||_2^2``."""
    S = stft(psi, spec)
    return float(np.sum(np.abs(S.values) ** 2) * S.dshift * S.dfreq / (2 * np.pi * psi.hbar))


@dataclass
class NormEstimateReport:
    matrix: SymplecticMatrix
    kind: str  # "cross" or "same_space"
    input_space: tuple
    output_space: tuple
    spec: AmalgamNormSpec
    labels: list
    ratios: list
    factor_bound: float | None = None
    factor_ratios: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)
    note: str = EMPIRICAL_NOTE

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else float("nan")

    @property
    def bound_satisfied(self) -> bool | None:
        if self.factor_bound is None:
            return None
        return self.max_ratio <= (1 + BOUND_SLACK) * self.factor_bound

    def to_dict(self) -> dict:
        enc = lambda v: "inf" if math.isinf(v) else v  # noqa: E731
        return {
            "matrix": {"n": self.matrix.n, "rows": self.matrix.entries.tolist()},
            "kind": self.kind,
            "p": enc(self.output_space[0]),
            "q": enc(self.output_space[1]),
            "input_space": [enc(v) for v in self.input_space],
            "output_space": [enc(v) for v in self.output_space],
            "window": {"type": "gaussian", "width": self.spec.window_width},
            "family": list(self.labels),
            "ratios": list(self.ratios),
            "max_ratio": self.max_ratio if self.ratios else None,
            "factor_bound": self.factor_bound,
            "factor_ratios": self.factor_ratios,
            "bound_satisfied": self.bound_satisfied,
            "skipped": list(self.skipped),
            "note": self.note,
        }


def default_family(axis: Axis, hbar: float = 1.0) -> list[SampledWavefunction]:
    """Hermite functions k <= 5, Gaussians ``exp(-a x^2/2hbar)`` for ``a = 2^-2..2^2``,
    and one chirped Gaussian ``a = 1 - i``. All unit L2 norm."""
    fam = [hermite_state(k, axis, hbar) for k in range(6)]
    fam += [gaussian(axis, 2.0**e, hbar) for e in range(-2, 3)]
    fam.append(gaussian(axis, 1.0 - 1.0j, hbar))
    return fam


def _nonzero(family, spec):
    kept, skipped = [], []
    for i, f in enumerate(family):
        if amalgam_norm(f, spec) == 0.0:
            warnings.warn(f"family member {i} ({f.label or 'unnamed'}) has zero norm; skipped")
            skipped.append(f.label or str(i))
        else:
            kept.append(f)
    return kept, skipped


def cross_estimate_experiment(S: SymplecticMatrix, p, q, family, spec: AmalgamNormSpec | None = None,
                              method: str | None = None, tol_free: float = TOL_FREE) -> NormEstimateReport:
    """Ratios ``||mu(S) f||_{W(FL^p,L^q)} / ||f||_{W(FL^q,L^p)}`` (note the swapped exponents)."""
    if not is_free(S, tol_free):
        raise NotFreeError(f"cross estimate needs a free matrix (det B = {S.det_B():.3e})")
    out_spec = (spec or AmalgamNormSpec()).with_exponents(p, q)
    in_spec = out_spec.swapped()
    family, skipped = _nonzero(family, in_spec)
    ratios, labels = [], []
    for f in family:
        op = FreeMetaplecticOp.from_matrix(S, None, f.hbar, tol_free)
        g = apply_free(op, f, method or "fast")
        ratios.append(amalgam_norm(g, out_spec) / amalgam_norm(f, in_spec))
        labels.append(f.label)
    return NormEstimateReport(S, "cross", (in_spec.p, in_spec.q), (out_spec.p, out_spec.q),
                              out_spec, labels, ratios, skipped=skipped)


def same_space_estimate_experiment(S: SymplecticMatrix, p, q, family,
                                   spec: AmalgamNormSpec | None = None, method: str | None = None,
                                   tol_free: float = TOL_FREE) -> NormEstimateReport:
    """Ratios ``||mu(S) f|| / ||f||`` in the same space ``W(FL^p, L^q)``.

    Also measures the two free factors ``S = S1 S2`` on the recorded
    intermediates ``mu(S2) f``: ``factor_bound = max_f r1 * max_f r2`` with
    ``r2 = ||mu(S2) f||_{(q,p)} / ||f||_{(p,q)}`` and
    ``r1 = ||mu(S1) mu(S2) f||_{(p,q)} / ||mu(S2) f||_{(q,p)}``.
    """
    pq = (spec or AmalgamNormSpec()).with_exponents(p, q)
    qp = pq.swapped()
    family, skipped = _nonzero(family, pq)
    S1, S2 = factor_free(S, tol_free)
    ratios, labels, r1s, r2s = [], [], [], []
    for f in family:
        h = f.hbar
        out = apply(S, 0, f, method=method, tol_free=tol_free)
        nf = amalgam_norm(f, pq)
        ratios.append(amalgam_norm(out, pq) / nf)
        labels.append(f.label)
        mid = apply_free(FreeMetaplecticOp.from_matrix(S2, None, h, tol_free), f, method or "fast")
        fin = apply_free(FreeMetaplecticOp.from_matrix(S1, None, h, tol_free), mid, method or "fast")
        nmid = amalgam_norm(mid, qp)
        r2s.append(nmid / nf)
        r1s.append(amalgam_norm(fin, pq) / nmid)
    bound = max(r1s) * max(r2s) if family else None
    return NormEstimateReport(
        S, "same_space", (pq.p, pq.q), (pq.p, pq.q), pq, labels, ratios,
        factor_bound=bound, factor_ratios={"outer": r1s, "inner": r2s}, skipped=skipped,
    )


def regularity_experiment(H: QuadraticHamiltonian, f0: SampledWavefunction, p, q, times,
                          spec: AmalgamNormSpec | None = None, method: str | None = None) -> list:
    """``[(t, ||f(t)||_{W(FL^p, L^q)})]`` along the exact metaplectic solution."""
    spec = (spec or AmalgamNormSpec()).with_exponents(p, q)
    result = propagate_metaplectic(PropagationJob(H, f0, tuple(times)), method=method)
    return [(t, amalgam_norm(f, spec)) for t, f in result.snapshots]
