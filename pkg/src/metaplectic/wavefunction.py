"""Sampled wavefunctions on uniform grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

MIN_POINTS = 8


@dataclass(frozen=True)
class Axis:
    """Uniform 1-D grid ``x_j = x0 + j*dx``, ``j = 0..N-1``."""

    x0: float
    dx: float
    N: int

    def __post_init__(self):
        if self.N < MIN_POINTS:
            raise InvalidInputError(f"need at least {MIN_POINTS} points per axis, got {self.N}")
        if not self.dx > 0:
            raise InvalidInputError(f"grid step must be positive, got {self.dx}")

    @classmethod
    def symmetric(cls, x_max: float, N: int) -> "Axis":
        """``N`` points on ``[-x_max, x_max)``; contains 0 when ``N`` is even."""
        return cls(x0=-float(x_max), dx=2.0 * x_max / N, N=int(N))

    @property
    def points(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.N)

    @property
    def x_max(self) -> float:
        """Largest ``|x|`` on the grid."""
        return max(abs(self.x0), abs(self.x0 + (self.N - 1) * self.dx))

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.N, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w


@dataclass(frozen=True)
class SampledWavefunction:
    """Complex samples on a tensor grid; ``values.shape == (N_1, ..., N_n)``."""

    axes: tuple
    values: np.ndarray
    hbar: float = 1.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 2:
            raise InvalidInputError(f"only n = 1 or 2 supported, got n = {len(axes)}")
        values = np.asarray(self.values, dtype=complex)
        shape = tuple(ax.N for ax in axes)
        if values.shape != shape:
            if values.size == int(np.prod(shape)):
                values = values.reshape(shape)
            else:
                raise InvalidInputError(f"values shape {values.shape} does not match grid {shape}")
        if not self.hbar > 0:
            raise InvalidInputError(f"hbar must be positive, got {self.hbar}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("wavefunction has non-finite samples")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, axes, func, hbar: float = 1.0, label: str = "") -> "SampledWavefunction":
        if isinstance(axes, Axis):
            axes = (axes,)
        grids = np.meshgrid(*[ax.points for ax in axes], indexing="ij")
        return cls(tuple(axes), func(*grids), hbar, label)

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def cell(self) -> float:
        return float(np.prod([ax.dx for ax in self.axes]))

    def points(self) -> np.ndarray:
        """Grid points as an array of shape ``(N_1*...*N_n, n)``."""
        grids = np.meshgrid(*[ax.points for ax in self.axes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell))

    def inner(self, other: "SampledWavefunction") -> complex:
        """``<self, other>``, antilinear in ``self``."""
        return complex(np.sum(np.conj(self.values) * other.values) * self.cell)

    def same_grid(self, other: "SampledWavefunction") -> bool:
        return self.axes == other.axes and self.hbar == other.hbar

    def with_values(self, values, label: str | None = None) -> "SampledWavefunction":
        return SampledWavefunction(self.axes, values, self.hbar,
                                   self.label if label is None else label)

    def __add__(self, other):
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def reflected(self) -> "SampledWavefunction":
        """``psi(-x)``, assuming the grid is symmetric about 0 up to one endpoint."""
        for ax in self.axes:
            if abs(ax.x0 + ax.dx * (ax.N // 2)) > 1e-12 * ax.dx * ax.N:
                raise InvalidInputError("reflection needs a grid centred on 0")
        # index j <-> N - j (mod N); the lone endpoint x0 maps to itself
        idx = [(-np.arange(ax.N)) % ax.N for ax in self.axes]
        return self.with_values(self.values[np.ix_(*idx)])


def gaussian(axis: Axis, a: complex = 1.0, hbar: float = 1.0, normalize: bool = True,
             center: float = 0.0) -> SampledWavefunction:
    """``exp(-a (x - center)^2 / (2 hbar))``, optionally L2-normalized analytically."""
    x = axis.points - center
    vals = np.exp(-a * x**2 / (2 * hbar))
    if normalize:
        vals = vals * (np.real(a) / (np.pi * hbar)) ** 0.25
    return SampledWavefunction((axis,), vals, hbar, label=f"gaussian(a={a})")
