"""Seeded input suites for property checks."""

from __future__ import annotations

import numpy as np

from .operators import FreeMetaplecticOp, aliasing_margin
from .symplectic import TOL_FREE, SymplecticMatrix, factor_free, is_free, random_symplectic
from .wavefunction import Axis, SampledWavefunction


def well_posed(S: SymplecticMatrix, axis: Axis, hbar: float = 1.0, max_stretch: float = 1.5,
               tol_free: float = TOL_FREE) -> bool:
    """Free, not too hyperbolic, and resolvable on ``axis``.

    ``max_stretch`` bounds the largest singular value, so a unit Gaussian
    stays within ``max_stretch`` widths after the transform.
    """
    if not is_free(S, tol_free):
        return False
    if np.linalg.norm(S.entries, 2) > max_stretch:
        return False
    probe = SampledWavefunction((axis,), np.zeros(axis.N), hbar)
    return aliasing_margin(FreeMetaplecticOp.from_matrix(S, None, hbar, tol_free), probe) >= 0


def _well_posed_seeds(axis, hbar, seed, max_stretch, factors, limit):
    for s in range(seed, seed + limit):
        S = random_symplectic(1, s)
        ok = well_posed(S, axis, hbar, max_stretch)
        if ok and factors:
            ok = all(well_posed(F, axis, hbar, 2 * max_stretch) for F in factor_free(S))
        if ok:
            yield s, S


def free_suite(count: int, axis: Axis, hbar: float = 1.0, seed: int = 0,
               max_stretch: float = 1.5, factors: bool = False) -> list:
    """First ``count`` seeds ``>= seed`` whose ``random_symplectic(1, s)`` is well posed.

    With ``factors=True`` both free factors must be well posed too.
    """
    out = []
    for item in _well_posed_seeds(axis, hbar, seed, max_stretch, factors, 100 * count + 1000):
        out.append(item)
        if len(out) == count:
            return out
    raise RuntimeError("could not find enough well-posed matrices")


def free_triple_suite(count: int, axis: Axis, hbar: float = 1.0, seed: int = 0,
                      max_stretch: float = 1.5) -> list:
    """Pairs ``(S1, S2)`` of consecutive well-posed seeds with ``S1 S2`` well posed as well."""
    out = []
    seeds = _well_posed_seeds(axis, hbar, seed, max_stretch, False, 400 * count + 4000)
    for (s1, S1), (s2, S2) in zip(seeds, seeds):
        if well_posed(S1 @ S2, axis, hbar, max_stretch):
            out.append(((s1, s2), S1, S2))
            if len(out) == count:
                return out
    raise RuntimeError("could not find enough well-posed triples")
