import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from metaplectic.errors import (
    AliasingRiskError,
    DivergentGaussianError,
    InvalidInputError,
    MaslovParityError,
    NotFreeError,
)
from metaplectic.operators import (
    FreeMetaplecticOp,
    apply,
    apply_free,
    compose_and_compare,
    gaussian_oracle,
    maslov_phase,
)
from metaplectic.schrodinger import hermite_state
from metaplectic.suites import free_suite, free_triple_suite
from metaplectic.symplectic import (
    QuadraticHamiltonian,
    SymplecticMatrix,
    hamiltonian_flow,
    random_symplectic,
)
from metaplectic.wavefunction import Axis, SampledWavefunction, gaussian

J = SymplecticMatrix.J(1)


def brute_force_image(op, a, x, hbar=1.0):
    """Adaptive quadrature of the defining integral at one point ``x``."""
    P, L, Q = (float(M[0, 0]) for M in (op.gen.P, op.gen.L, op.gen.Q))

    def integrand(xp):
        return np.exp(1j * (0.5 * P * x * x - L * x * xp + 0.5 * Q * xp * xp) / hbar
                      - a * xp * xp / (2 * hbar))

    re = quad(lambda s: integrand(s).real, -40, 40, limit=400, epsabs=1e-13)[0]
    im = quad(lambda s: integrand(s).imag, -40, 40, limit=400, epsabs=1e-13)[0]
    return op.prefactor() * (re + 1j * im)


def test_maslov_phase_examples():
    assert np.isclose(maslov_phase(0, 1), np.exp(-1j * np.pi / 4))
    assert np.isclose(maslov_phase(2, 1), np.exp(3j * np.pi / 4))
    assert np.isclose(maslov_phase(2, 1), -maslov_phase(0, 1))
    assert np.isclose(maslov_phase(1, 2), 1.0)


def test_fourier_fixes_the_gaussian(axis):
    psi = gaussian(axis, 1.0, normalize=False)
    out = apply_free(FreeMetaplecticOp.from_matrix(J, 0), psi)
    assert np.max(np.abs(out.values - np.exp(-0.25j * np.pi) * psi.values)) < 1e-10


def test_fourier_with_odd_maslov_index_is_rejected():
    # det B = 1 > 0 forces an even index
    with pytest.raises(MaslovParityError):
        FreeMetaplecticOp.from_matrix(J, 1)


def test_other_sheet_flips_sign(axis):
    psi = gaussian(axis, 1.0)
    a = apply_free(FreeMetaplecticOp.from_matrix(J, 0), psi)
    b = apply_free(FreeMetaplecticOp.from_matrix(J, 2), psi)
    assert np.allclose(a.values, -b.values, atol=1e-14)


@pytest.mark.parametrize("S", [J, SymplecticMatrix.rotation(0.7), SymplecticMatrix.shear(1.0),
                               SymplecticMatrix.rotation(4.0), random_symplectic(1, 2)])
@pytest.mark.parametrize("a", [1.0, 2.5, 0.7 - 0.4j])
def test_gaussian_oracle_against_quadrature(S, a):
    op = FreeMetaplecticOp.from_matrix(S)
    b, c = gaussian_oracle(op, a)
    for x in (0.0, 0.6, -1.7):
        assert abs(brute_force_image(op, a, x) - c * np.exp(-b * x * x / 2)) < 1e-9


def test_gaussian_oracle_examples():
    b, c = gaussian_oracle(FreeMetaplecticOp.from_matrix(J), 1.0)
    assert np.isclose(b, 1) and np.isclose(abs(c), 1)
    t = 0.9
    b, c = gaussian_oracle(FreeMetaplecticOp.from_matrix(SymplecticMatrix.rotation(t)), 1.0)
    assert np.isclose(b, 1) and np.isclose(c, np.exp(-0.5j * t))
    b, c = gaussian_oracle(FreeMetaplecticOp.from_matrix(SymplecticMatrix.shear(t)), 1.0)
    assert np.isclose(b, 1 / (1 + 1j * t))


def test_gaussian_oracle_rejects_divergent():
    with pytest.raises(DivergentGaussianError):
        gaussian_oracle(FreeMetaplecticOp.from_matrix(J), -0.1)


@pytest.mark.parametrize("hbar, x_max", [(1.0, 12.0), (0.1, 4.0)])
def test_apply_free_matches_oracle(hbar, x_max):
    axis = Axis.symmetric(x_max, 1024)
    psi = gaussian(axis, 1.0, hbar=hbar, normalize=False)
    for _, S in free_suite(10, axis, hbar):
        op = FreeMetaplecticOp.from_matrix(S, hbar=hbar)
        b, c = gaussian_oracle(op, 1.0)
        out = apply_free(op, psi)
        assert np.max(np.abs(out.values - c * np.exp(-b * axis.points**2 / (2 * hbar)))) < 1e-6


def test_free_propagation_broadens(axis):
    t = 1.0
    op = FreeMetaplecticOp.from_matrix(SymplecticMatrix.shear(t))
    out = apply_free(op, gaussian(axis, 1.0, normalize=False))
    c = (1 + 1j * t) ** -0.5
    assert np.max(np.abs(out.values - c * np.exp(-axis.points**2 / (2 * (1 + 1j * t))))) < 1e-10


def test_zero_maps_to_zero(axis):
    zero = SampledWavefunction((axis,), np.zeros(axis.N))
    out = apply_free(FreeMetaplecticOp.from_matrix(SymplecticMatrix.rotation(0.5)), zero)
    assert not np.any(out.values)


def test_fast_matches_direct(small_axis):
    psi = hermite_state(2, small_axis) + gaussian(small_axis, 0.5 + 0.5j, center=1.0)
    for _, S in free_suite(20, small_axis):
        op = FreeMetaplecticOp.from_matrix(S)
        gap = apply_free(op, psi, "direct") - apply_free(op, psi, "fast")
        assert gap.l2_norm() < 1e-8


def test_fast_matches_direct_off_centre_grid():
    ax = Axis(-7.3, 0.05, 300)
    psi = gaussian(ax, 1.0, center=-0.5)
    op = FreeMetaplecticOp.from_matrix(SymplecticMatrix.rotation(2.2))
    assert (apply_free(op, psi, "direct") - apply_free(op, psi, "fast")).l2_norm() < 1e-10


def test_unitarity_suite(axis):
    psi = gaussian(axis, 1.0)
    for _, S in free_suite(50, axis):
        out = apply_free(FreeMetaplecticOp.from_matrix(S), psi)
        assert abs(out.l2_norm() / psi.l2_norm() - 1) <= 1e-5


@settings(max_examples=25, deadline=None)
@given(alpha=st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       beta=st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       seed=st.integers(0, 50))
def test_linearity(alpha, beta, seed):
    ax = Axis.symmetric(10.0, 256)
    S = random_symplectic(1, seed)
    f = hermite_state(1, ax)
    g = gaussian(ax, 2.0, center=0.5)
    combo = alpha * f + beta * g
    lhs = apply(S, 0, combo, allow_aliasing=True)
    rhs = alpha * apply(S, 0, f, allow_aliasing=True) + beta * apply(S, 0, g, allow_aliasing=True)
    scale = max(1.0, np.max(np.abs(lhs.values)))
    assert np.max(np.abs(lhs.values - rhs.values)) <= 1e-12 * scale * 100


def test_aliasing_guard(axis):
    coarse = Axis.symmetric(12.0, 64)
    op = FreeMetaplecticOp.from_matrix(SymplecticMatrix.rotation(0.2))
    with pytest.raises(AliasingRiskError):
        apply_free(op, gaussian(coarse, 1.0))
    apply_free(op, gaussian(coarse, 1.0), allow_aliasing=True)


def test_hbar_mismatch(axis):
    op = FreeMetaplecticOp.from_matrix(J, hbar=0.5)
    with pytest.raises(InvalidInputError):
        apply_free(op, gaussian(axis, 1.0))


def test_fast_rejects_2d():
    ax = Axis.symmetric(4.0, 16)
    psi = SampledWavefunction((ax, ax), np.ones((16, 16)))
    with pytest.raises(InvalidInputError):
        apply_free(FreeMetaplecticOp.from_matrix(SymplecticMatrix.J(2)), psi, "fast",
                   allow_aliasing=True)


def test_apply_identity(axis):
    psi = gaussian(axis, 1.0)
    out = apply(SymplecticMatrix.identity(1), 0, psi)
    assert (out - psi).l2_norm() < 1e-6
    assert (apply(SymplecticMatrix.identity(1), 1, psi) + psi).l2_norm() < 1e-6


@pytest.mark.parametrize("k", [0, 1, 2])
def test_minus_identity_is_parity_times_lift_phase(axis, k):
    h = hermite_state(k, axis)
    out = apply(SymplecticMatrix(-np.eye(2)), 0, h)
    # mu(-I) = +-i^{-1} P for n = 1; P h_k = (-1)^k h_k
    expect = -1j * h.reflected().values
    err = min(np.max(np.abs(out.values - s * expect)) for s in (1, -1))
    assert err < 1e-10
    assert np.allclose(h.reflected().values, (-1) ** k * h.values, atol=1e-14)


def test_two_routes_to_quarter_turn(axis):
    psi = gaussian(axis, 2.0, center=1.0)
    via_apply = apply(SymplecticMatrix.rotation(np.pi / 2), 0, psi)
    direct = apply_free(FreeMetaplecticOp.from_matrix(J), psi)
    err = min((via_apply - s * direct).l2_norm() for s in (1, -1))
    assert err < 1e-6


def test_apply_non_free_via_factors(axis):
    psi = gaussian(axis, 1.0, center=0.7)
    S = SymplecticMatrix(np.diag([2.0, 0.5]))  # squeeze, B = 0
    out = apply(S, 0, psi)
    # squeeze acts as f(x) -> f(x/2)/sqrt(2) up to the lift sign
    expect = gaussian(axis, 0.25, normalize=False, center=1.4).values * (1 / np.pi) ** 0.25 / np.sqrt(2)
    assert min(np.max(np.abs(out.values - s * expect)) for s in (1, -1)) < 1e-9


def test_compose_examples(axis):
    psi = gaussian(axis, 1.0)
    R = SymplecticMatrix.rotation(np.pi / 4)
    c = compose_and_compare(R, R, psi)
    assert min(abs(c - 1), abs(c + 1)) < 1e-5
    c = compose_and_compare(J, R, psi)
    assert abs(abs(c) - 1) < 1e-6
    with pytest.raises(NotFreeError):
        compose_and_compare(SymplecticMatrix.rotation(0.5), SymplecticMatrix.rotation(-0.5), psi)


def test_compose_sign_minus(axis):
    R = SymplecticMatrix.rotation(3 * np.pi / 4)
    c = compose_and_compare(R, R, gaussian(axis, 1.0))
    assert abs(c + 1) < 1e-8


def test_double_cover_suite(axis):
    psi = hermite_state(1, axis) + gaussian(axis, 1.5, center=-1.0)
    for _, S1, S2 in free_triple_suite(20, axis):
        c = compose_and_compare(S1, S2, psi)
        assert abs(c.imag) < 1e-5
        assert min(abs(c - 1), abs(c + 1)) < 1e-5


class TestTwoDimensional:
    ax = Axis.symmetric(6.0, 64)

    def gaussian2(self, cx=0.0, cy=0.0, a=1.0, b=1.0):
        return SampledWavefunction.from_function(
            (self.ax, self.ax), lambda x, y: np.exp(-a * (x - cx) ** 2 / 2 - b * (y - cy) ** 2 / 2))

    def test_separable_matches_tensor_product(self):
        R1, R2 = SymplecticMatrix.rotation(0.8), SymplecticMatrix.shear(1.2)
        S = SymplecticMatrix.from_blocks(np.diag([R1.A[0, 0], R2.A[0, 0]]),
                                         np.diag([R1.B[0, 0], R2.B[0, 0]]),
                                         np.diag([R1.C[0, 0], R2.C[0, 0]]),
                                         np.diag([R1.D[0, 0], R2.D[0, 0]]))
        psi = self.gaussian2(0.5, -0.3, 1.0, 2.0)
        out = apply_free(FreeMetaplecticOp.from_matrix(S), psi, "direct")
        fx = apply_free(FreeMetaplecticOp.from_matrix(R1),
                        gaussian(self.ax, 1.0, center=0.5, normalize=False), "direct")
        fy = apply_free(FreeMetaplecticOp.from_matrix(R2),
                        gaussian(self.ax, 2.0, center=-0.3, normalize=False), "direct")
        assert np.max(np.abs(out.values - np.outer(fx.values, fy.values))) < 1e-10

    def test_coupled_composition_sign(self):
        rng = np.random.default_rng(1)
        R = rng.uniform(-0.2, 0.2, (4, 4))
        H = QuadraticHamiltonian(np.eye(4) + 0.5 * (R + R.T))
        S1, S2 = hamiltonian_flow(H, 0.9), hamiltonian_flow(H, 0.8)
        psi = self.gaussian2(0.4, 0.0)
        c = compose_and_compare(S1, S2, psi, "direct")
        assert min(abs(c - 1), abs(c + 1)) < 1e-6

    def test_unitary(self):
        S = SymplecticMatrix.rotation(0.9, 2)
        psi = self.gaussian2(0.3, -0.2)
        out = apply(S, 0, psi)
        assert abs(out.l2_norm() / psi.l2_norm() - 1) < 1e-6
