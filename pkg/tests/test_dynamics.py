import math

import numpy as np
import pytest
from scipy.optimize import bisect

from app.core.config import Settings
from app.core.errors import InvalidInputError
from app.schemas.dynamics import EmissionTrace, InitialState
from app.schemas.interaction import (
    AllToAll,
    ChiralInfiniteRange,
    Exponential,
    NearestNeighbor,
    NearestNeighborNonuniform,
    NextNearestRing,
    PowerLaw,
)
from app.schemas.lattice import chain, hypercube
from app.services import correlation_service, dicke_service, dynamics_service, spectral_service
from app.services.decoherence_service import build_coherent_coupling, build_decoherence
from app.services.dynamics_service import GridResolutionError
from app.services.spectral_service import UnphysicalMatrixError


def _gamma(model, lattice):
    return build_decoherence(model, lattice)


# ---------------------------------------------------------------------------
# Ṙ(0)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "model, lattice",
    [
        (AllToAll(gamma=1.0), chain(4)),
        (NearestNeighbor(gamma=0.4), chain(5)),
        (Exponential(gamma=0.5), chain(5, periodic=True)),
        (NextNearestRing(g1=0.68, g2=0.25), chain(5, periodic=True)),
        (ChiralInfiniteRange(kd=math.pi / 3, chi=0.7), chain(3)),
    ],
)
def test_generator_rdot0_matches_traces(model, lattice):
    gamma = _gamma(model, lattice)
    if not spectral_service.analyze(gamma).is_physical:
        pytest.skip("Γ no física para este N")
    expected = correlation_service.rdot0(spectral_service.analyze(gamma))
    assert dynamics_service.exact_rdot0(gamma) == pytest.approx(expected, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("theta", [0.5, 1.2, 2.5])
def test_generator_rdot0_for_product_states(theta):
    gamma = _gamma(Exponential(gamma=0.6), chain(5))
    state = InitialState(kind="product", theta=theta, phi=0.3)
    expected = correlation_service.product_state_rdot0(gamma, theta, 0.3)
    assert dynamics_service.exact_rdot0(gamma, None, state) == pytest.approx(expected, rel=1e-9)


def test_all_to_all_hamiltonian_does_not_change_rdot0():
    gamma = _gamma(Exponential(gamma=0.5), chain(5))
    coupling = build_coherent_coupling("all_to_all", 5, strength=0.5)
    plain = dynamics_service.exact_rdot0(gamma)
    assert dynamics_service.exact_rdot0(gamma, coupling) == pytest.approx(plain, rel=1e-12)


def test_finite_difference_rdot0_matches_traces():
    gamma = _gamma(Exponential(gamma=0.7), chain(5))
    trace = dynamics_service.lindblad_evolve(gamma, t_grid=dynamics_service.default_time_grid(0.5, 50))
    expected = correlation_service.rdot0(spectral_service.analyze(gamma))
    assert dynamics_service.finite_difference_rdot0(trace) == pytest.approx(expected, rel=1e-3)


def _draw_nn(rng):
    return NearestNeighbor(gamma=rng.uniform(0.0, 0.5)), chain(int(rng.integers(3, 9)))


def _draw_nn_nonuniform(rng):
    n = int(rng.integers(3, 9))
    return NearestNeighborNonuniform(gammas=rng.uniform(0.0, 0.5, n - 1)), chain(n)


def _draw_nnn(rng):
    n = int(rng.choice([5, 7]))
    return NextNearestRing(g1=rng.uniform(0.0, 0.6), g2=rng.uniform(0.0, 0.4)), chain(n, periodic=True)


def _draw_exp(rng):
    return Exponential(gamma=rng.uniform(0.0, 0.95)), chain(int(rng.integers(3, 9)))


def _draw_power(rng):
    return PowerLaw(gamma=rng.uniform(0.05, 0.6)), chain(int(rng.integers(3, 9)))


def _draw_chiral(rng):
    model = ChiralInfiniteRange(kd=rng.uniform(0.1, 3.0), chi=rng.uniform(-1.0, 1.0))
    return model, chain(int(rng.integers(3, 8)))


def _draw_dicke(rng):
    return AllToAll(gamma=rng.uniform(0.0, 1.0)), chain(int(rng.integers(3, 9)))


@pytest.mark.parametrize(
    "draw",
    [_draw_nn, _draw_nn_nonuniform, _draw_nnn, _draw_exp, _draw_power, _draw_chiral, _draw_dicke],
)
def test_finite_difference_rdot0_over_random_draws(draw):
    rng = np.random.default_rng(2024)
    grid = dynamics_service.default_time_grid(0.01, 2)
    accepted = 0
    while accepted < 7:
        model, lattice = draw(rng)
        gamma = _gamma(model, lattice)
        summary = spectral_service.analyze(gamma)
        if not summary.is_physical:
            continue
        accepted += 1
        n = lattice.n_sites
        trace = dynamics_service.lindblad_evolve(gamma, t_grid=grid)
        expected = n**2 * (correlation_service.g2_zero(summary) - 1.0)
        assert dynamics_service.finite_difference_rdot0(trace) == pytest.approx(
            expected, rel=1e-4, abs=1e-6 * n**2
        )


# ---------------------------------------------------------------------------
# Evolución exacta
# ---------------------------------------------------------------------------

def test_trace_and_diagnostics():
    gamma = _gamma(Exponential(gamma=0.5), chain(4))
    trace = dynamics_service.lindblad_evolve(gamma, t_grid=dynamics_service.default_time_grid(3.0, 60))
    assert trace.initial_rate == pytest.approx(4.0)
    assert trace.diagnostics["solver"] == "exact"
    assert trace.diagnostics["max_trace_error"] < 1e-7
    assert trace.diagnostics["min_population"] > -1e-9
    assert trace.rates[-1] < trace.rates[0]


def test_single_site_decays_exponentially():
    gamma = _gamma(AllToAll(gamma=0.0), chain(1))
    grid = np.linspace(0.0, 2.0, 21)
    trace = dynamics_service.lindblad_evolve(gamma, t_grid=grid)
    assert np.allclose(trace.rates, np.exp(-grid), rtol=1e-8)


def test_independent_emitters_decay():
    gamma = _gamma(AllToAll(gamma=0.0), chain(3))
    grid = np.linspace(0.0, 1.5, 16)
    trace = dynamics_service.lindblad_evolve(gamma, t_grid=grid)
    assert np.allclose(trace.rates, 3.0 * np.exp(-grid), rtol=1e-8)


def test_nn_chain_below_threshold_never_bursts():
    gamma = _gamma(NearestNeighbor(gamma=0.25), chain(6))
    trace = dynamics_service.lindblad_evolve(gamma, t_grid=dynamics_service.default_time_grid(4.0, 80))
    assert trace.rates.max() <= 6.0 + 1e-6
    assert not dynamics_service.detect_burst(trace).has_burst


def test_dicke_n4_bursts():
    gamma = _gamma(AllToAll(gamma=1.0), chain(4))
    trace = dynamics_service.lindblad_evolve(gamma, t_grid=dynamics_service.default_time_grid(1.0, 200))
    report = dynamics_service.detect_burst(trace)
    assert report.has_burst
    assert not report.is_delayed
    assert report.fractional_increase == pytest.approx(0.21, abs=0.02)
    assert report.peak_time == pytest.approx(0.21, abs=0.05)


@pytest.mark.parametrize("chi, burst", [(0.7, True), (0.4, False)])
def test_chiral_three_sites(chi, burst):
    gamma = _gamma(ChiralInfiniteRange(kd=math.pi / 3, chi=chi), chain(3))
    trace = dynamics_service.lindblad_evolve(gamma, t_grid=dynamics_service.default_time_grid(1.0, 200))
    assert dynamics_service.detect_burst(trace).has_burst is burst


def test_chiral_burst_boundary_at_three_sites():
    grid = dynamics_service.default_time_grid(1.0, 200)

    def bursts(chi: float) -> float:
        gamma = _gamma(ChiralInfiniteRange(kd=math.pi / 3, chi=chi), chain(3))
        report = dynamics_service.detect_burst(dynamics_service.lindblad_evolve(gamma, t_grid=grid))
        return 1.0 if report.has_burst else -1.0

    boundary = bisect(bursts, 0.4, 0.7, xtol=1e-3)
    assert boundary == pytest.approx(1 / math.sqrt(3), abs=1e-2)
    # sólo importa |χ|
    assert bursts(-0.7) == 1.0
    assert bursts(-0.4) == -1.0


def test_all_to_all_hamiltonian_leaves_trace_unchanged():
    gamma = _gamma(AllToAll(gamma=0.6), chain(4))
    coupling = build_coherent_coupling("all_to_all", 4, strength=0.5)
    grid = dynamics_service.default_time_grid(1.0, 30)
    plain = dynamics_service.lindblad_evolve(gamma, t_grid=grid)
    driven = dynamics_service.lindblad_evolve(gamma, coupling, t_grid=grid)
    assert np.allclose(plain.rates, driven.rates, rtol=1e-7, atol=1e-9)


def test_unphysical_gamma_rejected():
    gamma = _gamma(NearestNeighbor(gamma=0.9), chain(4))
    with pytest.raises(UnphysicalMatrixError):
        dynamics_service.lindblad_evolve(gamma)


def test_size_limit():
    gamma = _gamma(AllToAll(gamma=0.1), chain(4))
    with pytest.raises(InvalidInputError):
        dynamics_service.lindblad_evolve(gamma, settings=Settings(max_exact_sites=3))
    with pytest.raises(InvalidInputError):
        dynamics_service.exact_rdot0(gamma, settings=Settings(max_exact_sites=3))


@pytest.mark.parametrize("grid", [[0.1, 0.2], [0.0, 0.2, 0.1]])
def test_invalid_grids(grid):
    with pytest.raises(InvalidInputError):
        dynamics_service.lindblad_evolve(_gamma(AllToAll(gamma=0.1), chain(2)), t_grid=grid)


# ---------------------------------------------------------------------------
# Operadores de salto
# ---------------------------------------------------------------------------

def test_jump_operators_reconstruct_gamma():
    gamma = _gamma(Exponential(gamma=0.5), hypercube(2, 2))
    summary = spectral_service.analyze(gamma, with_vectors=True)
    jumps = dynamics_service.jump_operators(summary, gamma)
    assert len(jumps) == 4
    rebuilt = sum(j.rate * np.outer(j.vector, j.vector.conj()) for j in jumps)
    assert np.allclose(rebuilt, gamma.entries)


def test_jump_operators_need_vectors():
    gamma = _gamma(Exponential(gamma=0.5), chain(3))
    with pytest.raises(InvalidInputError):
        dynamics_service.jump_operators(spectral_service.analyze(gamma))


# ---------------------------------------------------------------------------
# Detección de bursts
# ---------------------------------------------------------------------------

def test_coarse_grid_rejected():
    times = np.linspace(0.0, 1.0, 11)
    trace = EmissionTrace(times=times, rates=np.exp(-times), initial_rate=1.0)
    with pytest.raises(GridResolutionError):
        dynamics_service.detect_burst(trace)


def test_peak_refinement_on_parabola():
    times = np.concatenate([[0.0, 5e-4], np.arange(1, 101) * 5e-3])
    rates = 10.04 - (times - 0.2) ** 2
    trace = EmissionTrace(times=times, rates=rates, initial_rate=float(rates[0]))
    report = dynamics_service.detect_burst(trace)
    assert report.has_burst
    assert report.peak_time == pytest.approx(0.2, abs=1e-9)
    assert report.peak_rate == pytest.approx(10.04)
    assert report.initial_slope == pytest.approx(0.4, rel=1e-6)


# ---------------------------------------------------------------------------
# Solver invariante por permutaciones
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n, gamma", [(3, 0.5), (5, 0.8), (6, 0.3)])
def test_dicke_solver_matches_full_solver(n, gamma):
    grid = dynamics_service.default_time_grid(1.5, 40)
    full = dynamics_service.lindblad_evolve(_gamma(AllToAll(gamma=gamma), chain(n)), t_grid=grid)
    reduced = dicke_service.dicke_local_evolve(n, gamma, grid)
    assert np.allclose(reduced.rates, full.rates, rtol=1e-6, atol=1e-8)


def test_dicke_generator_conserves_probability():
    _, generator = dicke_service.dicke_generator(7, 0.4)
    assert np.allclose(np.asarray(generator.sum(axis=0)).ravel(), 0.0)


def test_dicke_space_size():
    # Σ_j (2j+1) sobre j = N/2, N/2-1, ...
    assert dicke_service.dicke_space(4).size == 5 + 3 + 1
    assert dicke_service.dicke_space(5).size == 6 + 4 + 2


def test_delayed_burst_at_n20():
    gamma = (1.0 - 1e-4) / math.sqrt(19.0)
    trace = dicke_service.dicke_local_evolve(20, gamma, dynamics_service.default_time_grid(0.5, 200))
    report = dynamics_service.detect_burst(trace)
    assert report.has_burst
    assert report.is_delayed
    assert 3e-7 <= report.fractional_increase <= 3e-6


@pytest.mark.parametrize("n", [6, 10])
def test_no_delayed_burst_for_small_n(n):
    gamma = (1.0 - 1e-4) / math.sqrt(n - 1)
    trace = dicke_service.dicke_local_evolve(n, gamma, dynamics_service.default_time_grid(0.5, 200))
    assert not dynamics_service.detect_burst(trace).has_burst


def test_dicke_solver_range():
    with pytest.raises(InvalidInputError):
        dicke_service.dicke_local_evolve(1, 0.5)
    with pytest.raises(InvalidInputError):
        dicke_service.dicke_local_evolve(4, 1.5)
