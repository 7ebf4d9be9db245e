import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import InvalidInputError
from app.schemas.dynamics import InitialState
from app.schemas.interaction import Exponential, NearestNeighbor
from app.schemas.lattice import chain
from app.schemas.meanfield import CumulantState
from app.services import correlation_service, dynamics_service, meanfield_service
from app.services.decoherence_service import ModelError, build_decoherence, from_entries


def _ring(model, n):
    return build_decoherence(model, chain(n, periodic=True))


def test_nn_ring_fully_excited_derivative():
    n = 9
    gamma = _ring(NearestNeighbor(gamma=0.5), n)
    value = meanfield_service.cumulant_rate_derivative(gamma, None, CumulantState(p=1.0))
    assert value == pytest.approx(-n / 2)


@pytest.mark.parametrize("theta", [0.6, 1.5, 2.4, math.pi])
def test_product_state_derivative_matches_closed_form(theta):
    gamma = _ring(Exponential(gamma=0.5), 7)
    p, s, q = meanfield_service.initial_cumulants(7, InitialState(kind="product", theta=theta))
    state = CumulantState(
        p=p,
        correlations={d: float(s[d].real) for d in range(1, 7)},
        populations={d: float(q[d]) for d in range(1, 7)},
    )
    value = meanfield_service.cumulant_rate_derivative(gamma, None, state)
    assert value == pytest.approx(correlation_service.product_state_rdot0(gamma, theta), abs=1e-12)


def test_independent_emitters_decay():
    grid = np.linspace(0.0, 2.0, 21)
    trace = meanfield_service.cumulant_evolve(from_entries(np.eye(5)), t_grid=grid)
    assert np.allclose(trace.rates, 5.0 * np.exp(-grid), rtol=1e-8)
    assert trace.diagnostics["solver"] == "meanfield"


def test_initial_rate_equals_exact():
    gamma = _ring(Exponential(gamma=0.4), 7)
    grid = dynamics_service.default_time_grid(0.2, 5)
    trace = meanfield_service.cumulant_evolve(gamma, t_grid=grid)
    assert trace.initial_rate == pytest.approx(7.0)
    # el cierre es exacto en t = 0 para estados producto
    fd = dynamics_service.finite_difference_rdot0(trace)
    assert fd == pytest.approx(dynamics_service.exact_rdot0(gamma), rel=1e-3)


def test_close_to_exact_on_small_ring():
    gamma = _ring(Exponential(gamma=0.3), 7)
    grid = dynamics_service.default_time_grid(1.0, 40)
    approx = meanfield_service.cumulant_evolve(gamma, t_grid=grid)
    exact = dynamics_service.lindblad_evolve(gamma, t_grid=grid)
    deviation = np.abs(approx.rates - exact.rates) / exact.rates
    assert deviation.max() < 1e-2


def test_nn_bound_is_tight_and_holds_early():
    n = 9
    gamma = _ring(NearestNeighbor(gamma=0.25), n)
    grid = np.linspace(0.0, 0.5, 11)
    states = meanfield_service.trajectory_cumulants(gamma, InitialState(), grid)
    first = states[0]
    assert meanfield_service.cumulant_rate_derivative(gamma, None, first) == pytest.approx(
        meanfield_service.nn_meanfield_bound(1, 1.0, 0.0, 0.0, n)
    )
    for state in states:
        c1, c2 = state.correlation(1), state.correlation(2)
        assert -1e-12 <= c2 <= c1 <= state.p
        c2 = max(c2, 0.0)
        bound = meanfield_service.nn_meanfield_bound(1, state.p, c1, c2, n)
        assert meanfield_service.cumulant_rate_derivative(gamma, None, state) <= bound + 1e-9


def test_nn_bound_validation():
    with pytest.raises(InvalidInputError):
        meanfield_service.nn_meanfield_bound(0, 1.0, 0.0, 0.0)
    with pytest.raises(InvalidInputError):
        meanfield_service.nn_meanfield_bound(2, 0.5, 0.1, 0.2)


def test_rejects_non_circulant_gamma():
    gamma = build_decoherence(Exponential(gamma=0.5), chain(6))
    with pytest.raises(ModelError):
        meanfield_service.cumulant_evolve(gamma)


def test_rejects_non_circulant_coupling():
    gamma = _ring(Exponential(gamma=0.5), 5)
    coupling = np.zeros((5, 5))
    coupling[0, 1] = coupling[1, 0] = 0.3
    with pytest.raises(ModelError):
        meanfield_service.cumulant_evolve(gamma, coupling)


def test_circulant_profile_first_row():
    gamma = _ring(Exponential(gamma=0.5), 5)
    assert np.allclose(meanfield_service.circulant_profile(gamma.entries), [1, 0.5, 0.25, 0.25, 0.5])


# ---------------------------------------------------------------------------
# CumulantState
# ---------------------------------------------------------------------------

def test_state_defaults_to_uncorrelated_populations():
    state = CumulantState(p=0.4, correlations={1: 0.1})
    assert state.population(3) == pytest.approx(0.16)
    assert state.correlation(2) == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"p": 0.2, "correlations": {1: 0.3}},
        {"p": 0.5, "correlations": {0: 0.1}},
        {"p": 0.5, "correlations": {1: 0.1 + 0.2j}},
        {"p": 1.5},
    ],
)
def test_state_validation(kwargs):
    with pytest.raises(ValidationError):
        CumulantState(**kwargs)
