import math

import numpy as np
import pytest

from app.core.errors import InvalidInputError
from app.schemas.interaction import (
    AllToAll,
    ChiralInfiniteRange,
    Exponential,
    NearestNeighbor,
    NearestNeighborNonuniform,
    PowerLaw,
)
from app.schemas.lattice import LatticeSpec, chain, hypercube
from app.services import correlation_service, spectral_service
from app.services.decoherence_service import ModelError, build_decoherence, from_entries


def _summary(model, lattice):
    return spectral_service.analyze(build_decoherence(model, lattice))


def test_dicke_g2_n4():
    assert correlation_service.g2_zero(_summary(AllToAll(gamma=1.0), chain(4))) == pytest.approx(1.5)


@pytest.mark.parametrize("n", [3, 5, 10, 20])
def test_independent_emitters(n):
    summary = _summary(AllToAll(gamma=0.0), chain(n))
    assert correlation_service.g2_zero(summary) == pytest.approx(1.0 - 1.0 / n)
    assert correlation_service.g3_zero(summary) == pytest.approx((1 - 1 / n) * (1 - 2 / n))


def test_g3_of_dicke_at_n10():
    summary = _summary(AllToAll(gamma=1.0), chain(10))
    assert correlation_service.g3_zero(summary) == pytest.approx(6 * 0.72)


@pytest.mark.parametrize(
    "family",
    [
        lambda n: (AllToAll(gamma=1.0 / math.sqrt(n - 1)), chain(n)),
        lambda n: (NearestNeighbor(gamma=correlation_service.nn_chain_gamma_s(n)), chain(n)),
    ],
)
@pytest.mark.parametrize("n", range(3, 16))
def test_g3_above_one_iff_cubic_trace_exceeds_6n_at_threshold(family, n):
    model, lattice = family(n)
    summary = _summary(model, lattice)
    assert correlation_service.g2_zero(summary) == pytest.approx(1.0, abs=1e-12)
    assert (correlation_service.g3_zero(summary) > 1.0) == (summary.trace_gamma3 > 6 * n)


def test_report_fields_and_rdot0_identity():
    summary = _summary(Exponential(gamma=0.7), chain(9, periodic=True))
    report = correlation_service.correlation_report(summary)
    assert report.rdot0 == pytest.approx(81 * (report.g2 - 1.0))
    assert report.is_superradiant == (report.g2 > 1.0)
    assert report.g3 is not None


def test_report_for_two_sites_has_no_g3():
    report = correlation_service.correlation_report(_summary(AllToAll(gamma=0.5), chain(2)))
    assert report.g3 is None


def test_small_n_errors():
    with pytest.raises(InvalidInputError):
        correlation_service.g2_zero(_summary(AllToAll(gamma=0.5), chain(1)))
    with pytest.raises(InvalidInputError):
        correlation_service.g3_zero(_summary(AllToAll(gamma=0.5), chain(2)))


@pytest.mark.parametrize("n", [4, 7, 12, 30])
def test_dicke_local_rddot0_matches_traces(n):
    gamma = 0.37
    from_traces = correlation_service.rddot0(_summary(AllToAll(gamma=gamma), chain(n)))
    assert from_traces == pytest.approx(correlation_service.dicke_local_rddot0_closed_form(n, gamma))


def test_delayed_burst_threshold():
    threshold = correlation_service.delayed_burst_threshold()
    assert threshold == pytest.approx(18.944, abs=1e-3)
    for n, positive in ((18, False), (19, True)):
        gs = 1.0 / math.sqrt(n - 1)
        assert (correlation_service.dicke_local_rddot0_closed_form(n, gs) > 0) is positive


# ---------------------------------------------------------------------------
# γ_s
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [3, 10, 101])
def test_nn_chain_gamma_s(n):
    result = correlation_service.gamma_s(NearestNeighbor(gamma=0.1), chain(n))
    assert result.method == "closed_form"
    assert result.value == pytest.approx(correlation_service.nn_chain_gamma_s(n))
    assert result.value == pytest.approx(n / math.sqrt(2 * n * (n - 1)))


def test_nn_ring_gamma_s():
    result = correlation_service.gamma_s(NearestNeighbor(gamma=0.1), chain(11, periodic=True))
    assert result.value == pytest.approx(1.0 / math.sqrt(2.0))


def test_nn_hyperrectangle_gamma_s():
    lattice = LatticeSpec(dimension=3, extents=(3, 4, 6))
    result = correlation_service.gamma_s(NearestNeighbor(gamma=0.1), lattice)
    assert result.value == pytest.approx(correlation_service.nn_hyperrectangle_gamma_s((3, 4, 6)))


def test_nn_chain_gamma_p_below_gamma_s():
    for n in range(3, 513):
        gp = spectral_service.gamma_p(NearestNeighbor(gamma=0.1), chain(n))
        assert gp < correlation_service.nn_chain_gamma_s(n)


def test_dicke_gamma_s():
    result = correlation_service.gamma_s(AllToAll(gamma=0.1), chain(20))
    assert result.value == pytest.approx(1.0 / math.sqrt(19.0))


def test_gamma_s_at_two_sites_is_one():
    result = correlation_service.gamma_s(NearestNeighbor(gamma=0.1), chain(2))
    assert result.has_transition
    assert result.value == pytest.approx(1.0)


def test_exponential_gamma_s_ring_plateau():
    for n in (101, 1001, 10001):
        value = correlation_service.gamma_s(Exponential(gamma=0.5), chain(n, periodic=True)).value
        assert value == pytest.approx(1.0 / math.sqrt(3.0), abs=2e-3)


def test_exponential_gamma_s_crosses_g2_one():
    lattice = chain(9)
    value = correlation_service.gamma_s(Exponential(gamma=0.5), lattice).value
    g2 = correlation_service.g2_zero(_summary(Exponential(gamma=value), lattice))
    assert g2 == pytest.approx(1.0, abs=1e-10)


def test_power_law_1d_gamma_s():
    expected = math.sqrt(3.0) / math.pi
    for n in (2001, 5001):
        ring = correlation_service.gamma_s(PowerLaw(gamma=1.0), chain(n, periodic=True))
        assert ring.value == pytest.approx(expected, abs=1e-3)
    open_chain = correlation_service.gamma_s(PowerLaw(gamma=1.0), chain(5000))
    assert open_chain.value == pytest.approx(expected, abs=1e-3)


def test_asymptotic_values():
    def asym(model, lattice):
        return correlation_service.gamma_s(model, lattice, asymptotic=True).value

    assert asym(NearestNeighbor(gamma=0.1), hypercube(2, 3)) == pytest.approx(0.5)
    assert asym(Exponential(gamma=0.5), chain(5)) == pytest.approx(1 / math.sqrt(3))
    assert asym(PowerLaw(gamma=0.5), chain(5)) == pytest.approx(math.sqrt(3) / math.pi)
    with pytest.raises(ModelError):
        asym(PowerLaw(gamma=0.5), hypercube(2, 3))


def test_gamma_s_rejects_chiral():
    with pytest.raises(ModelError):
        correlation_service.gamma_s(ChiralInfiniteRange(kd=0.5, chi=0.2), chain(5))


# ---------------------------------------------------------------------------
# Anillo NNN
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "g1, g2, region",
    [
        (0.68, 0.25, "superradiant"),
        (0.28, 0.45, "physical_no_burst"),
        (0.9, 0.1, "unphysical"),
        (0.3, 0.0, "physical_no_burst"),
    ],
)
def test_nnn_region(g1, g2, region):
    assert correlation_service.nnn_region(g1, g2).region == region


def test_nnn_min_gamma2_value():
    assert correlation_service.nnn_min_gamma2() == pytest.approx(0.1847, abs=1e-4)


# ---------------------------------------------------------------------------
# Estados producto y de un salto
# ---------------------------------------------------------------------------

def test_product_state_fully_excited_reduces_to_rdot0():
    gamma = build_decoherence(Exponential(gamma=0.6), hypercube(2, 3))
    summary = spectral_service.analyze(gamma)
    value = correlation_service.product_state_rdot0(gamma, math.pi)
    assert value == pytest.approx(correlation_service.rdot0(summary))


def _torus(n, gamma):
    size = n * n
    entries = np.eye(size)
    for x in range(n):
        for y in range(n):
            i = x * n + y
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                j = ((x + dx) % n) * n + (y + dy) % n
                entries[i, j] = gamma
    return from_entries(entries, tag="torus")


@pytest.mark.parametrize("theta", [0.4, 1.3, 2.2, math.pi])
def test_nn_torus_product_state_per_site(theta):
    gamma = 0.2
    value = correlation_service.product_state_rdot0(_torus(4, gamma), theta) / 16
    assert value == pytest.approx(correlation_service.nn_hypercube_product_rdot0(2, gamma, theta))


def test_product_state_rejects_complex_gamma():
    gamma = build_decoherence(ChiralInfiniteRange(kd=0.5, chi=0.5), chain(4))
    with pytest.raises(ModelError):
        correlation_service.product_state_rdot0(gamma, 1.0)


@pytest.mark.parametrize(
    "model, lattice",
    [
        (Exponential(gamma=0.6), chain(6)),
        (AllToAll(gamma=0.4), chain(5)),
        (ChiralInfiniteRange(kd=0.9, chi=0.3), chain(4)),
    ],
)
def test_one_jump_average_equals_n_g2(model, lattice):
    gamma = build_decoherence(model, lattice)
    summary = spectral_service.analyze(gamma)
    average = correlation_service.one_jump_average_rate(gamma)
    assert average == pytest.approx(lattice.n_sites * correlation_service.g2_zero(summary), rel=1e-9)


def test_one_jump_rejects_unphysical():
    gamma = build_decoherence(NearestNeighbor(gamma=0.6), chain(10))
    with pytest.raises(spectral_service.UnphysicalMatrixError):
        correlation_service.one_jump_average_rate(gamma)


# ---------------------------------------------------------------------------
# Formas cerradas
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [3, 6])
def test_chiral_closed_form_matches_traces(n):
    worst = 0.0
    for kd in np.linspace(0.0, math.pi, 100):
        for chi in np.linspace(-1.0, 1.0, 100):
            model = ChiralInfiniteRange(kd=float(kd), chi=float(chi))
            numeric = correlation_service.g2_zero(_summary(model, chain(n)))
            closed = correlation_service.chiral_g2_closed_form(n, float(kd), float(chi))
            worst = max(worst, abs(numeric - closed))
    assert worst < 1e-9


@pytest.mark.parametrize("n", [3, 5, 8])
def test_chirality_never_lowers_g2(n):
    chis = np.linspace(0.0, 1.0, 51)
    for kd in np.linspace(0.05, 3.1, 40):
        g2 = np.array(
            [
                correlation_service.g2_zero(
                    _summary(ChiralInfiniteRange(kd=float(kd), chi=float(sign * chi)), chain(n))
                )
                for sign in (1.0, -1.0)
                for chi in chis
            ]
        ).reshape(2, -1)
        assert np.all(np.diff(g2, axis=1) >= -1e-12)
        assert np.allclose(g2[0], g2[1], atol=1e-12)


def test_g3_window_onset():
    assert correlation_service.g3_window(6) is None
    window = correlation_service.g3_window(7)
    assert window is not None
    low, high = window
    assert low < high == pytest.approx(1 / math.sqrt(6))


def test_g3_window_width_scaling():
    sizes = [1000, 10000, 100000]
    widths = []
    for n in sizes:
        low, high = correlation_service.g3_window(n)
        widths.append(high - low)
    slope, _ = np.polyfit(np.log(sizes), np.log(widths), 1)
    assert slope == pytest.approx(-1.0, abs=0.05)
    assert widths[-1] * 3 * sizes[-1] == pytest.approx(1.0, abs=0.05)


def test_nn_uncertified_gap():
    low, high = correlation_service.nn_uncertified_gap(chain(10))
    assert low == pytest.approx(0.5)
    assert high == pytest.approx(0.5 / math.cos(math.pi / 11))


@pytest.mark.parametrize("n", range(2, 10))
def test_nonuniform_nn_chain_frobenius_bound(n):
    rng = np.random.default_rng(100 + n)
    limit = math.sqrt(n if n % 2 == 0 else n - 1)
    accepted = 0
    for _ in range(5000):
        model = NearestNeighborNonuniform(gammas=rng.uniform(0.0, 1.0, n - 1))
        gamma = build_decoherence(model, chain(n))
        if not spectral_service.analyze(gamma).is_physical:
            continue
        accepted += 1
        off_diagonal = np.linalg.norm(gamma.entries - np.eye(n))
        assert off_diagonal <= limit + 1e-9
        if accepted == 50:
            break
    assert accepted == 50
