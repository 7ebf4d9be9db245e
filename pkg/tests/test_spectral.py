import math

import numpy as np
import pytest

from app.schemas.interaction import (
    AllToAll,
    ChiralInfiniteRange,
    Exponential,
    NearestNeighbor,
    NextNearestRing,
    PowerLaw,
)
from app.schemas.lattice import LatticeSpec, chain, hypercube
from app.services import correlation_service, spectral_service
from app.services.decoherence_service import ModelError, build_decoherence, from_entries


def test_descending_order_and_traces():
    gamma = build_decoherence(Exponential(gamma=0.5), chain(6))
    summary = spectral_service.analyze(gamma)
    assert np.all(np.diff(summary.eigenvalues) <= 0)
    assert summary.trace_gamma == pytest.approx(6.0)
    assert np.sum(summary.eigenvalues**2) == pytest.approx(summary.trace_gamma2)
    assert np.sum(summary.eigenvalues**3) == pytest.approx(summary.trace_gamma3)
    assert summary.min_eigenvalue == summary.eigenvalues[-1]


def test_eigenvector_sign_convention():
    gamma = build_decoherence(ChiralInfiniteRange(kd=0.6, chi=0.4), chain(5))
    summary = spectral_service.analyze(gamma, with_vectors=True)
    vectors = summary.eigenvectors
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        lead = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        assert abs(lead.imag) < 1e-12
        assert lead.real > 0
    rebuilt = (vectors * summary.eigenvalues) @ vectors.conj().T
    assert np.allclose(rebuilt, gamma.entries, atol=1e-12)


def test_nn_chain_unphysical_above_gamma_p():
    gamma = build_decoherence(NearestNeighbor(gamma=0.6), chain(10))
    summary = spectral_service.analyze(gamma)
    assert not summary.is_physical
    assert not spectral_service.psd_certificate(gamma)


def test_psd_certificate_agrees_with_eigenvalues():
    gamma = build_decoherence(NearestNeighbor(gamma=0.5), chain(10))
    assert spectral_service.analyze(gamma).is_physical
    assert spectral_service.psd_certificate(gamma)


@pytest.mark.parametrize(
    "model, lattice",
    [
        (NearestNeighbor(gamma=0.35), chain(64)),
        (NearestNeighbor(gamma=0.45), chain(17, periodic=True)),
        (NearestNeighbor(gamma=0.2), LatticeSpec(dimension=3, extents=(3, 4, 5))),
        (NextNearestRing(g1=0.68, g2=0.25), chain(101, periodic=True)),
        (Exponential(gamma=0.5), chain(33, periodic=True)),
        (Exponential(gamma=0.8), chain(40, periodic=True)),
        (Exponential(gamma=1.0), chain(9, periodic=True)),
        (AllToAll(gamma=0.3), chain(12)),
    ],
)
def test_closed_form_spectra_match_numeric(model, lattice):
    closed = spectral_service.closed_form_spectrum(model, lattice)
    numeric = spectral_service.analyze(build_decoherence(model, lattice)).eigenvalues
    assert np.max(np.abs(closed - numeric)) < 1e-9


def test_closed_form_absent_for_open_power_law():
    assert spectral_service.closed_form_spectrum(PowerLaw(gamma=0.3), chain(8)) is None


def test_large_n_exponential_approximation():
    exact = spectral_service.exponential_ring_eigenvalues(401, 0.6)
    approx = spectral_service.exponential_ring_eigenvalues_large_n(401, 0.6)
    assert np.max(np.abs(exact - approx)) < 1e-12 * 401 + 1e-40


@pytest.mark.parametrize("n", [3, 5, 10, 64])
def test_nn_chain_gamma_p_closed_form(n):
    expected = 0.5 / math.cos(math.pi / (n + 1))
    assert spectral_service.gamma_p(NearestNeighbor(gamma=0.1), chain(n)) == pytest.approx(expected)


def test_nn_ring_gamma_p_parity():
    assert spectral_service.gamma_p(NearestNeighbor(gamma=0.1), chain(8, periodic=True)) == 0.5
    odd = spectral_service.gamma_p(NearestNeighbor(gamma=0.1), chain(9, periodic=True))
    assert odd == pytest.approx(0.5 / math.cos(math.pi / 9))


def test_nn_infinite_gamma_p():
    value = spectral_service.gamma_p(NearestNeighbor(gamma=0.1), hypercube(3, 3), infinite=True)
    assert value == pytest.approx(1.0 / 6.0)


@pytest.mark.parametrize("dimension", [1, 2, 3])
def test_hyperrectangle_gamma_p_below_gamma_s_squared(dimension):
    rng = np.random.default_rng(dimension)
    shapes = {tuple(int(x) for x in rng.integers(2, 9, dimension)) for _ in range(30)}
    shapes |= {(2,) * dimension, (3,) * dimension}
    for extents in shapes:
        lattice = LatticeSpec(dimension=dimension, extents=extents)
        gp = spectral_service.gamma_p(NearestNeighbor(gamma=0.1), lattice)
        gs = correlation_service.nn_hyperrectangle_gamma_s(extents)
        assert gp <= gs**2 + 1e-12


@pytest.mark.parametrize("n", [3, 5, 9, 31, 101])
def test_exponential_ring_eigenvalues_positive(n):
    for gamma in np.concatenate([np.linspace(0.0, 0.99, 100), [0.999, 0.9999]]):
        values = spectral_service.exponential_ring_eigenvalues(n, float(gamma))
        assert np.all(values > 0)


def test_gamma_p_by_bisection_matches_eigenvalue_boundary():
    lattice = chain(8)
    gp = spectral_service.gamma_p(PowerLaw(gamma=0.5), lattice)
    assert 0.0 < gp < 1.0
    below = spectral_service.min_eigenvalue_family(PowerLaw(gamma=0.5), lattice, gp * (1 - 1e-6))
    above = spectral_service.min_eigenvalue_family(PowerLaw(gamma=0.5), lattice, gp * (1 + 1e-6))
    assert below >= -1e-9
    assert above < 0


def test_gamma_p_is_one_for_psd_families():
    assert spectral_service.gamma_p(AllToAll(gamma=0.2), chain(5)) == 1.0
    assert spectral_service.gamma_p(Exponential(gamma=0.2), hypercube(2, 3)) == 1.0


def test_gamma_p_rejects_two_parameter_models():
    with pytest.raises(ModelError):
        spectral_service.gamma_p(NextNearestRing(g1=0.1, g2=0.1), chain(7, periodic=True))


def test_custom_matrix_spectrum():
    gamma = from_entries([[1.0, 0.5], [0.5, 1.0]])
    summary = spectral_service.analyze(gamma)
    assert np.allclose(summary.eigenvalues, [1.5, 0.5])
    assert summary.to_dict()["is_physical"] is True
