import numpy as np
import pytest

from eoa3.assistance import Measurement
from eoa3.ensembles import (
    Ensemble,
    ensemble_from_json,
    ensemble_to_json,
    entangled_decomposition,
    equal_concurrence_decomposition,
    hjw_ensemble,
    s0_assistance,
)
from eoa3.monotones import concurrence_pure, wootters_concurrence
from eoa3.qcore import (
    DensityMatrix,
    InputError,
    PureState,
    random_density_matrix,
    reduced_density,
)
from eoa3.states import ghz_state, w_state

BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def reconstruction_error(ens):
    mix = sum(w * np.outer(s.amplitudes, s.amplitudes.conj()) for w, s in ens.elements)
    return float(np.max(np.abs(mix - ens.target.entries)))


def test_ensemble_invariant_enforced():
    bad = PureState((2, 2), np.array([1, 0, 0, 0], dtype=complex))
    with pytest.raises(InputError):
        Ensemble(
            target=DensityMatrix.from_matrix(np.eye(4) / 4), elements=((1.0, bad),)
        )


def test_hjw_ghz_reduction():
    rho = reduced_density(ghz_state(), (0, 1))
    z = hjw_ensemble(rho, Measurement.projective(np.eye(2, dtype=complex), subsystem=1))
    weights = sorted(w for w, _ in z.elements)
    np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-12)
    for _, s in z.elements:
        assert concurrence_pure(s) == pytest.approx(0.0, abs=1e-10)
    x = hjw_ensemble(
        rho,
        Measurement.projective(
            np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2), subsystem=1
        ),
    )
    for w, s in x.elements:
        assert w == pytest.approx(0.5, abs=1e-12)
        assert concurrence_pure(s) == pytest.approx(1.0, abs=1e-10)


def test_hjw_reconstruction_random():
    basis = np.array([[1, 1j], [1j, 1]], dtype=complex) / np.sqrt(2)
    for seed in range(30):
        rho = random_density_matrix(4, 2, seed)
        ens = hjw_ensemble(rho, Measurement.projective(basis, subsystem=1))
        assert reconstruction_error(ens) <= 1e-12


def test_hjw_purifier_too_small():
    rho = random_density_matrix(4, 3, 0)
    with pytest.raises(InputError):
        hjw_ensemble(rho, Measurement.projective(np.eye(2, dtype=complex), subsystem=1))


def test_hjw_eigenbasis_returns_eigen_ensemble():
    rho = random_density_matrix(4, 2, 7)
    evals = np.sort(np.linalg.eigvalsh(rho.entries))[::-1][:2]
    ens = hjw_ensemble(rho, Measurement.projective(np.eye(2, dtype=complex), subsystem=1))
    weights = sorted((w for w, _ in ens.elements), reverse=True)
    np.testing.assert_allclose(weights, evals, atol=1e-12)


def test_equal_concurrence_pure_bell():
    ens = equal_concurrence_decomposition(
        DensityMatrix.from_matrix(np.outer(BELL, BELL.conj()))
    )
    assert len(ens.elements) == 1
    assert concurrence_pure(ens.elements[0][1]) == pytest.approx(1.0, abs=1e-10)


def test_equal_concurrence_maximally_mixed():
    ens = equal_concurrence_decomposition(DensityMatrix.from_matrix(np.eye(4) / 4))
    assert len(ens.elements) == 4
    for _, s in ens.elements:
        assert concurrence_pure(s) == pytest.approx(0.0, abs=1e-8)
    assert reconstruction_error(ens) <= 1e-10


def test_equal_concurrence_half_bell_half_product():
    mix = 0.5 * np.outer(BELL, BELL.conj()) + 0.5 * np.diag([1.0, 0, 0, 0])
    ens = equal_concurrence_decomposition(DensityMatrix.from_matrix(mix))
    for _, s in ens.elements:
        assert concurrence_pure(s) == pytest.approx(0.5, abs=1e-8)
    assert reconstruction_error(ens) <= 1e-10


def test_equal_concurrence_random_spread():
    for seed in range(200):
        rho = random_density_matrix(4, 2 + seed % 3, seed)
        c = wootters_concurrence(rho)
        ens = equal_concurrence_decomposition(rho)
        concs = [concurrence_pure(s) for _, s in ens.elements]
        assert max(concs) - min(concs) <= 1e-8
        assert abs(concs[0] - c) <= 1e-8
        assert len(ens.elements) <= 4
        assert reconstruction_error(ens) <= 1e-10


def test_entangled_decomposition_two_products():
    rho = DensityMatrix.from_matrix(np.diag([0.5, 0, 0, 0.5]).astype(complex))
    ens = entangled_decomposition(rho)
    for w, s in ens.elements:
        assert w == pytest.approx(0.5, abs=1e-12)
        assert concurrence_pure(s) == pytest.approx(1.0, abs=1e-10)


def test_entangled_decomposition_tilted_products():
    v = np.zeros(4, dtype=complex)
    v[2] = v[3] = 1 / np.sqrt(2)  # |1+>
    mix = 0.5 * np.diag([1.0, 0, 0, 0]) + 0.5 * np.outer(v, v.conj())
    ens = entangled_decomposition(DensityMatrix.from_matrix(mix))
    assert all(concurrence_pure(s) > 1e-6 for _, s in ens.elements)
    assert reconstruction_error(ens) <= 1e-10


def test_entangled_decomposition_pure_marginal_rejected():
    rho = DensityMatrix.from_matrix(np.diag([0.5, 0.5, 0, 0]).astype(complex))
    with pytest.raises(InputError):
        entangled_decomposition(rho)


def test_s0_assistance_examples():
    zero = np.zeros(4, dtype=complex)
    zero[0] = 1
    assert s0_assistance(DensityMatrix.from_matrix(np.outer(zero, zero.conj()))) == 0.0
    assert s0_assistance(reduced_density(w_state(), (0, 1))) == 1.0
    assert s0_assistance(DensityMatrix.from_matrix(np.outer(BELL, BELL.conj()))) == 1.0
    assert s0_assistance(DensityMatrix.from_matrix(np.diag([0.5, 0.5, 0, 0]).astype(complex))) == 0.0


def test_ensemble_json_round_trip():
    rho = random_density_matrix(4, 2, 3)
    ens = equal_concurrence_decomposition(rho)
    again = ensemble_from_json(ensemble_to_json(ens))
    assert len(again.elements) == len(ens.elements)
    assert np.max(np.abs(again.target.entries - ens.target.entries)) <= 1e-12
