import numpy as np
import pytest

from eoa3.assistance import (
    Measurement,
    SearchBudget,
    VerificationError,
    average_post_measurement,
    commuting_charlie_basis,
    corollary_check,
    e_basis_from_etas,
    eoa_density,
    eoa_numeric,
    eoc_lower_bound_search,
    lossless_classifier,
    theorem1_measurement,
    unital_fixed_point_check,
    verify_theorem1,
)
from eoa3.monotones import CONCURRENCE, E2, ENTROPY_1, cut_entanglement
from eoa3.qcore import (
    DensityMatrix,
    InputError,
    PureState,
    haar_random_pure,
    reduced_density,
)
from eoa3.states import FamilySpec, bell_times_c, generate, ghz_state, product_state, w_state

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_measurement_completeness_enforced():
    with pytest.raises(InputError):
        Measurement(subsystem=2, elements=(np.diag([1.0, 0.0]),))
    m = Measurement.projective(np.eye(2, dtype=complex))
    assert len(m.elements) == 2


def test_commuting_basis_ghz():
    res = commuting_charlie_basis(ghz_state(), "A")
    assert res.residual <= 1e-9
    assert res.alignment == "antiparallel"
    norms = sorted(np.linalg.norm(r) for r in res.bloch_vectors)
    np.testing.assert_allclose(norms, [1.0, 1.0], atol=1e-9)


def test_commuting_basis_w():
    res = commuting_charlie_basis(w_state(), "A")
    assert res.residual <= 1e-9
    assert res.alignment == "parallel"  # zero-vector rule
    norms = sorted(np.linalg.norm(r) for r in res.bloch_vectors)
    assert norms[0] <= 1e-9 and norms[1] == pytest.approx(1.0, abs=1e-9)


def test_commuting_basis_decoupled_flag():
    plus_c = PureState(
        (2, 2, 2), np.array([1, 1, 0, 0, 0, 0, 1, 1], dtype=complex) / 2
    )  # |Phi+> x |+>
    res = commuting_charlie_basis(plus_c, "A")
    assert res.decoupled
    assert res.residual <= 1e-9


def test_commuting_basis_random_invariants():
    for seed in range(50):
        psi = haar_random_pure((2, 2, 2), seed)
        for side in ("A", "B"):
            res = commuting_charlie_basis(psi, side)
            assert res.residual <= 1e-9
            assert abs(res.probabilities.sum() - 1) <= 1e-10
            # Mixing the conditionals reproduces the global marginal.
            mix = sum(
                p * c for p, c in zip(res.probabilities, res.conditional_states)
            )
            target = reduced_density(psi, (0,) if side == "A" else (1,)).entries
            assert np.max(np.abs(mix - target)) <= 1e-10


def test_theorem1_golden_cases():
    _, avg = theorem1_measurement(ghz_state())
    assert avg == pytest.approx(1.0, abs=1e-9)
    _, avg = theorem1_measurement(w_state())
    assert avg == pytest.approx(2 / 3, abs=1e-8)
    meas, avg = theorem1_measurement(bell_times_c())
    assert len(meas.elements) == 1
    assert avg == pytest.approx(1.0, abs=1e-9)
    _, avg = theorem1_measurement(product_state())
    assert avg == pytest.approx(0.0, abs=1e-12)


def test_anti_parallel_balance():
    for seed in range(100):
        psi = haar_random_pure((2, 2, 2), seed)
        res_a = commuting_charlie_basis(psi, "A")
        res_b = commuting_charlie_basis(psi, "B")
        if res_a.alignment == "antiparallel" and res_b.alignment == "antiparallel":
            r = np.linalg.norm(
                sum(p * v for p, v in zip(res_a.probabilities, res_a.bloch_vectors))
            )
            s = np.linalg.norm(
                sum(p * v for p, v in zip(res_b.probabilities, res_b.bloch_vectors))
            )
            assert abs(r - s) <= 1e-8


def test_average_post_measurement_ghz_bases():
    z_meas = Measurement.projective(np.eye(2, dtype=complex))
    x_meas = Measurement.projective(
        np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    )
    assert average_post_measurement(ghz_state(), z_meas, E2) == pytest.approx(0.0, abs=1e-12)
    assert average_post_measurement(ghz_state(), x_meas, E2) == pytest.approx(1.0, abs=1e-12)


def test_average_post_measurement_mixed_branch_error():
    trivial = Measurement.trivial()
    with pytest.raises(InputError):
        average_post_measurement(ghz_state(), trivial, E2)
    # but a decoupled state is fine under the trivial measurement
    assert average_post_measurement(bell_times_c(), trivial, E2) == pytest.approx(1.0, abs=1e-12)


def test_upper_bound_soundness():
    x_meas = Measurement.projective(
        np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    )
    for seed in range(50):
        psi = haar_random_pure((2, 2, 2), seed)
        for m in (E2, ENTROPY_1, CONCURRENCE):
            avg = average_post_measurement(psi, x_meas, m)
            assert avg <= cut_entanglement(psi, "A|BC", m) + 1e-9
            assert avg <= cut_entanglement(psi, "B|AC", m) + 1e-9


def test_e_basis_reconstruction():
    rng = np.random.default_rng(1)
    for _ in range(20):
        z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        eta0 = z[0] / np.linalg.norm(z[0])
        eta1 = z[1] / np.linalg.norm(z[1])
        res = e_basis_from_etas(eta0, eta1, 0.5)
        c, s = np.cos(res.theta), np.sin(res.theta)
        np.testing.assert_allclose(res.eta0, c * res.e0 + s * res.e1, atol=1e-10)
        np.testing.assert_allclose(res.eta1, c * res.e0 - s * res.e1, atol=1e-10)


def test_eoa_numeric_matches_constructive():
    val, _ = eoa_numeric(ghz_state(), E2, SearchBudget(random_starts=1, max_evals=300))
    assert val == pytest.approx(1.0, abs=1e-6)
    val, _ = eoa_numeric(w_state(), E2, SearchBudget(random_starts=1, max_evals=300))
    assert val == pytest.approx(2 / 3, abs=1e-5)


def test_eoa_numeric_w_entropy_gap():
    val, _ = eoa_numeric(w_state(), ENTROPY_1, SearchBudget(random_starts=2, max_evals=500))
    h13 = -(1 / 3) * np.log2(1 / 3) - (2 / 3) * np.log2(2 / 3)
    assert val < h13 - 1e-3


def test_verify_theorem1_examples():
    rep = verify_theorem1(ghz_state(), 1e-8)
    assert rep.gap <= 1e-8
    rep = verify_theorem1(product_state(), 1e-8)
    assert rep.constructive == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(VerificationError):
        verify_theorem1(haar_random_pure((2, 2, 2), 0), 1e-30)


def test_lossless_classifier_examples():
    assert lossless_classifier(ghz_state(), "A|BC", 1e-7).kind == "lossless"
    assert lossless_classifier(w_state(), "A|BC", 1e-7).kind == "lossy"
    assert lossless_classifier(bell_times_c(), "A|BC", 1e-7).kind == "decoupled"
    for seed in range(30):
        psi = generate(FamilySpec(kind="thm2", seed=seed))
        verdict = lossless_classifier(psi, "A|BC", 1e-8)
        assert verdict.kind == "lossless"
        if verdict.certificate.get("branch") == "marginal-preserving":
            lam = np.linalg.eigvalsh(reduced_density(psi, (0,)).entries)[0]
            assert abs(verdict.certificate["lambda_min"] - lam) <= 1e-8


def test_unital_fixed_point_examples():
    eye = np.eye(2, dtype=complex)
    assert unital_fixed_point_check(eye, [0.5, 0.5], [eye, SX]) == (True, True)
    h = np.diag([1.0, 0.0]).astype(complex)
    assert unital_fixed_point_check(h, [0.5, 0.5], [eye, SZ]) == (True, True)
    assert unital_fixed_point_check(h, [0.5, 0.5], [eye, SX]) == (False, False)
    with pytest.raises(InputError):
        unital_fixed_point_check(h, [0.0, 1.0], [eye, SZ])
    with pytest.raises(InputError):
        unital_fixed_point_check(h, [0.5, 0.5], [SX, SX])


def test_corollary_examples():
    psi = generate(FamilySpec(kind="eq21", p=0.8, overlap=0.4))
    rep = corollary_check(psi, 1e-6)
    assert rep.i and rep.ii and rep.iii and rep.applicable
    rep = corollary_check(haar_random_pure((2, 2, 2), 3), 1e-6)
    assert not rep.i and not rep.iii and rep.applicable
    rep = corollary_check(ghz_state(), 1e-6)
    assert rep.i and rep.ii and rep.iii and rep.applicable


def test_eoc_lower_bound():
    val = eoc_lower_bound_search(ghz_state(), E2, SearchBudget(random_starts=1, max_evals=100))
    assert val == pytest.approx(1.0, abs=1e-6)
    psi = haar_random_pure((2, 2, 2), 5)
    val = eoc_lower_bound_search(psi, E2, SearchBudget(random_starts=1, max_evals=100))
    mincut = min(
        cut_entanglement(psi, "A|BC", E2), cut_entanglement(psi, "B|AC", E2)
    )
    assert val <= mincut + 1e-6


def test_eoc_collapse_on_lossless_states():
    psi = generate(FamilySpec(kind="thm2", seed=2))
    numeric, _ = eoa_numeric(psi, ENTROPY_1, SearchBudget(random_starts=1, max_evals=300))
    eoc = eoc_lower_bound_search(psi, ENTROPY_1, SearchBudget(random_starts=1, max_evals=150))
    assert abs(eoc - numeric) <= 2e-4


def test_eoa_density_examples():
    bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    assert eoa_density(
        DensityMatrix.from_matrix(np.outer(bell, bell.conj()))
    ) == pytest.approx(1.0, abs=1e-9)
    assert eoa_density(
        DensityMatrix.from_matrix(np.diag([0.5, 0, 0, 0.5]).astype(complex))
    ) == pytest.approx(1.0, abs=1e-8)
    w_red = reduced_density(w_state(), (0, 1))
    assert eoa_density(w_red) == pytest.approx(2 / 3, abs=1e-8)
    with pytest.raises(InputError):
        eoa_density(DensityMatrix.from_matrix(np.eye(4) / 4))


def test_report_hierarchy_invariant():
    from eoa3.assistance import analyze

    for seed in range(5):
        psi = haar_random_pure((2, 2, 2), seed)
        rep = analyze(psi, E2, SearchBudget(random_starts=1, max_evals=200))
        assert rep.eoa_numeric <= min(rep.cut_a, rep.cut_b) + 1e-6
        d = rep.to_dict()
        assert set(d) == {
            "cutA",
            "cutB",
            "eoaConstructive",
            "eoaNumeric",
            "eocLowerBound",
            "monotone",
            "verdict",
            "measurement",
            "certificate",
        }
