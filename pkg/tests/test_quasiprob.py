import numpy as np
import pytest

from opframe import frames as fr
from opframe import quasiprob as qp
from opframe.hilbert import (
    fourier_basis,
    frobenius_distance,
    haar_random_pure,
    ket,
    projector,
    random_density,
    random_effect,
)

S, C = np.sin(np.pi / 8), np.cos(np.pi / 8)
NEGATIVE_STATE = np.array([S, -C])
# brute force <b|a><a|psi><psi|b> for a=0, b=+ ; equals (1 - sqrt 2)/4
KD_NEGATIVE_VALUE = (np.sqrt(0.5) * S) * np.conj(np.vdot(np.array([1, 1]) / np.sqrt(2), NEGATIVE_STATE))


def kd_brute_force(rho, basis_a, basis_b):
    out = {}
    for k, a in enumerate(basis_a):
        for j, b in enumerate(basis_b):
            out[(k, j)] = np.vdot(b, a) * np.vdot(a, rho @ b)
    return out


def test_negative_kd_oracle_value():
    assert KD_NEGATIVE_VALUE.real == pytest.approx((1 - np.sqrt(2)) / 4, abs=1e-15)
    assert KD_NEGATIVE_VALUE.real == pytest.approx(-0.1036, abs=1e-3)


def test_kd_distribution_for_zero_state():
    q = qp.quasi_distribution(fr.kd_frame(dim=2), projector(ket(2, 0)))
    assert q[(0, 0)] == pytest.approx(0.5)
    assert q[(0, 1)] == pytest.approx(0.5)
    assert q[(1, 0)] == pytest.approx(0) and q[(1, 1)] == pytest.approx(0)
    assert q.total == pytest.approx(1)


def test_kd_distribution_negative_value():
    rho = projector(NEGATIVE_STATE)
    q = qp.quasi_distribution(fr.kd_frame(dim=2), rho)
    assert q[(0, 0)] == pytest.approx(KD_NEGATIVE_VALUE, abs=1e-14)
    brute = kd_brute_force(rho, list(np.eye(2)), fourier_basis(2))
    for label, v in brute.items():
        assert q[label] == pytest.approx(v, abs=1e-14)


def test_projective_maximally_mixed():
    q = qp.quasi_distribution(fr.projective_frame(dim=3), np.eye(3) / 3)
    np.testing.assert_allclose(q.values, 1 / 3)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        qp.quasi_distribution(fr.kd_frame(dim=2), np.eye(3) / 3)


@pytest.mark.parametrize("name,d", [("kd", 2), ("kd", 3), ("matrix-unit", 2), ("matrix-unit", 3),
                                    ("phase-point", 3), ("sic2", 2)])
def test_round_trip(name, d):
    f = fr.builtin_frame(name, d)
    for seed in range(50):
        rho = projector(haar_random_pure(d, seed))
        est = qp.reconstruct_state(f, qp.quasi_distribution(f, rho))
        assert frobenius_distance(est, rho) <= 1e-10


def test_phase_point_maximally_mixed():
    f = fr.phase_point_frame(3)
    q = qp.quasi_distribution(f, np.eye(3) / 3)
    np.testing.assert_allclose(q.values, 1 / 9, atol=1e-15)
    np.testing.assert_allclose(qp.reconstruct_state(f, q), np.eye(3) / 3, atol=1e-14)


def test_matrix_unit_coefficients_are_entries():
    rho = random_density(3, 4)
    f = fr.matrix_unit_frame(3)
    q = qp.quasi_distribution(f, rho)
    for (n, k), v in zip(f.labels, q.values):
        # Tr(|n><k| rho) = <k|rho|n>
        assert v == pytest.approx(rho[k, n], abs=1e-15)


def test_reconstruct_refuses_incomplete():
    f = fr.projective_frame(dim=2)
    with pytest.raises(fr.IncompleteFrameError) as info:
        qp.reconstruct_state(f, [0.5, 0.5])
    assert info.value.rank == 2


@pytest.mark.parametrize("name,d", [("kd", 2), ("phase-point", 3), ("sic2", 2), ("matrix-unit", 3)])
def test_predict_probability_special_effects(name, d):
    f = fr.builtin_frame(name, d)
    rho = projector(ket(d, 0))
    assert qp.predict_probability(f, rho, np.eye(d)) == pytest.approx(1, abs=1e-12)
    assert qp.predict_probability(f, rho, rho) == pytest.approx(1, abs=1e-12)


def test_predict_probability_matches_born_rule():
    f = fr.phase_point_frame(3)
    for seed in range(20):
        rho, e = random_density(3, seed), random_effect(3, seed + 100)
        assert abs(qp.predict_probability(f, rho, e) - np.trace(e @ rho)) <= 1e-10


def test_predict_probability_rejects_bad_effects():
    f = fr.kd_frame(dim=2)
    with pytest.raises(ValueError, match="Hermitian"):
        qp.predict_probability(f, np.eye(2) / 2, np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError, match="leave"):
        qp.predict_probability(f, np.eye(2) / 2, 2 * np.eye(2))
    with pytest.raises(fr.IncompleteFrameError):
        qp.predict_probability(fr.projective_frame(dim=2), np.eye(2) / 2, np.eye(2))


def test_kd_marginals_zero_state():
    a, b = qp.marginals_kd(qp.quasi_distribution(fr.kd_frame(dim=2), projector(ket(2, 0))))
    np.testing.assert_allclose(a, [1, 0], atol=1e-15)
    np.testing.assert_allclose(b, [0.5, 0.5], atol=1e-15)


def test_kd_marginals_maximally_mixed():
    a, b = qp.marginals_kd(qp.quasi_distribution(fr.kd_frame(dim=2), np.eye(2) / 2))
    np.testing.assert_allclose(a, [0.5, 0.5])
    np.testing.assert_allclose(b, [0.5, 0.5])


def test_kd_marginal_imaginary_parts_vanish():
    f = fr.kd_frame(dim=3)
    for seed in range(10):
        q = qp.quasi_distribution(f, random_density(3, seed))
        table = q.values.reshape(3, 3)
        assert np.max(np.abs(table.sum(axis=0).imag)) <= 1e-12
        assert np.max(np.abs(table.sum(axis=1).imag)) <= 1e-12


def test_kd_marginals_wrong_frame():
    with pytest.raises(fr.FrameError):
        qp.marginals_kd(qp.quasi_distribution(fr.matrix_unit_frame(2), np.eye(2) / 2))


def test_negativity_values():
    assert qp.negativity([0.2, 0.3, 0.5]) == 0
    q = qp.quasi_distribution(fr.kd_frame(dim=2), projector(NEGATIVE_STATE))
    assert qp.negativity(q) == pytest.approx(-KD_NEGATIVE_VALUE.real, abs=1e-12)
    assert qp.negativity_parts([-0.1 + 0.2j, 1.1]) == (pytest.approx(0.1), pytest.approx(0.2))


def test_negativity_phase_point_random_state():
    q = qp.quasi_distribution(fr.phase_point_frame(3), projector(haar_random_pure(3, 9)))
    n = qp.negativity(q)
    assert np.isfinite(n) and n >= 0


def test_reconstruction_negativity():
    assert qp.reconstruction_negativity(fr.projective_frame(dim=3)).min_eigenvalue == pytest.approx(0, abs=1e-15)
    assert qp.reconstruction_negativity(fr.sic_frame_qubit()).min_eigenvalue < 0
    pp = qp.reconstruction_negativity(fr.phase_point_frame(3))
    assert pp.min_eigenvalue == pytest.approx(-1, abs=1e-12)
    mu = qp.reconstruction_negativity(fr.matrix_unit_frame(2))
    assert len(mu.non_hermitian) == 2


def test_tomography_exact_limit():
    f = fr.sic_frame_qubit()
    for seed in range(5):
        rho = random_density(2, seed)
        run = qp.simulate_tomography(f, rho, shots=10, exact=True)
        assert frobenius_distance(run.estimate, rho) <= 1e-10


def test_tomography_reproducible():
    f = fr.sic_frame_qubit()
    rho = projector(ket(2, 0))
    a = qp.simulate_tomography(f, rho, 1000, seed=7)
    b = qp.simulate_tomography(f, rho, 1000, seed=7)
    np.testing.assert_array_equal(a.counts, b.counts)
    assert a.counts.sum() == 1000
    assert abs(np.trace(a.estimate) - 1) <= 1e-12


def test_tomography_accuracy_at_1e5_shots():
    f = fr.sic_frame_qubit()
    rho = projector(ket(2, 0))
    dists = [qp.simulate_tomography(f, rho, 100_000, seed=s).trace_distance for s in range(200)]
    assert np.mean(np.array(dists) <= 0.02) >= 0.95


def test_tomography_rejects_non_povm():
    with pytest.raises(fr.FrameError):
        qp.simulate_tomography(fr.kd_frame(dim=2), np.eye(2) / 2, 100)
    with pytest.raises(fr.IncompleteFrameError):
        qp.simulate_tomography(fr.projective_frame(dim=2), np.eye(2) / 2, 100)


def test_sample_counts_matches_probabilities():
    rng = np.random.default_rng(0)
    p = np.array([0.1, 0.6, 0.3])
    counts = qp.sample_counts(p, 200_000, rng)
    assert counts.sum() == 200_000
    # 5 standard errors
    np.testing.assert_allclose(counts / 200_000, p, atol=5 * np.sqrt(0.25 / 200_000))
