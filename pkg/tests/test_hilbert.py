import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opframe.hilbert import (
    HermitianError,
    frobenius_distance,
    haar_random_pure,
    hermitian_eig,
    ket,
    operator_from_json,
    operator_to_json,
    partial_trace,
    partial_transpose,
    projector,
    tensor,
    weyl_operator,
)

from conftest import random_hermitian, random_matrix


def test_tensor_identity():
    np.testing.assert_array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_basis_ordering():
    out = tensor(projector(ket(2, 0)), projector(ket(2, 1)))
    np.testing.assert_array_equal(out, np.diag([0, 1, 0, 0]))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 5))
def test_tensor_trace_factorizes(seed, d):
    rng = np.random.default_rng(seed)
    a, b = random_matrix(rng, d), random_matrix(rng, d)
    # direct multiplication oracle: Tr(A⊗B) = sum_ij A_ii B_jj
    direct = sum(a[i, i] * b[j, j] for i in range(d) for j in range(d))
    assert abs(np.trace(tensor(a, b)) - direct) <= 1e-12 * max(1.0, abs(direct))


def test_partial_trace_product(rng):
    rho = random_hermitian(rng, 3)
    sigma = random_hermitian(rng, 3)
    out = partial_trace(tensor(rho, sigma), keep=1)
    np.testing.assert_allclose(out, rho * np.trace(sigma), atol=1e-12)
    out2 = partial_trace(tensor(rho, sigma), keep=2)
    np.testing.assert_allclose(out2, sigma * np.trace(rho), atol=1e-12)


def test_partial_trace_bell_is_maximally_mixed():
    e = np.array([1, 0, 0, 1]) / np.sqrt(2)
    np.testing.assert_allclose(partial_trace(projector(e), keep=1), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_against_summation(rng):
    d = 3
    x = random_matrix(rng, d * d)
    # direct summation oracle
    expected = np.zeros((d, d), dtype=complex)
    for a in range(d):
        for b in range(d):
            expected[a, b] = sum(x[a * d + j, b * d + j] for j in range(d))
    np.testing.assert_allclose(partial_trace(x, keep=1), expected, atol=1e-12)
    assert abs(np.trace(partial_trace(x, keep=2)) - np.trace(x)) < 1e-12


def test_partial_trace_rejects_single_factor():
    with pytest.raises(ValueError):
        partial_trace(np.eye(3), keep=1)
    with pytest.raises(ValueError):
        partial_trace(np.eye(6), keep=1, dims=(6,))


def test_partial_transpose_product(rng):
    a, b = random_matrix(rng, 2), random_matrix(rng, 3)
    np.testing.assert_allclose(
        partial_transpose(tensor(a, b), 2, dims=(2, 3)), tensor(a, b.T), atol=1e-14
    )
    np.testing.assert_allclose(
        partial_transpose(tensor(a, b), 1, dims=(2, 3)), tensor(a.T, b), atol=1e-14
    )


def test_partial_transpose_bell_spectrum():
    e = np.array([1, 0, 0, 1]) / np.sqrt(2)
    vals = np.sort(np.linalg.eigvalsh(partial_transpose(projector(e))))
    np.testing.assert_allclose(vals, [-0.5, 0.5, 0.5, 0.5], atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), sub=st.sampled_from([1, 2]))
def test_partial_transpose_involution(seed, sub):
    x = random_matrix(np.random.default_rng(seed), 9)
    np.testing.assert_allclose(partial_transpose(partial_transpose(x, sub), sub), x)


def test_partial_transpose_keeps_untouched_marginal(rng):
    x = random_matrix(rng, 9)
    np.testing.assert_allclose(
        partial_trace(partial_transpose(x, 2), keep=1), partial_trace(x, keep=1), atol=1e-12
    )


def test_partial_transpose_rejects_single_factor():
    with pytest.raises(ValueError):
        partial_transpose(np.eye(5))


def test_hermitian_eig_diagonal():
    vals, _ = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(vals, [3, 2, 1])


def test_hermitian_eig_pauli_x():
    vals, vecs = hermitian_eig(np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(vals, [1, -1])
    # first nonzero entry real positive
    for k in range(2):
        first = vecs[np.flatnonzero(np.abs(vecs[:, k]) > 1e-12)[0], k]
        assert first.real > 0 and abs(first.imag) < 1e-15


@pytest.mark.parametrize("d", [5, 16])
def test_hermitian_eig_reconstruction(rng, d):
    a = random_hermitian(rng, d)
    vals, vecs = hermitian_eig(a)
    assert np.all(np.diff(vals) <= 0)
    rebuilt = (vecs * vals) @ vecs.conj().T
    assert frobenius_distance(a, rebuilt) <= 1e-10 * np.linalg.norm(a)


def test_hermitian_eig_degenerate_is_reproducible():
    a = np.diag([1.0, 1.0, 0.0])
    u = np.array([[1, 1, 0], [1, -1, 0], [0, 0, np.sqrt(2)]]) / np.sqrt(2)
    a = u @ a @ u.T
    first = hermitian_eig(a)
    second = hermitian_eig(a.copy())
    np.testing.assert_array_equal(first[0], second[0])
    np.testing.assert_array_equal(first[1], second[1])


def test_hermitian_eig_rejects_nonhermitian():
    with pytest.raises(HermitianError) as info:
        hermitian_eig(np.array([[0, 1], [0, 0]]))
    assert info.value.asymmetry == pytest.approx(1.0)


def test_haar_deterministic_and_normalized():
    a = haar_random_pure(4, 11)
    b = haar_random_pure(4, 11)
    np.testing.assert_array_equal(a, b)
    assert abs(np.linalg.norm(a) - 1) < 1e-12
    with pytest.raises(ValueError):
        haar_random_pure(1, 0)


def test_haar_first_component_mean():
    d, n = 3, 10_000
    rng = np.random.default_rng(5)
    samples = np.array([abs(haar_random_pure(d, rng)[0]) ** 2 for _ in range(n)])
    # Monte-Carlo oracle: E|<0|psi>|^2 = 1/d
    stderr = samples.std(ddof=1) / np.sqrt(n)
    assert abs(samples.mean() - 1 / d) < 5 * stderr


def test_weyl_basics():
    np.testing.assert_array_equal(weyl_operator(3, 0, 0), np.eye(3))
    np.testing.assert_array_equal(weyl_operator(2, 1, 0), np.array([[0, 1], [1, 0]]))


def test_weyl_unitary():
    d = 3
    for q in range(d):
        for p in range(d):
            w = weyl_operator(d, q, p)
            assert frobenius_distance(w @ w.conj().T, np.eye(d)) <= 1e-12


@pytest.mark.parametrize("d", [2, 3, 5])
def test_weyl_composition(d):
    omega = np.exp(2j * np.pi / d)
    for q, p, q2, p2 in np.ndindex(d, d, d, d):
        lhs = weyl_operator(d, q, p) @ weyl_operator(d, q2, p2)
        rhs = omega ** (p * q2) * weyl_operator(d, q + q2, p + p2)
        assert frobenius_distance(lhs, rhs) < 1e-12


def test_frobenius_distance():
    a = np.arange(4.0).reshape(2, 2)
    assert frobenius_distance(a, a) == 0
    assert frobenius_distance(np.eye(2), np.zeros((2, 2))) == pytest.approx(np.sqrt(2))
    b = a + 1j
    assert frobenius_distance(a, b) == frobenius_distance(b, a)
    with pytest.raises(ValueError):
        frobenius_distance(np.eye(2), np.eye(3))


def test_operator_json_round_trip(rng):
    x = random_matrix(rng, 4)
    obj = json.loads(json.dumps(operator_to_json(x, [2, 2])))
    back, factors = operator_from_json(obj)
    np.testing.assert_array_equal(back, x)
    assert factors == (2, 2)


@pytest.mark.parametrize(
    "bad",
    [
        {"factors": [2], "re": [[1, 0]], "im": [[0, 0]]},
        {"factors": [2], "re": [[1, 0], [0, 1]], "im": [[0, 0]]},
        {"factors": [3], "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]},
    ],
)
def test_operator_json_rejects_bad_shapes(bad):
    with pytest.raises(ValueError):
        operator_from_json(bad)
