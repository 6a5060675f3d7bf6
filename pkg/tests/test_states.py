import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sharedpurity.states import (
    DensityOperator,
    PureState,
    StateError,
    apply_local_unitaries,
    eig_hermitian,
    haar_random_pure,
    load_state,
    partial_trace,
    permute_parties,
    random_density,
    random_unitary,
    save_state,
    state_from_dict,
    state_to_dict,
    tensor,
)

S2 = 1 / np.sqrt(2)
PSI_MINUS = np.array([0, S2, -S2, 0])
PSI_PLUS = np.array([0, S2, S2, 0])


def dm(v, dims):
    v = np.asarray(v, dtype=complex)
    return DensityOperator(dims, np.outer(v, v.conj()))


# --- validation -------------------------------------------------------------

@pytest.mark.parametrize(
    "matrix, invariant",
    [
        (np.array([[0.5, 0.1], [0.0, 0.5]]), "hermitian"),
        (np.eye(2) * 0.45, "unit-trace"),
        (np.diag([1.2, -0.2]), "positive-semidefinite"),
    ],
)
def test_density_operator_names_violated_invariant(matrix, invariant):
    with pytest.raises(StateError) as exc:
        DensityOperator((2,), matrix)
    assert exc.value.invariant == invariant
    assert invariant in str(exc.value)


def test_density_operator_tolerances_are_inclusive_of_roundoff():
    m = np.eye(4) / 4
    m[0, 1] = m[1, 0] = 0.0
    m[0, 0] += 5e-11
    DensityOperator((2, 2), m)  # trace error 5e-11 is below 1e-10
    m[0, 0] += 2e-10
    with pytest.raises(StateError, match="unit-trace"):
        DensityOperator((2, 2), m)


def test_dims_must_match_matrix_size():
    with pytest.raises(StateError) as exc:
        DensityOperator((2, 3), np.eye(4) / 4)
    assert exc.value.invariant in ("dims", "shape")
    with pytest.raises(StateError):
        DensityOperator((1, 4), np.eye(4) / 4)


def test_pure_state_norm():
    with pytest.raises(StateError, match="unit-norm"):
        PureState((2,), [1.0, 1e-5])
    p = PureState.from_unnormalized((2,), [3.0, 4.0])
    assert np.isclose(np.linalg.norm(p.vector), 1, atol=1e-12)


def test_states_are_immutable():
    rho = DensityOperator.maximally_mixed((2, 2))
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0
    with pytest.raises(Exception):
        rho.dims = (4,)


# --- tensor -----------------------------------------------------------------

def test_tensor_identity():
    r = tensor(DensityOperator.maximally_mixed((2,)), DensityOperator.maximally_mixed((2,)))
    assert r.dims == (2, 2)
    np.testing.assert_allclose(r.matrix, np.eye(4) / 4, atol=1e-15)


def test_tensor_basis():
    v = tensor(PureState.basis((2,), (0,)), PureState.basis((2,), (1,)))
    np.testing.assert_allclose(v.vector, [0, 1, 0, 0])


def test_tensor_diagonal():
    a = DensityOperator((2,), np.diag([0.3, 0.7]))
    b = DensityOperator((2,), np.diag([1.0, 0.0]))
    np.testing.assert_allclose(np.diag(tensor(a, b).matrix).real, [0.3, 0, 0.7, 0], atol=1e-15)


def test_tensor_requires_same_kind():
    with pytest.raises(TypeError):
        tensor(PureState.basis((2,), (0,)), DensityOperator.maximally_mixed((3,)))
    r = tensor(PureState.basis((2,), (0,)).density(), DensityOperator.maximally_mixed((3,)))
    assert r.dims == (2, 3)


# --- partial trace ----------------------------------------------------------

def test_partial_trace_singlet_marginal():
    np.testing.assert_allclose(partial_trace(dm(PSI_MINUS, (2, 2)), [0]).matrix,
                               np.eye(2) / 2, atol=1e-15)


def test_partial_trace_generalized_ghz():
    th = 0.4
    v = np.zeros(8)
    v[0], v[7] = np.cos(th), np.sin(th)
    r = partial_trace(dm(v, (2, 2, 2)), [0, 1]).matrix
    expect = np.diag([np.cos(th) ** 2, 0, 0, np.sin(th) ** 2])
    np.testing.assert_allclose(r, expect, atol=1e-15)


def test_partial_trace_w_state_by_brute_force():
    v = np.zeros(8)
    v[[1, 2, 4]] = 1 / np.sqrt(3)
    r = partial_trace(PureState((2, 2, 2), v), [0, 1]).matrix
    # brute-force contraction over the third index
    t = v.reshape(4, 2)
    brute = sum(np.outer(t[:, k], t[:, k]) for k in range(2))
    expect = np.diag([1 / 3, 0, 0, 0]) + (2 / 3) * np.outer(PSI_PLUS, PSI_PLUS)
    np.testing.assert_allclose(r, brute, atol=1e-15)
    np.testing.assert_allclose(r, expect, atol=1e-15)


def test_partial_trace_keep_order_is_respected():
    a = random_density((2,), seed=1)
    b = random_density((3,), seed=2)
    r = partial_trace(tensor(a, b), [1, 0])
    assert r.dims == (3, 2)
    np.testing.assert_allclose(r.matrix, np.kron(b.matrix, a.matrix), atol=1e-14)


@pytest.mark.parametrize("keep", [[], [3], [0, 0], [-1]])
def test_partial_trace_rejects_bad_party_sets(keep):
    rho = DensityOperator.maximally_mixed((2, 2, 2))
    with pytest.raises(StateError) as exc:
        partial_trace(rho, keep)
    assert exc.value.invariant == "party-set"


@pytest.mark.parametrize("seed", range(5))
def test_partial_trace_composes(seed):
    rho = random_density((2, 3, 2), seed=seed)
    step = partial_trace(partial_trace(rho, [0, 1]), [0])
    direct = partial_trace(rho, [0])
    assert np.max(np.abs(step.matrix - direct.matrix)) <= 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_tensor_then_trace_returns_first_factor(seed):
    a = random_density((3,), seed=seed)
    b = random_density((2, 2), seed=seed + 100)
    r = partial_trace(tensor(a, b), [0])
    assert np.max(np.abs(r.matrix - a.matrix)) <= 1e-12


def test_permute_parties_matches_partial_trace_order():
    psi = haar_random_pure((2, 3, 2), seed=3)
    q = permute_parties(psi, (2, 0, 1))
    assert q.dims == (2, 2, 3)
    np.testing.assert_allclose(partial_trace(q, [1]).matrix, partial_trace(psi, [0]).matrix,
                               atol=1e-14)


# --- eigendecomposition -----------------------------------------------------

def test_eig_maximally_mixed():
    w, _ = eig_hermitian(DensityOperator.maximally_mixed((2, 2)))
    np.testing.assert_allclose(w, [0.25] * 4, atol=1e-15)


def test_eig_bell_mixture_top_vector():
    p = 0.7
    phi_minus = np.array([S2, 0, 0, -S2])
    rho = p * np.outer(PSI_MINUS, PSI_MINUS) + (1 - p) * np.outer(phi_minus, phi_minus)
    w, v = eig_hermitian(DensityOperator((2, 2), rho))
    assert np.isclose(w[0], 0.7, atol=1e-12)
    assert np.isclose(abs(np.vdot(v[:, 0], PSI_MINUS)), 1, atol=1e-12)


def test_eig_reconstruction_and_order():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = a + a.conj().T
    w, v = eig_hermitian(h)
    assert np.all(np.diff(w) <= 0)
    assert np.linalg.norm((v * w) @ v.conj().T - h) <= 1e-9
    assert np.max(np.abs(v.conj().T @ v - np.eye(4))) <= 1e-9
    assert np.max(np.abs(h @ v - v * w)) <= 1e-9


def test_eig_rejects_non_hermitian():
    with pytest.raises(StateError, match="hermitian"):
        eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), dims=st.sampled_from([(2,), (2, 2), (3, 2), (2, 2, 2)]),
       rank=st.integers(1, 4))
def test_density_spectrum_is_a_distribution(seed, dims, rank):
    rho = random_density(dims, seed=seed, rank=min(rank, int(np.prod(dims))))
    w, _ = eig_hermitian(rho)
    assert abs(w.sum() - 1) <= 1e-9
    assert w.min() >= -1e-9


# --- random states ----------------------------------------------------------

def test_haar_norm_and_determinism():
    p = haar_random_pure((2,), seed=5)
    assert abs(np.linalg.norm(p.vector) - 1) <= 1e-12
    a = haar_random_pure((2, 2), seed=42)
    b = haar_random_pure((2, 2), seed=42)
    np.testing.assert_array_equal(a.vector, b.vector)
    assert not np.allclose(a.vector, haar_random_pure((2, 2), seed=43).vector)


def test_haar_first_moment():
    # |<0|v>|^2 is uniform on [0, 1] for a Haar qubit, so its mean is 1/2
    probs = [abs(haar_random_pure((2,), seed=s).vector[0]) ** 2 for s in range(100000)]
    assert abs(np.mean(probs) - 0.5) <= 0.01


def test_random_density_rank():
    rho = random_density((2, 2), seed=0, rank=1)
    assert rho.is_pure()
    assert np.linalg.matrix_rank(rho.matrix, tol=1e-10) == 1


def test_random_unitary_is_unitary():
    u = random_unitary(3, seed=1)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(3), atol=1e-12)


def test_local_unitaries_preserve_marginal_spectra():
    rho = random_density((2, 3), seed=9)
    us = [random_unitary(2, seed=1), random_unitary(3, seed=2)]
    r2 = apply_local_unitaries(rho, us)
    for k in (0, 1):
        np.testing.assert_allclose(eig_hermitian(partial_trace(rho, [k]))[0],
                                   eig_hermitian(partial_trace(r2, [k]))[0], atol=1e-12)


# --- JSON I/O ---------------------------------------------------------------

def test_json_round_trip(tmp_path):
    rho = random_density((2, 3), seed=4)
    psi = haar_random_pure((2, 2), seed=4)
    for s in (rho, psi):
        path = tmp_path / "s.json"
        save_state(s, path)
        back = load_state(path)
        assert type(back) is type(s)
        assert back.dims == s.dims
        a = back.vector if isinstance(s, PureState) else back.matrix
        b = s.vector if isinstance(s, PureState) else s.matrix
        np.testing.assert_array_equal(a, b)


def test_json_accepts_nested_rows():
    m = np.eye(2) / 2
    obj = {"dims": [2], "matrix": [[[x, 0.0] for x in row] for row in m]}
    np.testing.assert_allclose(state_from_dict(obj).matrix, m)


def test_json_format_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(StateError) as exc:
        load_state(bad)
    assert exc.value.invariant == "format"
    with pytest.raises(StateError):
        state_from_dict({"dims": [2]})
    with pytest.raises(StateError):
        state_from_dict({"dims": [2], "vector": [[1, 0]]})


def test_state_to_dict_layout():
    d = state_to_dict(PureState.basis((2,), (1,)))
    assert d == {"dims": [2], "vector": [[0.0, 0.0], [1.0, 0.0]]}
    json.dumps(d)
