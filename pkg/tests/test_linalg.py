"""Tests for the dense complex-matrix kernel."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nchull import (
    InvariantBreach,
    SelfAdjointTuple,
    commutant,
    complete_to_unitary,
    compress,
    direct_sum,
    equivalence_probe,
    hermitize,
    is_psd,
    kron,
    opnorm,
    random_hermitian,
    random_isometry,
    sqrt_psd,
)


def rand_tuple(g, dim, seed, norm=1.0):
    return SelfAdjointTuple(tuple(random_hermitian(dim, [seed, k], norm) for k in range(g)))


# ---------------------------------------------------------------- tuples


def test_tuple_validation():
    t = SelfAdjointTuple([np.diag([1.0, 2.0])])
    assert t.g == 1 and t.dim == 2
    assert t[0].dtype == np.complex128
    with pytest.raises(ValueError):
        SelfAdjointTuple([np.array([[0.0, 1.0], [0.0, 0.0]])])
    with pytest.raises(ValueError):
        SelfAdjointTuple([np.eye(2), np.eye(3)])
    with pytest.raises(ValueError):
        SelfAdjointTuple([np.array([[np.nan]])])


def test_tuple_is_immutable():
    t = SelfAdjointTuple([np.eye(2)])
    with pytest.raises(ValueError):
        t[0][0, 0] = 5.0


# ---------------------------------------------------------------- kron


def test_kron_identity_left():
    b = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(kron(np.eye(1), b), b)


def test_kron_projection_times_identity():
    out = kron(np.diag([1.0, 0.0]), np.eye(2))
    assert np.array_equal(out, np.diag([1.0, 1.0, 0.0, 0.0]))


def test_kron_swap_times_diagonal():
    # blocks [[0, D], [D, 0]] for D = diag(2, 3), expanded by hand
    out = kron(np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([2.0, 3.0]))
    expected = np.array(
        [
            [0, 0, 2, 0],
            [0, 0, 0, 3],
            [2, 0, 0, 0],
            [0, 3, 0, 0],
        ],
        dtype=complex,
    )
    assert np.array_equal(out, expected)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 10**6))
def test_kron_distributes_over_direct_sum_up_to_permutation(da, db, dc, seed):
    a = random_hermitian(da, [seed, 0])
    b = random_hermitian(db, [seed, 1])
    c = random_hermitian(dc, [seed, 2])
    import scipy.linalg

    lhs = kron(a, scipy.linalg.block_diag(b, c))
    rhs = scipy.linalg.block_diag(kron(a, b), kron(a, c))
    assert np.allclose(
        np.linalg.eigvalsh(lhs), np.linalg.eigvalsh(rhs), atol=1e-12
    )


# ---------------------------------------------------------------- direct sum


def test_direct_sum_scalars():
    out = direct_sum([SelfAdjointTuple([[[1.0]]]), SelfAdjointTuple([[[2.0]]])])
    assert np.array_equal(out[0], np.diag([1.0, 2.0]))


def test_direct_sum_zero_padding():
    y = rand_tuple(2, 2, seed=3)
    z = SelfAdjointTuple([np.zeros((3, 3)), np.zeros((3, 3))])
    out = direct_sum([y, z])
    assert out.dim == 5
    for i in range(2):
        assert np.array_equal(out[i][:2, :2], y[i])
        assert opnorm(out[i][2:, 2:]) == 0.0


def test_direct_sum_spectra_are_multiset_unions():
    parts = [rand_tuple(2, 2, seed=s) for s in (0, 1, 2)]
    total = direct_sum(parts)
    assert total.dim == 6
    for i in range(2):
        merged = np.sort(np.concatenate([np.linalg.eigvalsh(p[i]) for p in parts]))
        assert np.allclose(np.linalg.eigvalsh(total[i]), merged, atol=1e-12)


def test_direct_sum_rejects_mismatched_g():
    with pytest.raises(ValueError):
        direct_sum([rand_tuple(1, 2, 0), rand_tuple(2, 2, 0)])


# ---------------------------------------------------------------- compress


def test_compress_identity():
    y = rand_tuple(2, 3, seed=1)
    out = compress(y, np.eye(3))
    assert all(np.allclose(a, b) for a, b in zip(out, y))


def test_compress_to_first_coordinate():
    y = rand_tuple(2, 3, seed=2)
    e1 = np.zeros((3, 1))
    e1[0, 0] = 1.0
    out = compress(y, e1)
    for i in range(2):
        assert abs(out[i][0, 0] - y[i][0, 0]) < 1e-15


def test_compress_quadratic_form_annihilation():
    # (3/4)(3/8) + (1/4)(-9/8) = 0
    y = SelfAdjointTuple([np.diag([3 / 8, -9 / 8])])
    v = np.array([[np.cos(np.pi / 6)], [np.sin(np.pi / 6)]])
    out = compress(y, v)
    assert abs(out[0][0, 0]) < 1e-15


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_compress_composes(dim, seed):
    y = rand_tuple(2, dim, seed)
    v = random_isometry(dim - 1, dim, seed + 1)
    w = random_isometry(1, dim - 1, seed + 2)
    once = compress(compress(y, v), w)
    joint = compress(y, v @ w)
    assert all(opnorm(a - b) <= 1e-12 for a, b in zip(once, joint))


def test_compress_shape_mismatch():
    with pytest.raises(ValueError):
        compress(rand_tuple(1, 2, 0), np.eye(3))


# ---------------------------------------------------------------- psd / sqrt


def test_is_psd_basics():
    assert is_psd(np.eye(3), tol=0.0)
    assert not is_psd(np.diag([1.0, -1.0]), tol=1e-9)
    # eigenvalues 1 and 3 by the 2x2 trace/determinant formula
    assert is_psd(np.array([[2.0, 1.0], [1.0, 2.0]]))
    with pytest.raises(ValueError):
        is_psd(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_sqrt_psd_diagonal_and_identity():
    assert np.allclose(sqrt_psd(np.eye(2)), np.eye(2))
    assert np.allclose(sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_sqrt_psd_fixes_projections():
    rng = np.random.default_rng(5)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v /= np.linalg.norm(v)
    p = np.outer(v, v.conj())
    assert opnorm(sqrt_psd(p) - p) < 1e-12


def test_sqrt_psd_rejects_indefinite():
    with pytest.raises(ValueError):
        sqrt_psd(np.diag([1.0, -1.0]))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10**6), st.floats(0.1, 50.0))
def test_sqrt_psd_contract(dim, seed, scale):
    h = random_hermitian(dim, seed, norm=scale)
    h = h @ h.conj().T  # PSD with norm scale**2
    s = sqrt_psd(h)
    assert np.linalg.eigvalsh(s)[0] >= -1e-10
    assert opnorm(s @ s - h) <= 1e-10 * (1 + opnorm(h))


# ---------------------------------------------------------------- unitary completion


def test_complete_to_unitary_square_is_identity_map():
    u = random_isometry(3, 3, seed=9)
    assert complete_to_unitary(u) is u or np.array_equal(complete_to_unitary(u), u)


def test_complete_to_unitary_basis_vector():
    e1 = np.zeros((2, 1))
    e1[0, 0] = 1.0
    u = complete_to_unitary(e1)
    assert u.shape == (2, 2)
    assert np.array_equal(u[:, :1], e1)
    assert opnorm(u.conj().T @ u - np.eye(2)) <= 1e-12


def test_complete_to_unitary_random_isometry():
    v = random_isometry(2, 4, seed=7)
    u = complete_to_unitary(v)
    assert u.shape == (4, 4)
    assert opnorm(u.conj().T @ u - np.eye(4)) <= 1e-10
    # copied columns are bitwise identical
    assert np.array_equal(u[:, :2], v)


def test_complete_to_unitary_rejects_non_isometry():
    with pytest.raises(ValueError):
        complete_to_unitary(np.full((3, 2), 0.5))


# ---------------------------------------------------------------- random isometry


def test_random_isometry_scalar_case():
    v = random_isometry(1, 1, seed=0)
    assert abs(abs(v[0, 0]) - 1.0) < 1e-14


@pytest.mark.parametrize("shape", [(1, 3), (2, 5), (4, 4), (3, 8)])
def test_random_isometry_defining_property(shape):
    n_from, n_to = shape
    v = random_isometry(n_from, n_to, seed=11)
    assert v.shape == (n_to, n_from)
    assert opnorm(v.conj().T @ v - np.eye(n_from)) <= 1e-12


def test_random_isometry_deterministic():
    a = random_isometry(3, 6, seed=42)
    b = random_isometry(3, 6, seed=42)
    assert np.array_equal(a, b)
    c = random_isometry(3, 6, seed=43)
    assert not np.array_equal(a, c)


def test_random_isometry_rejects_fat_shape():
    with pytest.raises(ValueError):
        random_isometry(3, 2, seed=0)


# ---------------------------------------------------------------- commutant


def commutator_nullity_bruteforce(mats, rtol=1e-8):
    """Independent oracle: assemble the commutator system entry by entry."""
    d = mats[0].shape[0]
    rows = []
    for m in mats:
        for a in range(d):
            for b in range(d):
                # (M B - B M)[a, b] as a linear functional of B's entries
                row = np.zeros(d * d, dtype=complex)
                for k in range(d):
                    row[k * d + b] += m[a, k]
                    row[a * d + k] -= m[k, b]
                rows.append(row)
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    return int(np.sum(s <= rtol * s[0]))


def test_commutant_of_identity():
    rep = commutant(SelfAdjointTuple([np.eye(3)]))
    assert rep.commutant_dim == 9
    assert rep.minimal_block_dims == (1, 1, 1)


def test_commutant_distinct_diagonal():
    rep = commutant(SelfAdjointTuple([np.diag([1.0, 2.0])]))
    assert rep.commutant_dim == 2
    assert rep.minimal_block_dims == (1, 1)


def test_commutant_basis_orthonormal_and_commuting():
    t = rand_tuple(2, 4, seed=8)
    rep = commutant(t)
    k = rep.commutant_dim
    gram = np.array(
        [
            [np.trace(a.conj().T @ b) for b in rep.basis]
            for a in rep.basis
        ]
    )
    assert np.allclose(gram, np.eye(k), atol=1e-10)
    for b in rep.basis:
        for m in t:
            assert opnorm(b @ m - m @ b) <= rep.residual + 1e-14


def test_commutant_matches_bruteforce_oracle():
    t = rand_tuple(2, 3, seed=21)
    rep = commutant(t)
    assert rep.commutant_dim == commutator_nullity_bruteforce(list(t))


def test_commutant_tensor_law_for_irreducible_tuple():
    # a generic pair of hermitians is irreducible
    t = rand_tuple(2, 3, seed=31)
    base = commutant(t)
    assert base.commutant_dim == 1
    assert base.minimal_block_dims == (3,)
    for m in (2, 3):
        amp = SelfAdjointTuple(tuple(kron(np.eye(m), x) for x in t))
        rep = commutant(amp)
        assert rep.commutant_dim == m * m
        assert rep.minimal_block_dims == (3,) * m
        assert rep.commutant_dim == commutator_nullity_bruteforce(list(amp))


def test_commutant_dimension_cap():
    with pytest.raises(ValueError):
        commutant(rand_tuple(1, 4, 0), max_dim=3)


def test_commutant_block_sum_equals_dim():
    for seed in range(5):
        t = rand_tuple(1, 4, seed=seed)
        rep = commutant(t)
        assert sum(rep.minimal_block_dims) == 4
        assert (rep.commutant_dim == 1) == (rep.minimal_block_dims == (4,))


# ---------------------------------------------------------------- probe


def test_probe_invariant_under_conjugation():
    y = rand_tuple(2, 3, seed=13)
    for seed in range(100):
        u = random_isometry(3, 3, seed)
        z = compress(y, u)
        assert equivalence_probe(y, z)


def test_probe_distinguishes_different_spectra():
    y = SelfAdjointTuple([np.diag([1.0, 2.0])])
    z = SelfAdjointTuple([np.diag([1.0, 3.0])])
    assert not equivalence_probe(y, z)


def test_probe_dimension_mismatch_is_false():
    assert not equivalence_probe(rand_tuple(1, 2, 0), rand_tuple(1, 3, 0))


def test_probe_permutation_conjugation():
    y = rand_tuple(2, 3, seed=17)
    perm = np.eye(3)[:, [2, 0, 1]]
    z = compress(y, perm)
    assert equivalence_probe(y, z)


def test_hermitize_is_projection():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    h = hermitize(a)
    assert opnorm(h - h.conj().T) < 1e-15
    assert np.allclose(hermitize(h), h)
