"""Core operator arithmetic: Kronecker placement, spectra, norms, permutations."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from conftest import SX, SY, SZ, I2, P1, kron_chain, naive_embed, naive_perm_matrix, rand_hermitian

from macrofield.linalg import (
    MAX_DIM,
    TOL_EIG,
    DimensionOverflow,
    EigFailed,
    MismatchedLocalDimension,
    NotHermitian,
    Operator,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    IDENTITY_1,
    PROJ_1,
    SiteOutOfRange,
    SiteSpace,
    SpaceMismatch,
    commutator,
    embed_at_site,
    hermitian_eig,
    identity,
    is_hermitian,
    permutation_unitary,
    permute_sites,
    site_sum,
    spectral_norm,
    tensor,
)

S1 = SiteSpace(2, 1)


def op(entries, n=1, d=2):
    return Operator(SiteSpace(d, n), np.asarray(entries, dtype=complex))


# ---------------------------------------------------------------- site space


def test_site_space_dim():
    assert SiteSpace(2, 12).dim == 4096
    assert SiteSpace(3, 2).dim == 9


def test_site_space_rejects_bad_counts():
    with pytest.raises(SiteOutOfRange):
        SiteSpace(2, 0)
    with pytest.raises(MismatchedLocalDimension):
        SiteSpace(1, 3)
    with pytest.raises(DimensionOverflow):
        SiteSpace(2, 15)
    assert SiteSpace(2, 14).dim == MAX_DIM


def test_operator_entries_frozen():
    a = op(SX)
    with pytest.raises(ValueError):
        a.entries[0, 0] = 5.0
    with pytest.raises(AttributeError):
        a.entries = np.eye(2)


def test_operator_shape_check():
    with pytest.raises(SpaceMismatch):
        Operator(SiteSpace(2, 2), np.eye(3))


# ------------------------------------------------------------------- tensor


def test_tensor_identity_case():
    out = tensor(op(I2), op(I2))
    assert np.array_equal(out.entries, np.eye(4))
    assert out.space == SiteSpace(2, 2)


def test_tensor_projector_case():
    out = tensor(op(np.diag([1.0, 0.0])), op(np.diag([1.0, 0.0])))
    assert np.array_equal(out.entries, np.diag([1.0, 0, 0, 0]))


def test_tensor_sx_sz_hand_oracle():
    # 4x4 Kronecker product written out by hand
    expected = np.array(
        [
            [0, 0, 1, 0],
            [0, 0, 0, -1],
            [1, 0, 0, 0],
            [0, -1, 0, 0],
        ],
        dtype=complex,
    )
    out = tensor(op(SX), op(SZ))
    assert np.array_equal(out.entries, expected)


def test_tensor_rejects_mixed_local_dimension():
    with pytest.raises(MismatchedLocalDimension):
        tensor(op(SX), op(np.eye(3), n=1, d=3))


def test_tensor_associative_exact():
    # dyadic entries make every intermediate product exact, so the two
    # groupings must agree bit for bit
    rng = np.random.default_rng(11)

    def dyadic():
        re = rng.integers(-4, 5, size=(2, 2)) / 4
        im = rng.integers(-4, 5, size=(2, 2)) / 4
        return op(re + 1j * im)

    a, b, c = dyadic(), dyadic(), dyadic()
    left = tensor(tensor(a, b), c)
    right = tensor(a, tensor(b, c))
    assert np.array_equal(left.entries, right.entries)


# -------------------------------------------------------------------- embed


def test_embed_single_site():
    assert np.array_equal(embed_at_site(op(SZ), 1, 1).entries, SZ)


def test_embed_proj_site2_of_2():
    out = embed_at_site(op(P1), 2, 2)
    assert np.array_equal(out.entries, np.diag([0.0, 1, 0, 1]))


def test_embed_disjoint_sites_commute():
    a = embed_at_site(op(SX), 1, 2)
    b = embed_at_site(op(SZ), 2, 2)
    assert np.abs(commutator(a, b).entries).max() == 0.0


def test_embed_matches_naive_kron():
    rng = np.random.default_rng(7)
    for n in (2, 3, 4):
        for k in range(1, n + 1):
            b = rand_hermitian(rng, 2)
            got = embed_at_site(op(b), k, n).entries
            assert np.array_equal(got, naive_embed(b, k, n))


def test_embed_site_bounds():
    with pytest.raises(SiteOutOfRange):
        embed_at_site(op(SX), 0, 2)
    with pytest.raises(SiteOutOfRange):
        embed_at_site(op(SX), 3, 2)
    with pytest.raises(SpaceMismatch):
        embed_at_site(tensor(op(SX), op(SX)), 1, 3)


def test_embed_preserves_spectral_norm():
    rng = np.random.default_rng(3)
    for _ in range(5):
        b = rand_hermitian(rng, 2)
        base = spectral_norm(op(b))
        for n in (2, 4, 6):
            got = spectral_norm(embed_at_site(op(b), min(n, 2), n))
            assert abs(got - base) <= 10 * TOL_EIG * max(1.0, base)


def test_site_sum_matches_embed_sum():
    rng = np.random.default_rng(5)
    b = rand_hermitian(rng, 2)
    for n in (1, 2, 3, 5):
        expected = sum(naive_embed(b, k, n) for k in range(1, n + 1))
        assert np.allclose(site_sum(op(b), n).entries, expected, atol=1e-15, rtol=0)


# ----------------------------------------------------------------- spectrum


def test_eig_sz():
    sd = hermitian_eig(op(SZ))
    assert np.allclose(sd.eigenvalues, [-1.0, 1.0], atol=1e-15)


def test_eig_sx():
    sd = hermitian_eig(op(SX))
    assert np.allclose(sd.eigenvalues, [-1.0, 1.0], atol=1e-14)
    # eigenvectors (1, -1)/sqrt(2) and (1, 1)/sqrt(2) up to phase
    lo, hi = sd.eigenvectors[:, 0], sd.eigenvectors[:, 1]
    assert abs(abs(np.vdot(lo, np.array([1, -1]) / np.sqrt(2))) - 1) < 1e-12
    assert abs(abs(np.vdot(hi, np.array([1, 1]) / np.sqrt(2))) - 1) < 1e-12


def test_eig_xz_mix_characteristic_oracle():
    # eigenvalues of (sx+sz)/2 from the characteristic polynomial: +-1/sqrt(2)
    sd = hermitian_eig(op((SX + SZ) / 2))
    root = 0.7071067811865476
    assert np.allclose(sd.eigenvalues, [-root, root], atol=1e-14)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(op([[0, 1], [0, 0]]))


def op_any(a):
    dim = a.shape[0]
    n = int(round(np.log2(dim)))
    return Operator(SiteSpace(2, max(n, 1)), a)


def test_eig_reconstruction_small_dims():
    rng = np.random.default_rng(23)
    for dim in (2, 8, 64, 256):
        a = rand_hermitian(rng, dim)
        sd = hermitian_eig(op_any(a))
        recon = (sd.eigenvectors * sd.eigenvalues) @ sd.eigenvectors.conj().T
        scale = np.abs(a).max()
        assert np.abs(recon - a).max() <= TOL_EIG * scale
        assert np.abs(np.diff(sd.eigenvalues) < 0).sum() == 0
        gram = sd.eigenvectors.conj().T @ sd.eigenvectors
        assert np.abs(gram - np.eye(dim)).max() <= TOL_EIG


def test_eig_reconstruction_large_real_symmetric():
    # top-size reconstruction check; real symmetric keeps it affordable on one core
    rng = np.random.default_rng(29)
    dim = 4096
    a = rng.standard_normal((dim, dim))
    a = (a + a.T) / 2
    sd = hermitian_eig(Operator(SiteSpace(2, 12), a.astype(complex), copy=False))
    recon = (sd.eigenvectors.real * sd.eigenvalues) @ sd.eigenvectors.real.T
    assert np.abs(recon - a).max() <= TOL_EIG * np.abs(a).max()


def test_eig_diagonal_fast_path_matches_generic():
    rng = np.random.default_rng(31)
    diag = rng.standard_normal(16)
    a = op_any(np.diag(diag).astype(complex))
    sd = hermitian_eig(a)
    assert np.array_equal(sd.eigenvalues, np.sort(diag))
    recon = (sd.eigenvectors * sd.eigenvalues) @ sd.eigenvectors.conj().T
    assert np.abs(recon - a.entries).max() == 0.0
    w_generic = np.linalg.eigvalsh(a.entries)
    assert np.allclose(sd.eigenvalues, w_generic, atol=1e-14)


# -------------------------------------------------------------------- norms


def test_norm_identity():
    for n in (1, 3, 5):
        assert spectral_norm(identity(SiteSpace(2, n))) == 1.0


def test_norm_rank_one_ladder():
    # sx - i*sy is twice a rank-1 matrix-unit; its only singular value is 2
    assert abs(spectral_norm(op(SX - 1j * SY)) - 2.0) < 1e-14


def test_norm_pauli_commutator():
    c = commutator(op(SX), op(SZ))
    assert abs(spectral_norm(c) - 2.0) < 1e-14


def test_norm_cstar_identity_random():
    rng = np.random.default_rng(41)
    for dim in (4, 16, 64):
        for hermitian in (True, False):
            a = rand_hermitian(rng, dim)
            if not hermitian:
                a = a + 1j * rand_hermitian(rng, dim)
            o = op_any(a)
            lhs = spectral_norm(
                Operator(o.space, a.conj().T @ a, copy=False)
            )
            rhs = spectral_norm(o) ** 2
            assert abs(lhs - rhs) <= 10 * TOL_EIG * max(1.0, rhs)


def test_norm_submultiplicative_random():
    rng = np.random.default_rng(43)
    for dim in (4, 16, 64):
        a = rand_hermitian(rng, dim) + 1j * rand_hermitian(rng, dim)
        b = rand_hermitian(rng, dim) + 1j * rand_hermitian(rng, dim)
        na = spectral_norm(op_any(a))
        nb = spectral_norm(op_any(b))
        nab = spectral_norm(op_any(a @ b))
        assert nab <= na * nb + 10 * TOL_EIG * max(1.0, na * nb)


def test_norm_power_iteration_route_agrees():
    rng = np.random.default_rng(47)
    a = rng.standard_normal((128, 128)) + 1j * rng.standard_normal((128, 128))
    o = Operator(SiteSpace(2, 7), a)
    dense = spectral_norm(o)
    powered = spectral_norm(o, dense_limit=32)
    assert abs(dense - powered) < 1e-8 * max(1.0, dense)


def test_norm_diagonal_complex_entries():
    d = np.diag([1 + 1j, 0.5, -2.0]).astype(complex)
    o = Operator(SiteSpace(3, 1), d)
    assert abs(spectral_norm(o) - 2.0) < 1e-15
    sing = np.linalg.svd(d, compute_uv=False)
    assert abs(spectral_norm(o) - sing[0]) < 1e-15


# --------------------------------------------------------------- commutator


def test_commutator_self_is_zero():
    rng = np.random.default_rng(53)
    a = op_any(rand_hermitian(rng, 8))
    assert np.abs(commutator(a, a).entries).max() <= 1e-14


def test_commutator_pauli_oracle():
    got = commutator(op(SX), op(SZ)).entries
    assert np.allclose(got, -2j * SY, atol=1e-15)


def test_commutator_space_mismatch():
    with pytest.raises(SpaceMismatch):
        commutator(op(SX), tensor(op(SX), op(SX)))


def test_commutator_hermitian_shortcut_agrees():
    # the adjoint-product shortcut must match the two-product route
    rng = np.random.default_rng(59)
    a = rand_hermitian(rng, 64)
    b = rand_hermitian(rng, 64)
    direct = a @ b - b @ a
    got = commutator(op_any(a), op_any(b)).entries
    assert np.abs(got - direct).max() <= 1e-12


def test_commutator_anti_hermitian():
    rng = np.random.default_rng(61)
    a, b = op_any(rand_hermitian(rng, 16)), op_any(rand_hermitian(rng, 16))
    c = commutator(a, b)
    assert np.abs(c.entries + c.entries.conj().T).max() <= 1e-13


# ------------------------------------------------------------- permutations


def test_permutation_unitary_matches_naive():
    for n in (2, 3):
        space = SiteSpace(2, n)
        for perm in itertools.permutations(range(1, n + 1)):
            got = permutation_unitary(space, perm).entries
            assert np.array_equal(got, naive_perm_matrix(2, n, perm))


def test_permute_sites_equals_conjugation():
    rng = np.random.default_rng(67)
    space = SiteSpace(2, 3)
    a = rand_hermitian(rng, 8)
    o = Operator(space, a)
    for perm in itertools.permutations((1, 2, 3)):
        u = permutation_unitary(space, perm).entries
        expected = u @ a @ u.conj().T
        got = permute_sites(o, perm).entries
        assert np.abs(got - expected).max() <= 1e-14


def test_permutation_unitary_composition():
    space = SiteSpace(2, 3)
    sigma = (2, 3, 1)
    tau = (3, 2, 1)
    u_sigma = permutation_unitary(space, sigma).entries
    u_tau = permutation_unitary(space, tau).entries
    composite = tuple(sigma[t - 1] for t in tau)
    assert np.array_equal(u_sigma @ u_tau, permutation_unitary(space, composite).entries)


def test_permute_sites_rejects_non_permutation():
    with pytest.raises(SiteOutOfRange):
        permute_sites(identity(SiteSpace(2, 2)), (1, 1))


# ----------------------------------------------------------------- misc api


def test_is_hermitian():
    assert is_hermitian(op(SY))
    assert not is_hermitian(op([[0, 1], [0, 0]]))


def test_pauli_constants():
    assert np.array_equal(PAULI_X.entries, SX)
    assert np.array_equal(PAULI_Y.entries, SY)
    assert np.array_equal(PAULI_Z.entries, SZ)
    assert np.array_equal(IDENTITY_1.entries, I2)
    assert np.array_equal(PROJ_1.entries, P1)
