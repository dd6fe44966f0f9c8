import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invgs import core
from invgs.core import (
    DependentBlock,
    DependentVector,
    PackedCoefficients,
    ShapeError,
    Tolerance,
    egsp,
    egsp2d,
    gfbr,
    gsp,
    iegsp,
    iegsp2d,
    igsp,
    mgs_strict,
    pack_index,
    prune_reconstruct,
    unpack_index,
)


def loop_sum(x):
    total = 0
    for i in range(x + 1):
        total += i
    return total


def loop_order(n_vectors):
    """(n, m) pairs in the order the forward loops visit them."""
    return [(n, m) for n in range(2, n_vectors + 1) for m in range(1, n)]


def full_rank(rng, m, n):
    return rng.random((m, n))


# --- counting and packing -------------------------------------------------

@pytest.mark.parametrize("x, expected", [(0, 0), (3, 6), (19, loop_sum(19))])
def test_gfbr_examples(x, expected):
    assert gfbr(x) == expected


def test_gfbr_19_is_190():
    assert loop_sum(19) == 190


def test_gfbr_rejects_negative():
    with pytest.raises(ValueError):
        gfbr(-1)


def test_pack_index_examples():
    assert pack_index(2, 1) == 1
    assert loop_order(3).index((3, 2)) + 1 == 3
    assert pack_index(3, 2) == 3
    assert pack_index(6, 5) == 15
    assert len(loop_order(6)) == 15


@pytest.mark.parametrize("n_vectors", [1, 2, 3, 7, 30])
def test_pack_index_follows_loop_order(n_vectors):
    ks = [pack_index(n, m) for n, m in loop_order(n_vectors)]
    assert ks == list(range(1, n_vectors * (n_vectors - 1) // 2 + 1))
    assert [unpack_index(k) for k in ks] == loop_order(n_vectors)


@pytest.mark.parametrize("n, m", [(1, 1), (2, 0), (2, 2), (5, 5), (5, -1)])
def test_pack_index_rejects_out_of_range(n, m):
    with pytest.raises(IndexError):
        pack_index(n, m)


def test_packed_length_checked():
    with pytest.raises(ShapeError):
        PackedCoefficients(np.zeros(14), 6)
    assert len(PackedCoefficients(np.zeros(15), 6)) == 15
    assert len(PackedCoefficients.zeros(1)) == 0


def test_triangular_view(rng):
    r = PackedCoefficients(rng.random(10), 5)
    t = r.triangular()
    assert np.all(np.diag(t) == 1.0)
    assert np.all(np.triu(t, 1) == 0.0)
    for n, m in loop_order(5):
        assert t[n - 1, m - 1] == r[n, m] == r.values[pack_index(n, m) - 1]
    assert PackedCoefficients.from_triangular(t) == r


def test_row_slices(rng):
    r = PackedCoefficients(rng.random(15), 6)
    assert r.row(1).size == 0
    for n in range(2, 7):
        np.testing.assert_array_equal(r.row(n), [r[n, m] for m in range(1, n)])


def test_tolerance_validation():
    with pytest.raises(ValueError):
        Tolerance(0.0)
    with pytest.raises(ValueError):
        Tolerance(1.0)
    assert Tolerance().rel_dep == 1e-12


# --- forward transforms ---------------------------------------------------

FORWARD = [gsp, egsp, mgs_strict]


@pytest.mark.parametrize("forward", FORWARD)
def test_identity_is_fixed_point(forward):
    v = np.eye(3)
    u, r = forward(v)
    np.testing.assert_array_equal(u, v)
    np.testing.assert_array_equal(r.values, [0.0, 0.0, 0.0])


@pytest.mark.parametrize("forward", FORWARD)
def test_two_vector_hand_example(forward):
    v = np.array([[1.0, 1.0], [0.0, 1.0]])
    u, r = forward(v)
    # r21 = <u1, v2> / <u1, u1> = 1 / 1
    np.testing.assert_array_equal(u, [[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_array_equal(r.values, [1.0])


@pytest.mark.parametrize("forward", FORWARD)
def test_collinear_names_column_2(forward):
    with pytest.raises(DependentVector) as info:
        forward(np.array([[1.0, 2.0], [0.0, 0.0]]))
    assert info.value.column == 2
    assert "2" in str(info.value)


@pytest.mark.parametrize("forward", FORWARD)
def test_dependent_combination_names_its_column(forward, rng):
    v = full_rank(rng, 10, 5)
    v[:, 3] = 2.0 * v[:, 0] - 0.5 * v[:, 2]
    with pytest.raises(DependentVector) as info:
        forward(v)
    assert info.value.column == 4


def test_zero_first_column():
    with pytest.raises(DependentVector) as info:
        egsp(np.array([[0.0, 1.0], [0.0, 2.0]]))
    assert info.value.column == 1


def test_guard_is_scale_invariant():
    v = np.array([[1.0, 1.0], [0.0, 1e-13]])
    for scale in (1e-100, 1.0, 1e100):
        with pytest.raises(DependentVector):
            egsp(scale * v)
    egsp(np.array([[1.0, 1.0], [0.0, 1e-11]]))


def test_custom_tolerance():
    v = np.array([[1.0, 1.0], [0.0, 1e-6]])
    egsp(v)
    with pytest.raises(DependentVector):
        egsp(v, tol=1e-5)
    with pytest.raises(DependentVector):
        egsp(v, tol=Tolerance(1e-5))


def test_mgs_near_collinear_pair():
    v = np.array([[1.0, 1.0], [0.0, 1e-8]])
    u, _ = mgs_strict(v)
    u1, u2 = u[:, 0], u[:, 1]
    assert abs(u1 @ u2) <= 1e-12 * np.linalg.norm(u1) * np.linalg.norm(u2)


@pytest.mark.parametrize("forward", FORWARD)
def test_single_vector(forward):
    v = np.array([[3.0], [4.0]])
    u, r = forward(v)
    np.testing.assert_array_equal(u, v)
    assert r.n_vectors == 1 and len(r) == 0
    np.testing.assert_array_equal(iegsp(u, r), v)
    np.testing.assert_array_equal(igsp(u, r), v)


def test_input_not_modified(rng):
    v = full_rank(rng, 6, 4)
    before = v.copy()
    for forward in FORWARD:
        forward(v)
    np.testing.assert_array_equal(v, before)


def test_rejects_bad_input():
    with pytest.raises(ShapeError):
        egsp(np.ones(3))
    with pytest.raises(ValueError):
        egsp(np.array([[1.0, np.nan], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        core.orthogonalize(np.eye(2), "householder")


def test_egsp_numerator_uses_original_vector():
    # distinguishes egsp from mgs on a 3-column set
    v = np.array([[1.0, 1.0, 1.0], [0.0, 1.0, 2.0], [0.0, 0.0, 1.0]]) + 0.1
    u_e, r_e = egsp(v)
    u_m, r_m = mgs_strict(v)
    r32_orig = (v[:, 2] @ u_e[:, 1]) / (u_e[:, 1] @ u_e[:, 1])
    assert r_e[3, 2] == pytest.approx(r32_orig, rel=1e-15)
    partial = v[:, 2] - r_m[3, 1] * u_m[:, 0]
    assert r_m[3, 2] == pytest.approx((partial @ u_m[:, 1]) / (u_m[:, 1] @ u_m[:, 1]), rel=1e-15)
    np.testing.assert_allclose(u_e, u_m, atol=1e-14)


# --- inverses -------------------------------------------------------------

def test_inverse_with_zero_coefficients(rng):
    u = rng.random((5, 4))
    for inverse in (igsp, iegsp):
        np.testing.assert_array_equal(inverse(u, PackedCoefficients.zeros(4)), u)


def test_inverse_hand_example():
    u = np.eye(2)
    expected = [[1.0, 1.0], [0.0, 1.0]]
    np.testing.assert_array_equal(igsp(u, [1.0]), expected)
    np.testing.assert_array_equal(iegsp(u, PackedCoefficients([1.0], 2)), expected)


def test_inverse_shape_mismatch(rng):
    u = rng.random((5, 4))
    with pytest.raises(ShapeError):
        iegsp(u, np.zeros(5))
    with pytest.raises(ShapeError):
        igsp(u, PackedCoefficients.zeros(3))


def test_gsp_roundtrip_m20_n10(rng):
    v = full_rank(rng, 20, 10)
    u, r = gsp(v)
    assert np.abs(igsp(u, r) - v).max() <= 1e-12 * np.abs(v).max()


@pytest.mark.parametrize("n", [5, 20])
def test_egsp_roundtrip_table_sizes(rng, n):
    v = full_rank(rng, 20, n)
    u, r = egsp(v)
    err = iegsp(u, r) - v
    assert np.mean(err**2) <= 1e-26


def test_mgs_inverted_by_iegsp(rng):
    v = full_rank(rng, 12, 8)
    u, r = mgs_strict(v)
    assert np.abs(iegsp(u, r) - v).max() <= 1e-12 * np.abs(v).max()


def test_reconstruct_dispatch(rng):
    v = full_rank(rng, 8, 5)
    for method in core.METHODS:
        u, r = core.orthogonalize(v, method)
        assert np.abs(core.reconstruct(u, r, method) - v).max() <= 1e-12


# --- properties over random full-rank sets --------------------------------

shapes = st.integers(2, 30).flatmap(lambda m: st.tuples(st.just(m), st.integers(1, m)))


@settings(max_examples=60, deadline=None)
@given(shape=shapes, seed=st.integers(0, 2**32 - 1))
def test_forward_properties(shape, seed):
    m, n = shape
    v = np.random.default_rng(seed).random((m, n))
    scale = np.abs(v).max()
    results = {}
    for method in core.METHODS:
        u, r = core.orthogonalize(v, method)
        results[method] = (u, r)
        assert len(r) == n * (n - 1) // 2
        # V = U T^T with T unit lower triangular
        assert np.abs(v - u @ r.triangular().T).max() <= 1e-12 * scale
        norms = np.linalg.norm(u, axis=0)
        gram = (u.T @ u) / np.outer(norms, norms)
        np.fill_diagonal(gram, 0.0)
        assert np.abs(gram).max(initial=0.0) <= 1e-10
    u_c, r_c = results["gsp"]
    u_e, r_e = results["egsp"]
    assert np.abs(u_c - u_e).max() <= 1e-12 * scale
    if n > 1:
        assert np.abs(r_c.values - r_e.values).max() <= 1e-12 * np.abs(r_e.values).max()
    assert np.abs(igsp(u_c, r_c) - v).max() <= 1e-12 * scale
    assert np.abs(iegsp(u_e, r_e) - v).max() <= 1e-12 * scale


# --- blocks ---------------------------------------------------------------

def test_block_orthogonal_input_is_fixed_point(rng):
    # disjoint supports: exactly orthogonal under the Frobenius product
    v = np.zeros((4, 3, 3))
    v[0, :, 0] = rng.random(3)
    v[1:3, 1, 1] = rng.random(2)
    v[3, :, 2] = rng.random(3)
    u, r = egsp2d(v)
    np.testing.assert_array_equal(u, v)
    np.testing.assert_array_equal(r.values, np.zeros(3))


def test_block_b1_reduces_to_vectors(rng):
    v = rng.random((9, 6))
    u, r = egsp(v)
    u2, r2 = egsp2d(v[:, None, :])
    np.testing.assert_array_equal(u2[:, 0, :], u)
    assert r2 == r
    np.testing.assert_array_equal(iegsp2d(u2, r2)[:, 0, :], iegsp(u, r))


def test_block_frobenius_projection(rng):
    v = rng.random((3, 2, 2))
    u, r = egsp2d(v)
    a, b = v[:, :, 0], v[:, :, 1]
    expected = np.sum(a * b) / np.sum(a * a)
    assert r[2, 1] == pytest.approx(expected, rel=1e-14)
    assert abs(np.sum(u[:, :, 0] * u[:, :, 1])) <= 1e-14


def test_block_roundtrip(rng):
    v = rng.random((4, 4, 3))
    u, r = egsp2d(v)
    assert len(r) == 3
    assert np.abs(iegsp2d(u, r) - v).max() <= 1e-12 * np.abs(v).max()


def test_block_zero_coefficients(rng):
    u = rng.random((2, 3, 4))
    np.testing.assert_array_equal(iegsp2d(u, PackedCoefficients.zeros(4)), u)


def test_block_dependence():
    v = np.zeros((2, 2, 2))
    v[:, :, 0] = [[1.0, 2.0], [3.0, 4.0]]
    v[:, :, 1] = 3.0 * v[:, :, 0]
    with pytest.raises(DependentBlock) as info:
        egsp2d(v)
    assert info.value.column == 2
    assert isinstance(info.value, DependentVector)


def test_block_shape_checks():
    with pytest.raises(ShapeError):
        egsp2d(np.ones((2, 2)))
    with pytest.raises(ShapeError):
        iegsp2d(np.ones((2, 2, 3)), np.zeros(2))


# --- pruning --------------------------------------------------------------

def test_prune_full_keep_is_exact_inverse(rng):
    v = rng.random((10, 6))
    u, r = egsp(v)
    for project in (False, True):
        np.testing.assert_array_equal(prune_reconstruct(u, r, 6, project=project), iegsp(u, r))


def test_prune_keep_n_minus_1(rng):
    v = rng.random((10, 6))
    u, r = egsp(v)
    vhat = prune_reconstruct(u, r, 5)
    np.testing.assert_array_equal(vhat[:, :5], iegsp(u, r)[:, :5])
    np.testing.assert_allclose(vhat[:, 5], v[:, 5] - u[:, 5], atol=1e-14)
    np.testing.assert_array_equal(vhat, prune_reconstruct(u, r, 5, project=True))


def test_prune_energy_oracle_m20_n10_k5(rng):
    v = rng.random((20, 10))
    u, r = egsp(v)
    vhat = prune_reconstruct(u, r, 5)
    energy = np.sum(u[:, 5:] ** 2) / v.size
    assert np.mean((v - vhat) ** 2) == pytest.approx(energy, rel=1e-10)


def test_prune_project_matches_least_squares(rng):
    v = rng.random((20, 10))
    u, r = egsp(v)
    keep = 4
    vhat = prune_reconstruct(u, r, keep, project=True)
    basis = v[:, :keep]  # same span as u_1..u_keep
    coef, *_ = np.linalg.lstsq(basis, v, rcond=None)
    np.testing.assert_allclose(vhat, basis @ coef, atol=1e-12)
    # uses only the kept components
    u_cut = u.copy()
    u_cut[:, keep:] = 0.0
    np.testing.assert_allclose(prune_reconstruct(u_cut, r, keep, project=True), vhat, atol=0)


def test_prune_blocks(rng):
    v = rng.random((3, 3, 4))
    u, r = egsp2d(v)
    vhat = prune_reconstruct(u, r, 2)
    assert vhat.shape == v.shape
    np.testing.assert_allclose(v[:, :, 2:] - vhat[:, :, 2:], u[:, :, 2:], atol=1e-14)


@pytest.mark.parametrize("keep", [0, 7])
def test_prune_keep_range(rng, keep):
    u, r = egsp(rng.random((8, 6)))
    with pytest.raises(ValueError):
        prune_reconstruct(u, r, keep)
