import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_force_pca, principal_angles
from voxinterp.embedding import (
    Embedding,
    cosine_distance,
    group_by_owner,
    interspeaker_stats,
    load_embeddings,
    mean_embedding,
    pca_fit,
    pca_project,
    pca_quality_table,
    pca_reconstruct,
    save_embeddings_binary,
    save_embeddings_csv,
)
from voxinterp.errors import EmptyInputError, FormatError, RangeError, ZeroVectorError


@pytest.fixture
def rank_one():
    t = np.linspace(-2, 3, 12)
    return np.outer(t, [1.0, 2.0, -0.5]) + [0.3, 0.1, 2.0]


def matrices(n_min=3, n_max=12, d_min=2, d_max=6):
    shape = st.tuples(st.integers(n_min, n_max), st.integers(d_min, d_max))
    return shape.flatmap(lambda s: arrays(np.float64, s, elements=st.floats(-10, 10)))


# --- files ---------------------------------------------------------------------------

def test_load_csv(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("owner_id,v0,v1,v2,v3\na,1,2,3,4\nb,0,0,1,0\nc,-1,0.5,2,9\n")
    embs = load_embeddings(path)
    assert len(embs) == 3
    assert [e.owner_id for e in embs] == ["a", "b", "c"]
    np.testing.assert_array_equal(embs[2].vector, [-1, 0.5, 2, 9])


def test_ragged_row_reports_its_line(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("owner_id,v0,v1,v2,v3\na,1,2,3,4\nb,1,2,3\n")
    with pytest.raises(FormatError, match=":3:"):
        load_embeddings(path)


def test_non_finite_value_rejected(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("owner_id,v0,v1\na,1,nan\n")
    with pytest.raises(FormatError):
        load_embeddings(path)


def test_binary_round_trip_matches_csv(tmp_path):
    rng = np.random.default_rng(0)
    # float32-representable values survive both formats unchanged
    vals = rng.standard_normal((5, 8)).astype(np.float32).astype(float)
    embs = [Embedding(v, f"spk{i}") for i, v in enumerate(vals)]
    save_embeddings_csv(tmp_path / "e.csv", embs)
    save_embeddings_binary(tmp_path / "e.bin", embs)
    a = load_embeddings(tmp_path / "e.csv")
    b = load_embeddings(tmp_path / "e.bin")
    assert [e.owner_id for e in a] == [e.owner_id for e in b]
    for x, y in zip(a, b):
        assert x.vector.tobytes() == y.vector.tobytes()
    assert (tmp_path / "e.bin").read_bytes()[:4] == b"VXEB"


def test_truncated_binary(tmp_path):
    embs = [Embedding([1.0, 2.0, 3.0], "a")]
    save_embeddings_binary(tmp_path / "e.bin", embs)
    raw = (tmp_path / "e.bin").read_bytes()
    (tmp_path / "t.bin").write_bytes(raw[:-2])
    with pytest.raises(FormatError):
        load_embeddings(tmp_path / "t.bin")


# --- means and distances -------------------------------------------------------------

def test_mean_embedding_examples():
    v = Embedding([1.0, -2.0, 3.0], "a")
    np.testing.assert_array_equal(mean_embedding([v]).vector, v.vector)
    np.testing.assert_array_equal(mean_embedding([v, Embedding(-v.vector, "a")]).vector, 0.0)
    np.testing.assert_array_equal(mean_embedding([[1, 0], [0, 1]]).vector, [0.5, 0.5])
    with pytest.raises(EmptyInputError):
        mean_embedding([])


def test_group_by_owner_keeps_first_appearance():
    embs = [Embedding([1, 0], "b"), Embedding([0, 1], "a"), Embedding([3, 0], "b")]
    means = group_by_owner(embs)
    assert [m.owner_id for m in means] == ["b", "a"]
    np.testing.assert_array_equal(means[0].vector, [2, 0])


def test_cosine_distance_examples():
    a = np.array([1.0, 2.0, 3.0])
    assert cosine_distance(a, a) == pytest.approx(0.0, abs=1e-15)
    assert cosine_distance([1, 0], [0, 1]) == 1.0
    assert cosine_distance(a, -a) == pytest.approx(2.0)
    with pytest.raises(ZeroVectorError):
        cosine_distance([0, 0], [1, 0])


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 4, elements=st.floats(-5, 5)), arrays(np.float64, 4, elements=st.floats(-5, 5)),
       st.floats(0.01, 100), st.floats(0.01, 100))
def test_cosine_distance_properties(a, b, s, t):
    if np.linalg.norm(a) < 1e-3 or np.linalg.norm(b) < 1e-3:
        return
    d = cosine_distance(a, b)
    assert 0 - 1e-12 <= d <= 2 + 1e-12
    assert d == pytest.approx(cosine_distance(b, a), abs=1e-12)
    assert cosine_distance(s * a, t * b) == pytest.approx(d, abs=1e-9)


def test_interspeaker_orthogonal():
    stats = interspeaker_stats(np.eye(3))
    assert stats["n_pairs"] == 3
    assert stats["mean"] == 1.0
    assert all(v == 1.0 for v in stats["percentiles"].values())
    assert sorted(stats["percentiles"], key=int) == ["1", "5", "50", "95", "99"]


def test_interspeaker_two_speakers():
    stats = interspeaker_stats([[1, 0], [1, 1]])
    assert stats["mean"] == pytest.approx(cosine_distance([1, 0], [1, 1]))
    assert stats["percentiles"]["50"] == pytest.approx(stats["mean"])


def test_interspeaker_random_directions():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((100, 256))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    assert 0.9 <= interspeaker_stats(x)["mean"] <= 1.1


def test_interspeaker_needs_two():
    with pytest.raises(EmptyInputError):
        interspeaker_stats([[1.0, 0.0]])


# --- PCA -----------------------------------------------------------------------------

def test_pca_rank_one(rank_one):
    m = pca_fit(rank_one)
    assert m.eigenvalues[0] > 0
    np.testing.assert_allclose(m.eigenvalues[1:], 0.0, atol=1e-10)
    scores = pca_project(m, rank_one, 1)
    np.testing.assert_allclose(pca_reconstruct(m, scores, 1), rank_one, atol=1e-10)


def test_pca_isotropic():
    x = np.random.default_rng(0).standard_normal((10000, 2))
    m = pca_fit(x)
    ref = np.linalg.eigvalsh(np.cov(x.T))[::-1]
    np.testing.assert_allclose(m.eigenvalues, ref, rtol=1e-10)
    assert m.eigenvalues[1] / m.eigenvalues[0] > 0.95


def test_pca_needs_two_rows():
    with pytest.raises(EmptyInputError):
        pca_fit(np.ones((1, 3)))


def test_pca_sign_convention():
    x = np.random.default_rng(3).standard_normal((40, 6))
    m = pca_fit(x)
    for c in m.components:
        assert c[np.argmax(np.abs(c))] > 0


def test_pca_matches_brute_force_5x5():
    x = np.random.default_rng(42).standard_normal((5, 5))
    m = pca_fit(x)
    w, v = brute_force_pca(x)
    assert m.n_components == 5
    np.testing.assert_allclose(m.eigenvalues, w, atol=1e-8)
    # five centered rows span at most four directions, so only four subspaces are defined
    for j in range(1, 5):
        assert np.max(principal_angles(m.components[:j], v[:j])) < 1e-6


def test_pca_k1_error_is_tail_eigenvalue_sum():
    x = np.random.default_rng(42).standard_normal((5, 5))
    m = pca_fit(x)
    w, _ = brute_force_pca(x)
    recon = pca_reconstruct(m, pca_project(m, x, 1), 1)
    err = np.sum((x - recon) ** 2) / (x.shape[0] - 1)
    assert err == pytest.approx(np.sum(w[1:]), abs=1e-8)


def test_pca_k_out_of_range(rank_one):
    m = pca_fit(rank_one)
    for k in (0, m.n_components + 1):
        with pytest.raises(RangeError):
            pca_project(m, rank_one, k)
        with pytest.raises(RangeError):
            pca_quality_table(m, rank_one, k)


def test_quality_table_rank_one(rank_one):
    rows = pca_quality_table(pca_fit(rank_one), rank_one, 1)
    assert rows[0]["k"] == 1
    assert rows[0]["variance_percent"] == pytest.approx(100.0, abs=1e-10)
    assert rows[0]["mean_cosine_distance"] <= 1e-8


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_pca_properties(x):
    if np.linalg.norm(x - x.mean(axis=0)) < 1e-3:
        return
    m = pca_fit(x)
    C = m.components
    np.testing.assert_allclose(C @ C.T, np.eye(C.shape[0]), atol=1e-8)
    assert np.all(np.diff(m.eigenvalues) <= 1e-9 * max(1.0, m.eigenvalues[0]))
    total = np.sum(np.var(x, axis=0, ddof=1))
    assert np.sum(m.eigenvalues) == pytest.approx(total, rel=1e-8, abs=1e-10)
    k = m.n_components
    back = pca_reconstruct(m, pca_project(m, x, k), k)
    np.testing.assert_allclose(back, x, rtol=1e-8, atol=1e-8 * max(1.0, np.abs(x).max()))


@settings(max_examples=100, deadline=None, derandomize=True)
@given(matrices(n_min=4, d_min=3))
def test_quality_table_monotone(x):
    if np.any(np.linalg.norm(x, axis=1) < 1e-2) or np.linalg.norm(x - x.mean(axis=0)) < 1e-3:
        return
    m = pca_fit(x)
    rows = pca_quality_table(m, x, m.n_components)
    var = [r["variance_percent"] for r in rows]
    dist = [r["mean_cosine_distance"] for r in rows]
    assert np.all(np.diff(var) >= -1e-9)
    assert var[-1] == pytest.approx(100.0, abs=1e-6)
    assert np.all(np.diff(dist) <= 1e-9)


def test_reconstruction_distance_falls_with_k():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((200, 16)) * np.linspace(3, 0.2, 16) + 1.0
    m = pca_fit(x)
    d = [r["mean_cosine_distance"] for r in pca_quality_table(m, x, 16)]
    assert np.all(np.diff(d) <= 1e-12)
