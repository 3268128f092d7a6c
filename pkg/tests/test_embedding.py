import numpy as np
import pytest

from gralign import (
    DegenerateInputError,
    FeatureMatrix,
    ParameterError,
    ParseError,
    SimilarityMatrix,
    cosine_similarity_matrix,
    pca_reduce,
    read_similarity_file,
    write_similarity_file,
)
from gralign.generators import generate_geo, rewire
from gralign.graphlets import count_orbits


def random_gdvs(n, seed):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 50, size=(n, 15)).astype(np.int64)


def test_pca_rank_two_input_gives_two_components():
    rng = np.random.default_rng(0)
    basis = rng.normal(size=(2, 15))
    coeffs = rng.normal(size=(40, 2))
    data = coeffs @ basis + rng.normal(size=15)  # 2D affine subspace
    f1, f2 = pca_reduce(data[:25], data[25:])
    assert f1.dim == 2 and f2.dim == 2
    # two components explain everything: projection preserves distances
    joint = np.vstack([data[:25], data[25:]])
    proj = np.vstack([f1.rows, f2.rows])
    d_in = np.linalg.norm(joint[:, None] - joint[None], axis=2)
    d_out = np.linalg.norm(proj[:, None] - proj[None], axis=2)
    assert np.allclose(d_in, d_out)


def test_pca_isotropic_input_needs_fourteen_components():
    # equal variance in all 15 directions: smallest r with r/15 >= 0.9 is 14
    data = np.vstack([np.eye(15), -np.eye(15)])
    f1, f2 = pca_reduce(data[:15], data[15:])
    assert f1.dim == 14


def test_pca_full_rank_projection_preserves_distances():
    gdv1, gdv2 = random_gdvs(20, 1), random_gdvs(13, 2)
    f1, f2 = pca_reduce(gdv1, gdv2, variance_threshold=1.0)
    joint = np.vstack([gdv1, gdv2]).astype(float)
    proj = np.vstack([f1.rows, f2.rows])
    d_in = np.linalg.norm(joint[:, None] - joint[None], axis=2)
    d_out = np.linalg.norm(proj[:, None] - proj[None], axis=2)
    assert np.allclose(d_in, d_out)


def test_pca_reconstruction_error_within_variance_budget():
    g = generate_geo(1000, 6000, seed=4)
    pair = rewire(g, 10, seed=7)
    gdv1 = count_orbits(pair.original)
    gdv2 = count_orbits(pair.noisy)
    f1, f2 = pca_reduce(gdv1, gdv2, variance_threshold=0.90)
    joint = np.vstack([gdv1, gdv2]).astype(float)
    centered = joint - joint.mean(axis=0)
    proj = np.vstack([f1.rows, f2.rows])
    # explained-variance identity: residual energy is what the components miss
    residual = (centered**2).sum() - (proj**2).sum()
    assert residual <= 0.10 * (centered**2).sum() + 1e-9


def test_pca_zero_variance_is_degenerate():
    data = np.ones((10, 15))
    with pytest.raises(DegenerateInputError, match="raw GDV"):
        pca_reduce(data[:5], data[5:])


def test_pca_parameter_errors():
    with pytest.raises(ParameterError):
        pca_reduce(np.zeros((1, 15)), np.zeros((1, 15)))  # fewer than 3 rows
    with pytest.raises(ParameterError):
        pca_reduce(np.zeros((5, 15)), np.zeros((5, 14)))


def test_pca_log_transform_changes_projection():
    gdv1, gdv2 = random_gdvs(30, 3), random_gdvs(30, 4)
    a1, _ = pca_reduce(gdv1, gdv2)
    b1, _ = pca_reduce(gdv1, gdv2, log_transform=True)
    assert a1.rows.shape[0] == b1.rows.shape[0]
    assert not np.allclose(a1.rows[:, 0], b1.rows[:, 0])


def test_cosine_basic_values():
    f1 = FeatureMatrix(np.array([[1.0, 2.0], [0.0, 1.0], [1.0, 0.0], [0.0, 0.0]]))
    f2 = FeatureMatrix(np.array([[2.0, 4.0], [-1.0, -2.0], [1.0, 0.0]]))
    sim = cosine_similarity_matrix(f1, f2)
    assert sim.values[0, 0] == pytest.approx(1.0)  # identical direction
    assert sim.values[0, 1] == pytest.approx(0.0)  # antiparallel
    assert sim.values[1, 2] == pytest.approx(0.5)  # orthogonal
    assert sim.values[3, 0] == pytest.approx(0.5)  # zero vector -> cosine 0


def test_cosine_scale_invariance():
    rng = np.random.default_rng(5)
    rows1 = rng.normal(size=(6, 4))
    rows2 = rng.normal(size=(5, 4))
    base = cosine_similarity_matrix(FeatureMatrix(rows1), FeatureMatrix(rows2))
    scaled = rows1.copy()
    scaled[2] *= 37.5
    out = cosine_similarity_matrix(FeatureMatrix(scaled), FeatureMatrix(rows2))
    assert np.allclose(base.values, out.values)


def test_cosine_self_similarity_symmetric_unit_diagonal():
    rng = np.random.default_rng(6)
    f = FeatureMatrix(rng.normal(size=(8, 5)))
    sim = cosine_similarity_matrix(f, f).values
    assert np.allclose(sim, sim.T)
    assert np.allclose(np.diag(sim), 1.0)


def test_cosine_output_bounds():
    rng = np.random.default_rng(7)
    f1 = FeatureMatrix(rng.normal(size=(20, 3)) * 1e6)
    f2 = FeatureMatrix(rng.normal(size=(20, 3)) * 1e-6)
    values = cosine_similarity_matrix(f1, f2).values
    assert values.min() >= 0.0 and values.max() <= 1.0


def test_cosine_dimension_mismatch():
    with pytest.raises(ParameterError):
        cosine_similarity_matrix(
            FeatureMatrix(np.zeros((2, 3))), FeatureMatrix(np.zeros((2, 4)))
        )


def test_similarity_file_example():
    sm = read_similarity_file("a x 1.0\na y 0.25", row_labels=("a",), col_labels=("x", "y"))
    assert sm.values.tolist() == [[1.0, 0.25]]


def test_similarity_file_missing_pairs_default_zero():
    sm = read_similarity_file("a x 0.5", row_labels=("a", "b"), col_labels=("x", "y"))
    assert sm.values.tolist() == [[0.5, 0.0], [0.0, 0.0]]


def test_similarity_file_round_trip():
    rng = np.random.default_rng(8)
    values = rng.random((10, 10))
    labels1 = tuple(f"u{i}" for i in range(10))
    labels2 = tuple(f"v{i}" for i in range(10))
    sm = SimilarityMatrix(values, labels1, labels2)
    text = write_similarity_file(sm)
    back = read_similarity_file(text, labels1, labels2)
    assert (back.values == values).all()
    # SANA simFormat 1: exactly 3 whitespace-separated columns per line
    assert all(len(line.split()) == 3 for line in text.splitlines())
    assert len(text.splitlines()) == 100


def test_similarity_file_infers_labels_in_appearance_order():
    sm = read_similarity_file("b x 0.1\na x 0.2\na y 0.3")
    assert sm.row_labels == ("b", "a")
    assert sm.col_labels == ("x", "y")


def test_similarity_file_errors():
    with pytest.raises(ParseError, match="line 1"):
        read_similarity_file("a x 1.5")
    with pytest.raises(ParseError, match="line 2"):
        read_similarity_file("a x 0.5\na x\n")
    with pytest.raises(ParseError, match="line 1"):
        read_similarity_file("a x nope")
    with pytest.raises(ParseError, match="unknown node"):
        read_similarity_file("q x 0.5", row_labels=("a",), col_labels=("x",))
    with pytest.raises(ParseError):
        read_similarity_file("# only comments\n")


def test_similarity_matrix_validates_range():
    with pytest.raises(ParameterError):
        SimilarityMatrix(np.array([[1.5]]), ("a",), ("x",))
    with pytest.raises(ParameterError):
        SimilarityMatrix(np.array([[np.nan]]), ("a",), ("x",))
