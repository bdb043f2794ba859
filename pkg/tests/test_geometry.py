"""Embeddings, cosine similarity, and the binary embedding file format."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idsel.errors import FormatError, ValidationError
from idsel.geometry import (
    MAGIC,
    EmbeddingSet,
    cosine,
    load_embeddings,
    save_embeddings,
    similarity_matrix,
)


def unit_vectors():
    return st.lists(
        st.floats(min_value=-5, max_value=5, allow_nan=False),
        min_size=3,
        max_size=3,
    ).filter(lambda v: sum(x * x for x in v) > 1e-6)


def test_cosine_basic_angles():
    assert cosine([1, 0], [0, 1]) == pytest.approx(0.0)
    assert cosine([1, 0], [1, 0]) == pytest.approx(1.0)
    assert cosine([1, 0], [-1, 0]) == pytest.approx(-1.0)


def test_cosine_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        cosine([1, 0], [1, 0, 0])
    with pytest.raises(ValidationError):
        cosine([0, 0], [1, 0])


@given(unit_vectors(), unit_vectors())
@settings(max_examples=100)
def test_cosine_symmetric_and_bounded(a, b):
    s = cosine(a, b)
    assert -1.0 - 1e-9 <= s <= 1.0 + 1e-9
    assert cosine(b, a) == pytest.approx(s)


def test_embedding_set_validation():
    with pytest.raises(ValidationError):
        EmbeddingSet(["a"], np.zeros((1, 3), dtype=np.float32))  # zero vector
    with pytest.raises(ValidationError):
        EmbeddingSet(
            ["a", "a"], np.ones((2, 3), dtype=np.float32)
        )  # duplicate ids
    with pytest.raises(ValidationError):
        EmbeddingSet(["a"], np.array([[np.nan, 1, 2]], dtype=np.float32))
    with pytest.raises(ValidationError):
        EmbeddingSet(["a", "b"], np.ones((1, 3), dtype=np.float32))


def test_embedding_set_lookup(tiny_embeddings):
    ids = tiny_embeddings.ids()
    vec = tiny_embeddings.vector(ids[0])
    assert vec.shape == (6,)
    rows = tiny_embeddings.rows_for(ids[:3])
    assert rows.shape == (3, 6)
    assert rows.dtype == np.float64
    with pytest.raises(ValidationError):
        tiny_embeddings.vector("missing")


def test_similarity_matrix_properties(tiny_embeddings):
    ids = sorted(tiny_embeddings.ids())
    sim = similarity_matrix(tiny_embeddings, ids)
    assert sim.values.shape == (5, 5)
    assert np.array_equal(sim.values, sim.values.T)
    assert np.all(np.diagonal(sim.values) == 1.0)
    assert np.all(sim.values <= 1.0 + 1e-12) and np.all(sim.values >= -1.0 - 1e-12)
    v = sim.value(ids[0], ids[2])
    assert v == pytest.approx(
        cosine(tiny_embeddings.vector(ids[0]), tiny_embeddings.vector(ids[2])),
        abs=1e-6,
    )
    block = sim.submatrix([ids[2], ids[0]])
    assert block[0, 1] == sim.value(ids[2], ids[0])
    with pytest.raises(ValidationError):
        sim.submatrix(["nope"])


def test_embeddings_file_round_trip(tmp_path, tiny_embeddings):
    path = tmp_path / "emb.bin"
    save_embeddings(tiny_embeddings, path)
    loaded = load_embeddings(path)
    assert loaded.ids() == tiny_embeddings.ids()
    assert np.array_equal(loaded.matrix, tiny_embeddings.matrix)


def test_embeddings_file_unicode_ids(tmp_path):
    emb = EmbeddingSet.from_mapping(
        {"näive-βeta": np.array([1.0, 2.0], dtype=np.float32)}
    )
    path = tmp_path / "emb.bin"
    save_embeddings(emb, path)
    assert load_embeddings(path).ids() == ["näive-βeta"]


def test_embeddings_file_rejects_bad_magic(tmp_path):
    path = tmp_path / "emb.bin"
    path.write_bytes(b"NOTMAG" + struct.pack("<II", 1, 2) + b"\x00" * 12)
    with pytest.raises(FormatError, match="magic"):
        load_embeddings(path)


def test_embeddings_file_rejects_truncation_and_trailing(tmp_path, tiny_embeddings):
    path = tmp_path / "emb.bin"
    save_embeddings(tiny_embeddings, path)
    blob = path.read_bytes()
    path.write_bytes(blob[:-3])
    with pytest.raises(FormatError, match="truncated"):
        load_embeddings(path)
    path.write_bytes(blob + b"xx")
    with pytest.raises(FormatError, match="trailing"):
        load_embeddings(path)


def test_embeddings_header_is_little_endian_counts(tmp_path, tiny_embeddings):
    path = tmp_path / "emb.bin"
    save_embeddings(tiny_embeddings, path)
    blob = path.read_bytes()
    assert blob[:6] == MAGIC
    count, dim = struct.unpack_from("<II", blob, 6)
    assert count == len(tiny_embeddings.ids())
    assert dim == tiny_embeddings.matrix.shape[1]
