"""Embedding store: formats round-trip bit-exactly and violations raise typed errors."""

import struct
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from langsim.errors import (
    CellParseError,
    DimensionMismatchError,
    DuplicateLanguageError,
    MalformedHeaderError,
    ManifestFormatError,
    MissingLanguageFileError,
    NonFiniteValueError,
    ProbabilityRangeError,
    RaggedRowsError,
    RowSumError,
    StoreError,
)
from langsim.store import (
    EmbeddingSet,
    LanguageManifest,
    ManifestEntry,
    ProbabilityMatrix,
    import_csv,
    load_embeddings,
    load_manifest,
    load_probability_matrix,
    peek_embedding_header,
    save_embeddings,
    save_manifest,
)


def _write(tmp_path, name, data: bytes):
    path = tmp_path / name
    path.write_bytes(data)
    return path


class TestEmbeddingSet:
    def test_basic_shape(self):
        emb = EmbeddingSet("lat", [[1.0, 0.0], [0.0, 1.0]])
        assert emb.count == 2
        assert emb.dim == 2
        assert emb.vectors.dtype == np.float32

    def test_rejects_nan_with_position(self):
        rows = np.zeros((4, 3), dtype=np.float32)
        rows[3, 0] = np.nan
        with pytest.raises(NonFiniteValueError) as err:
            EmbeddingSet("lat", rows)
        assert (err.value.row, err.value.col) == (3, 0)

    def test_rejects_empty_and_wrong_ndim(self):
        with pytest.raises(DimensionMismatchError):
            EmbeddingSet("lat", np.zeros((0, 3)))
        with pytest.raises(DimensionMismatchError):
            EmbeddingSet("lat", np.zeros(3))

    def test_immutable(self):
        emb = EmbeddingSet("lat", [[1.0, 2.0]])
        with pytest.raises(ValueError):
            emb.vectors[0, 0] = 5.0


class TestBinaryFormat:
    def test_round_trip_identity(self, tmp_path):
        emb = EmbeddingSet("lat", [[1.0, 0.0], [0.0, 1.0]])
        path = tmp_path / "lat.emb"
        save_embeddings(emb, path)
        back = load_embeddings(path, language="lat")
        assert np.array_equal(back.vectors, emb.vectors)
        assert back.language == "lat"

    @given(
        arrays(
            np.float32,
            st.tuples(st.integers(1, 7), st.integers(1, 5)),
            elements=st.floats(-1e6, 1e6, width=32),
        )
    )
    def test_round_trip_any_matrix(self, matrix):
        emb = EmbeddingSet("x", matrix)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "x.emb"
            save_embeddings(emb, path)
            back = load_embeddings(path)
        assert np.array_equal(back.vectors, emb.vectors)

    def test_byte_layout_of_single_value(self, tmp_path):
        # header (12 bytes) + one float32 payload value
        path = tmp_path / "one.emb"
        save_embeddings(EmbeddingSet("x", [[0.5]]), path)
        blob = path.read_bytes()
        assert len(blob) == 12 + 4
        assert blob[:4] == b"EMB1"
        assert struct.unpack("<II", blob[4:12]) == (1, 1)
        assert struct.unpack("<f", blob[12:]) == (0.5,)

    def test_serialization_is_byte_stable(self, tmp_path):
        emb = EmbeddingSet("x", [[1.5, -2.25], [3.0, 0.125]])
        save_embeddings(emb, tmp_path / "a.emb")
        save_embeddings(emb, tmp_path / "b.emb")
        assert (tmp_path / "a.emb").read_bytes() == (tmp_path / "b.emb").read_bytes()

    def test_header_example_payload(self, tmp_path):
        blob = b"EMB1" + struct.pack("<II", 2, 2) + struct.pack("<4f", 1, 0, 0, 1)
        emb = load_embeddings(_write(tmp_path, "x.emb", blob))
        assert emb.dim == 2
        assert np.array_equal(emb.vectors, np.array([[1, 0], [0, 1]], dtype=np.float32))

    def test_bad_magic(self, tmp_path):
        with pytest.raises(MalformedHeaderError):
            load_embeddings(_write(tmp_path, "x.emb", b"XXXX" + b"\0" * 12))

    def test_short_file(self, tmp_path):
        with pytest.raises(MalformedHeaderError):
            load_embeddings(_write(tmp_path, "x.emb", b"EMB1\x01"))

    def test_truncated_payload(self, tmp_path):
        blob = b"EMB1" + struct.pack("<II", 2, 2) + struct.pack("<3f", 1, 0, 0)
        with pytest.raises(DimensionMismatchError):
            load_embeddings(_write(tmp_path, "x.emb", blob))

    def test_trailing_bytes(self, tmp_path):
        blob = b"EMB1" + struct.pack("<II", 1, 1) + struct.pack("<f", 1) + b"junk"
        with pytest.raises(DimensionMismatchError):
            load_embeddings(_write(tmp_path, "x.emb", blob))

    def test_nan_position_reported(self, tmp_path):
        values = np.zeros((4, 2), dtype="<f4")
        values[3, 0] = np.nan
        blob = b"EMB1" + struct.pack("<II", 2, 4) + values.tobytes()
        with pytest.raises(NonFiniteValueError) as err:
            load_embeddings(_write(tmp_path, "x.emb", blob))
        assert (err.value.row, err.value.col) == (3, 0)

    def test_save_to_unwritable_path(self, tmp_path):
        emb = EmbeddingSet("x", [[1.0]])
        with pytest.raises(OSError):
            save_embeddings(emb, tmp_path / "missing-dir" / "x.emb")

    def test_peek_header(self, tmp_path):
        path = tmp_path / "x.emb"
        save_embeddings(EmbeddingSet("x", np.ones((5, 3), dtype=np.float32)), path)
        assert peek_embedding_header(path) == (3, 5)


class TestCsvImport:
    def test_simple(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n")
        emb = import_csv(path, "lat")
        assert np.array_equal(emb.vectors, np.array([[1, 2], [3, 4]], dtype=np.float32))

    def test_ragged(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(RaggedRowsError):
            import_csv(path, "lat")

    def test_parse_failure_position(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("1.0,abc\n")
        with pytest.raises(CellParseError) as err:
            import_csv(path, "lat")
        assert (err.value.row, err.value.col) == (0, 1)

    def test_non_finite_cell_rejected(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("1.0,inf\n")
        with pytest.raises(CellParseError):
            import_csv(path, "lat")

    def test_empty_csv(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("")
        with pytest.raises(StoreError):
            import_csv(path, "lat")


class TestProbabilityMatrix:
    def test_valid(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("lat,mri\n0.7,0.3\n")
        probs = load_probability_matrix(path)
        assert probs.vocabulary == ("lat", "mri")
        assert probs.count == 1

    def test_row_sum_violation(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("lat,mri\n0.7,0.7\n")
        with pytest.raises(RowSumError) as err:
            load_probability_matrix(path)
        assert err.value.row == 0
        assert err.value.total == pytest.approx(1.4)

    def test_duplicate_code(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("lat,lat\n0.5,0.5\n")
        with pytest.raises(DuplicateLanguageError):
            load_probability_matrix(path)

    def test_out_of_range_entry(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("lat,mri\n1.2,-0.2\n")
        with pytest.raises(ProbabilityRangeError):
            load_probability_matrix(path)

    def test_single_column_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("lat\n1.0\n")
        with pytest.raises(StoreError):
            load_probability_matrix(path)

    def test_row_sum_within_tolerance_accepted(self):
        ProbabilityMatrix(("a", "b"), [[0.50004, 0.5]])
        with pytest.raises(RowSumError):
            ProbabilityMatrix(("a", "b"), [[0.5002, 0.5]])


class TestManifest:
    def _catalog(self, tmp_path):
        save_embeddings(EmbeddingSet("qry", np.ones((3, 2), dtype=np.float32)), tmp_path / "q.emb")
        save_embeddings(EmbeddingSet("lat", np.ones((4, 2), dtype=np.float32)), tmp_path / "l.emb")
        (tmp_path / "cat.txt").write_text("#query qry\nqry\tq.emb\nlat\tl.emb\n")
        return tmp_path / "cat.txt"

    def test_load(self, tmp_path):
        manifest = load_manifest(self._catalog(tmp_path))
        assert manifest.query_language == "qry"
        assert manifest.languages == ("qry", "lat")
        assert manifest.target_languages == ("lat",)
        assert [e.count for e in manifest.entries] == [3, 4]
        emb = manifest.load_set("lat")
        assert emb.language == "lat"
        assert emb.count == 4

    def test_round_trip(self, tmp_path):
        manifest = load_manifest(self._catalog(tmp_path))
        save_manifest(manifest, tmp_path / "copy.txt")
        again = load_manifest(tmp_path / "copy.txt")
        assert again.query_language == manifest.query_language
        assert again.languages == manifest.languages

    def test_missing_query_line(self, tmp_path):
        (tmp_path / "bad.txt").write_text("qry\tq.emb\n")
        with pytest.raises(ManifestFormatError):
            load_manifest(tmp_path / "bad.txt")

    def test_query_without_entry(self, tmp_path):
        (tmp_path / "bad.txt").write_text("#query zzz\nqry\tq.emb\n")
        with pytest.raises(ManifestFormatError):
            load_manifest(tmp_path / "bad.txt")

    def test_duplicate_entry(self, tmp_path):
        (tmp_path / "bad.txt").write_text("#query a\na\tx.emb\na\ty.emb\n")
        with pytest.raises(DuplicateLanguageError):
            load_manifest(tmp_path / "bad.txt")

    def test_missing_file_on_load_set(self, tmp_path):
        (tmp_path / "cat.txt").write_text("#query a\na\tnowhere.emb\n")
        manifest = load_manifest(tmp_path / "cat.txt")
        assert manifest.entries[0].count is None
        with pytest.raises(MissingLanguageFileError):
            manifest.load_set("a")

    def test_entries_validated_in_constructor(self):
        with pytest.raises(ManifestFormatError):
            LanguageManifest("q", (ManifestEntry("a", "a.emb"),))
