import gzip
import io
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from app.core import DatasetError
from app.imp import (
    COVTYPE_LABELS,
    DatasetSplit,
    LibSVMParseError,
    dataset_name,
    labels_for,
    load_dataset,
    load_dataset_pair,
    parse_libsvm,
    serialize_libsvm,
)
from tests import TestCase
from tests.factories import SyntheticDatasetFactory

# =============================================================================
# HELPERS
# =============================================================================

_SAMPLE = """\
# a comment line
+1 1:0.5 3:-2.0
-1 2:1

+1 3:0.25  # trailing comment
"""


# =============================================================================
# TEST CASES
# =============================================================================


class TestParseLibSVM(TestCase):
    """Tests for the ``parse_libsvm`` function."""

    def test_single_line(self) -> None:
        """Assert a line with gaps parses to a dense row with zeros."""
        dataset = parse_libsvm(["+1 1:0.5 3:-2.0"], expected_d=3)

        assert dataset.n == 1
        assert dataset.d == 3
        np.testing.assert_array_equal(dataset.labels, [1.0])
        np.testing.assert_array_equal(
            dataset.features.toarray(),
            [[0.5, 0.0, -2.0]],
        )

    def test_negative_label_maps_to_zero(self) -> None:
        """Assert ``-1`` maps to 0 and indices are stored zero-based."""
        dataset = parse_libsvm(["-1 2:1"], expected_d=5)

        np.testing.assert_array_equal(dataset.labels, [0.0])
        np.testing.assert_array_equal(
            dataset.features.toarray(),
            [[0.0, 1.0, 0.0, 0.0, 0.0]],
        )

    def test_rows_follow_the_data_lines(self) -> None:
        """
        Assert comments and blank lines are skipped, rows keep the order of
        the data lines and ``d`` defaults to the largest index.
        """
        dataset = parse_libsvm(io.StringIO(_SAMPLE), name="sample")

        assert dataset.name == "sample"
        assert dataset.split is DatasetSplit.TRAIN
        np.testing.assert_array_equal(dataset.labels, [1.0, 0.0, 1.0])
        np.testing.assert_array_equal(
            dataset.features.toarray(),
            [[0.5, 0.0, -2.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.25]],
        )

    def test_parse_errors_carry_the_line_number(self) -> None:
        """
        Assert malformed tokens, bad indices and unknown labels fail with the
        offending line number.
        """
        cases = {
            "+1 1:0.5\nx 1:1\n": 2,
            "+1 1:0.5\n-1 2\n": 2,
            "+1 2:1 1:1\n": 1,
            "+1 1:1 1:2\n": 1,
            "+1 0:1\n": 1,
            "+1 1:1\n\n+2 1:1\n": 3,
            "+1 1:a\n": 1,
        }
        for text, line_number in cases.items():
            with pytest.raises(LibSVMParseError) as exc_info:
                parse_libsvm(io.StringIO(text))

            assert exc_info.value.line_number == line_number
            assert exc_info.value.message.startswith(
                "Line %d: " % line_number,
            )

    def test_indices_beyond_the_dimension_fail(self) -> None:
        """Assert an index above ``expected_d`` is rejected."""
        with pytest.raises(LibSVMParseError, match="exceeds"):
            parse_libsvm(["+1 4:1"], expected_d=3)

    def test_empty_input_fails(self) -> None:
        """Assert a stream without data lines is a dataset error."""
        with pytest.raises(DatasetError, match="no data lines"):
            parse_libsvm(io.StringIO("# only a comment\n\n"))

    def test_covtype_labels(self) -> None:
        """Assert the covtype mapping sends 1 to 0 and 2 to 1."""
        dataset = parse_libsvm(
            ["1 1:3", "2 2:1"],
            label_map=COVTYPE_LABELS,
        )

        np.testing.assert_array_equal(dataset.labels, [0.0, 1.0])
        with pytest.raises(LibSVMParseError, match="not one of"):
            parse_libsvm(["-1 1:3"], label_map=COVTYPE_LABELS)


class TestSerializeLibSVM(TestCase):
    """Tests for the ``serialize_libsvm`` function."""

    def test_serialized_text_parses_back(self) -> None:
        """
        Assert that serializing a dataset and parsing the text again yields
        the same matrix and labels.
        """
        dataset = SyntheticDatasetFactory(n=40, d=9)
        dataset = type(dataset)(
            (dataset.features @ sp.diags(np.linspace(-1.0, 2.0, 9))).tocsr(),
            dataset.labels,
            dataset.name,
        )
        stream = io.StringIO()
        serialize_libsvm(dataset, stream)
        parsed = parse_libsvm(io.StringIO(stream.getvalue()), expected_d=9)

        assert (parsed.features != dataset.features).nnz == 0
        np.testing.assert_array_equal(parsed.labels, dataset.labels)

    def test_rows_without_features(self) -> None:
        """Assert an empty row is written as a bare label."""
        dataset = parse_libsvm(["-1", "+1 1:2"], expected_d=1)
        stream = io.StringIO()
        serialize_libsvm(dataset, stream)

        assert stream.getvalue() == "-1\n+1 1:2.0\n"


def test_dataset_names_and_label_maps() -> None:
    """Assert names drop the known suffixes and covtype is detected."""
    assert dataset_name(Path("data/a9a.t")) == "a9a"
    assert dataset_name(Path("ijcnn1.txt.gz")) == "ijcnn1"
    assert dataset_name(Path("covtype.libsvm.binary")) == (
        "covtype.libsvm.binary"
    )
    assert labels_for("covtype.libsvm.binary") is COVTYPE_LABELS
    assert labels_for("a9a") is not COVTYPE_LABELS


def test_load_dataset_files(tmp_path: Path) -> None:
    """
    Assert plain and gzip files load the same rows and that a test file
    with a larger index widens both splits.
    """
    (tmp_path / "toy").write_text("+1 1:0.5 3:-2.0\n-1 2:1\n")
    with gzip.open(tmp_path / "toy.gz", "wt", encoding="utf-8") as stream:
        stream.write("+1 1:0.5 3:-2.0\n-1 2:1\n")
    (tmp_path / "toy.t").write_text("-1 5:1\n")

    plain = load_dataset(tmp_path / "toy")
    packed = load_dataset(tmp_path / "toy.gz")
    train, test = load_dataset_pair(tmp_path / "toy", tmp_path / "toy.t")

    assert plain.name == packed.name == "toy"
    assert (plain.features != packed.features).nnz == 0
    assert train.d == test.d == 5
    assert test.split is DatasetSplit.TEST
    np.testing.assert_array_equal(
        train.features.toarray()[:, :3],
        plain.features.toarray(),
    )
    assert load_dataset_pair(tmp_path / "toy")[1] is None


def test_missing_files_fail(tmp_path: Path) -> None:
    """Assert a missing file is reported as a dataset error."""
    with pytest.raises(DatasetError, match="Could not read"):
        load_dataset(tmp_path / "missing")


def test_undecodable_bytes_fail_with_the_line_number(tmp_path: Path) -> None:
    """
    Assert a byte that is not valid UTF-8 is reported as a parse error on
    its line, for plain and gzipped files alike.
    """
    content = b"+1 1:0.5\n\n-1 2:\xff\n"
    (tmp_path / "bad").write_bytes(content)
    with gzip.open(tmp_path / "bad.gz", "wb") as stream:
        stream.write(content)

    for path in (tmp_path / "bad", tmp_path / "bad.gz"):
        with pytest.raises(LibSVMParseError, match="0xff") as exp_info:
            load_dataset(path)

        assert exp_info.value.line_number == 3
        assert isinstance(exp_info.value, DatasetError)


def test_corrupt_gzip_files_fail(tmp_path: Path) -> None:
    """Assert a file that is not gzip data is reported as a dataset error."""
    (tmp_path / "toy.gz").write_bytes(b"+1 1:0.5\n")

    with pytest.raises(DatasetError, match="Could not read"):
        load_dataset(tmp_path / "toy.gz")
