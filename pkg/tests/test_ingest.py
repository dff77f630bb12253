from __future__ import annotations

import numpy as np
import pytest
from conftest import DATA

from adaptdim.errors import InputError
from adaptdim.ingest import read_labels, read_query_distances, read_sample, write_points
from adaptdim.metric import from_points


def test_points_csv_with_labels(write_csv) -> None:
    path = write_csv("pts.csv", "id,x1,x2,label\na,0,0,-1\nb,3,4,1\n")
    sample = read_sample(path)
    assert sample.ids == ("a", "b")
    assert sample.coords is not None
    assert sample.distances[0, 1] == pytest.approx(5.0)
    assert sample.labels.tolist() == [-1, 1]


def test_matrix_csv_is_auto_detected(write_csv) -> None:
    path = write_csv("m.csv", "id,a,b,c\na,0,1,2\nb,1,0,1\nc,2,1,0\n")
    sample = read_sample(path)
    assert sample.coords is None
    assert sample.distances[0, 2] == 2.0


def test_labels_file_is_joined_by_id(write_csv) -> None:
    pts = write_csv("pts.csv", "id,x1\na,0\nb,1\n")
    labels = write_csv("labels.csv", "id,label\nb,1\na,-1\n")
    sample = read_sample(pts, labels_path=labels)
    assert sample.labels.tolist() == [-1, 1]


def test_missing_label_is_an_input_error(write_csv) -> None:
    pts = write_csv("pts.csv", "id,x1\na,0\nb,1\n")
    labels = write_csv("labels.csv", "id,label\na,-1\n")
    with pytest.raises(InputError, match="no label"):
        read_sample(pts, labels_path=labels)


def test_bad_label_value(write_csv) -> None:
    path = write_csv("labels.csv", "id,label\na,0\n")
    with pytest.raises(InputError, match="label must be -1 or \\+1"):
        read_labels(path)


def test_ragged_points_row(write_csv) -> None:
    path = write_csv("pts.csv", "id,x1,x2\na,0,0\nb,1\n")
    with pytest.raises(InputError, match="expected 3 columns"):
        read_sample(path)


def test_non_numeric_coordinate(write_csv) -> None:
    path = write_csv("pts.csv", "id,x1\na,zero\n")
    with pytest.raises(InputError, match="not a number"):
        read_sample(path)


def test_duplicate_ids(write_csv) -> None:
    path = write_csv("pts.csv", "id,x1\na,0\na,1\n")
    with pytest.raises(InputError, match="duplicate id"):
        read_sample(path)


def test_matrix_header_must_match_rows(write_csv) -> None:
    path = write_csv("m.csv", "id,a,b\nb,0,1\na,1,0\n")
    with pytest.raises(InputError, match="malformed distances"):
        read_sample(path, fmt="matrix")


def test_empty_file(write_csv) -> None:
    path = write_csv("empty.csv", "\n")
    with pytest.raises(InputError, match="empty sample"):
        read_sample(path)


def test_header_only_file(write_csv) -> None:
    path = write_csv("pts.csv", "id,x1\n")
    with pytest.raises(InputError, match="empty sample"):
        read_sample(path)


def test_write_points_reads_back(tmp_path) -> None:
    sample = from_points(["u", "v"], np.array([[0.5, 1.0], [2.0, -1.0]]), np.array([1, -1]))
    path = tmp_path / "out.csv"
    write_points(path, sample)
    again = read_sample(path)
    assert again.ids == sample.ids
    assert np.array_equal(again.coords, sample.coords)
    assert again.labels.tolist() == [1, -1]


def test_bundled_segment_has_eight_points() -> None:
    sample = read_sample(DATA / "seg8.csv")
    assert sample.n == 8
    assert sample.diameter() == pytest.approx(1.0)


def test_query_distances_are_reordered_to_anchors(write_csv) -> None:
    path = write_csv("q.csv", "id,b,a\nq1,2,1\nq2,0.5,3\n")
    ids, matrix = read_query_distances(path, ("a", "b"))
    assert ids == ["q1", "q2"]
    assert matrix.tolist() == [[1.0, 2.0], [3.0, 0.5]]


def test_query_distances_need_every_anchor(write_csv) -> None:
    path = write_csv("q.csv", "id,a\nq1,1\n")
    with pytest.raises(InputError, match="no distance column"):
        read_query_distances(path, ("a", "b"))


def test_query_distances_must_be_non_negative(write_csv) -> None:
    path = write_csv("q.csv", "id,a\nq1,-1\n")
    with pytest.raises(InputError, match="malformed distances"):
        read_query_distances(path, ("a",))
