from __future__ import annotations

import json

import numpy as np
import pytest

from grayhilbert.ingest import (
    AttributeSpec,
    encode_categorical,
    load_csv,
    normalize_numeric,
    parse_attribute_specs,
)


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


CSV_BASIC = "x,y,species\n0.5,2,oak\n1.5,4,\n2.5,6,pine\n"


class TestLoadCsv:
    def test_drop_missing_rows(self, tmp_path):
        path = write(tmp_path, CSV_BASIC)
        specs = [AttributeSpec("x"), AttributeSpec("y"), AttributeSpec("species", "categorical")]
        cloud, report = load_csv(path, specs)
        assert len(cloud) == 2
        assert report.rows_read == 3
        assert report.rows_dropped == 1
        assert report.rows_read == report.rows_kept + report.rows_dropped
        assert cloud.ids.tolist() == [0, 2]  # original row ordinals survive

    def test_impute_zero_keeps_rows(self, tmp_path):
        path = write(tmp_path, CSV_BASIC)
        specs = [AttributeSpec("x"), AttributeSpec("species", "categorical")]
        cloud, report = load_csv(path, specs, missing_policy="impute-zero")
        assert len(cloud) == 3
        assert report.rows_dropped == 0
        assert cloud.points[1, 1] == 0.0

    def test_constant_column_normalizes_to_zero(self, tmp_path):
        path = write(tmp_path, "a,b\n5,1\n5,2\n5,3\n")
        cloud, report = load_csv(path, [AttributeSpec("a"), AttributeSpec("b")])
        assert (cloud.points[:, 0] == 0.0).all()
        assert report.numeric_bounds["a"] == (5.0, 5.0)

    def test_affine_normalization(self, tmp_path):
        path = write(tmp_path, "v\n2\n4\n6\n")
        cloud, _ = load_csv(path, [AttributeSpec("v")])
        col = cloud.points[:, 0]
        assert col[0] == 0.0
        assert np.isclose(col[1], 0.5)
        assert 0.999999999 < col[2] < 1.0

    def test_deterministic_reingest(self, tmp_path):
        path = write(tmp_path, CSV_BASIC)
        specs = [AttributeSpec("x"), AttributeSpec("species", "categorical")]
        a, _ = load_csv(path, specs, seed=9)
        b, _ = load_csv(path, specs, seed=9)
        assert a.points.tobytes() == b.points.tobytes()
        assert (a.ids == b.ids).all()

    def test_missing_column_named_in_error(self, tmp_path):
        path = write(tmp_path, CSV_BASIC)
        with pytest.raises(ValueError, match="height"):
            load_csv(path, [AttributeSpec("x"), AttributeSpec("height")])

    def test_unparsable_numeric_reports_line(self, tmp_path):
        path = write(tmp_path, "x\n1.5\nbroken\n")
        with pytest.raises(ValueError, match="line 3"):
            load_csv(path, [AttributeSpec("x")])

    def test_dates_become_days_since_epoch(self, tmp_path):
        path = write(tmp_path, "when\n1970-01-01\n1970-01-03\n1970-01-02\n")
        cloud, report = load_csv(path, [AttributeSpec("when", "date")])
        assert report.numeric_bounds["when"] == (0.0, 2.0)
        assert np.isclose(cloud.points[2, 0], 0.5)
        assert report.distinct_values["when"] == 3

    def test_delimiter_and_report_json(self, tmp_path):
        path = write(tmp_path, "x;y\n1;2\n3;4\n")
        cloud, report = load_csv(path, [AttributeSpec("x"), AttributeSpec("y")], delimiter=";")
        assert len(cloud) == 2
        doc = json.loads(report.to_json())
        assert doc["rows_kept"] == 2 and doc["columns"] == ["x", "y"]

    def test_empty_result_is_an_error(self, tmp_path):
        path = write(tmp_path, "x\n\n\n")
        with pytest.raises(ValueError, match="no usable rows"):
            load_csv(path, [AttributeSpec("x")])

    def test_duplicate_selection_rejected(self, tmp_path):
        path = write(tmp_path, "x\n1\n")
        with pytest.raises(ValueError, match="distinct"):
            load_csv(path, [AttributeSpec("x"), AttributeSpec("x")])


class TestNormalizeNumeric:
    def test_affine_map(self):
        out = normalize_numeric([2.0, 4.0, 6.0], 2.0, 6.0)
        assert out[0] == 0.0 and np.isclose(out[1], 0.5) and out[2] < 1.0

    def test_degenerate(self):
        assert normalize_numeric([5.0], 5.0, 5.0).tolist() == [0.0]

    def test_near_identity(self):
        out = normalize_numeric([0.0, 0.5, 0.999], 0.0, 0.999)
        assert np.allclose(out, [0.0, 0.5004999, 0.999], atol=1e-3)
        assert out.max() < 1.0

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            normalize_numeric([1.0], 2.0, 1.0)


class TestEncodeCategorical:
    def test_deterministic_per_seed_value(self):
        a, _ = encode_categorical(["oak", "pine", "oak"], seed=4)
        b, _ = encode_categorical(["oak", "pine", "oak"], seed=4)
        assert a.tolist() == b.tolist()
        assert a[0] == a[2] != a[1]

    def test_distinct_values_distinct_codes(self):
        values = [f"species-{i}" for i in range(325)]
        coded, table = encode_categorical(values, seed=1)
        assert len(table) == 325
        assert len(set(coded.tolist())) == 325
        assert all(0.0 <= c < 1.0 for c in table.values())

    def test_seed_changes_table(self):
        _, t1 = encode_categorical(["a", "b"], seed=1)
        _, t2 = encode_categorical(["a", "b"], seed=2)
        assert t1 != t2


class TestAttributeSpecs:
    def test_parser(self):
        specs = parse_attribute_specs("x, y ,species:categorical,when:date")
        assert [s.name for s in specs] == ["x", "y", "species", "when"]
        assert [s.kind for s in specs] == ["numeric", "numeric", "categorical", "date"]

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            AttributeSpec("x", "boolean")
