"""Tests for run artifact writers and the run manifest."""

import json
from pathlib import Path

import numpy as np
import pytest

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.outputs import (
    FIELD_COLUMNS,
    MANIFEST_NAME,
    SERIES_COLUMNS,
    OutputManager,
    SeriesWriter,
    jsonable,
    load_manifest,
    read_csv,
    verified_path,
    write_csv,
    write_json,
)
from thermo_homogenization.utils import calculate_sha256


class TestJson:
    """Tests for JSON conversion and writing."""

    def test_jsonable_converts_numpy_and_paths(self):
        data = {
            "a": np.array([[1.0, 2.0]]),
            "b": np.int64(3),
            "c": (np.float32(0.5), Path("x/y")),
            4: None,
        }
        assert jsonable(data) == {"a": [[1.0, 2.0]], "b": 3, "c": [0.5, "x/y"], "4": None}
        assert isinstance(jsonable(np.int64(3)), int)

    def test_write_json_atomic(self, tmp_path):
        path = write_json(tmp_path / "sub" / "data.json", {"z": 1, "a": np.arange(2)})
        assert json.loads(path.read_text()) == {"a": [0, 1], "z": 1}
        assert not (tmp_path / "sub" / "data.json.tmp").exists()

    def test_write_json_sorted_and_stable(self, tmp_path):
        first = write_json(tmp_path / "a.json", {"b": 1.5, "a": [0.1, 0.2]})
        second = write_json(tmp_path / "b.json", {"a": [0.1, 0.2], "b": 1.5})
        assert first.read_bytes() == second.read_bytes()

    def test_overwrite_is_idempotent(self, tmp_path):
        path = tmp_path / "data.json"
        write_json(path, {"x": 1.0})
        digest = calculate_sha256(path)
        write_json(path, {"x": 1.0})
        assert calculate_sha256(path) == digest


class TestCsv:
    """Tests for CSV writers."""

    def test_empty_file_has_header(self, tmp_path):
        path = write_csv(tmp_path / "fields.csv", FIELD_COLUMNS, [])
        assert path.read_text() == "node,x,y,theta,h,ux,uy\n"

    def test_read_back(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", ("node", "theta"), [(0, np.float64(0.25)), (1, 0.5)])
        columns = read_csv(path)
        assert list(columns) == ["node", "theta"]
        assert np.allclose(columns["theta"], [0.25, 0.5])

    def test_read_header_only(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", ("t", "v"), [])
        columns = read_csv(path)
        assert columns["t"].shape == (0,)

    def test_series_column_order(self):
        assert SERIES_COLUMNS[0] == "t"
        assert SERIES_COLUMNS[-1] == "picard_iters"


class TestSeriesWriter:
    """Tests for the streamed time series."""

    def test_rows_flushed_before_close(self, tmp_path):
        writer = SeriesWriter(tmp_path / "series.csv", ("t", "v"))
        writer.write({"t": 0.0, "v": 1.0, "extra": 5})
        assert (tmp_path / "series.csv").read_text() == "t,v\n0.0,1.0\n"
        writer.close()
        assert writer.rows == 1

    def test_missing_column(self, tmp_path):
        with SeriesWriter(tmp_path / "series.csv", ("t", "v")) as writer:
            with pytest.raises(KeyError, match="v"):
                writer.write({"t": 0.0})


class TestOutputManager:
    """Tests for the run manifest."""

    def test_lifecycle(self, tmp_path):
        manager = OutputManager(tmp_path / "run", "macro", {"nx": 4})
        assert load_manifest(tmp_path / "run")["status"] == "running"

        path = write_csv(manager.path("fields_0000.csv"), ("node",), [(0,)])
        manager.record_output(0, 0.0, [path])
        manager.register(write_json(manager.path("extra.json"), {}))
        manager.finalize("completed")

        manifest = load_manifest(tmp_path / "run")
        assert manifest["kind"] == "macro"
        assert manifest["status"] == "completed"
        assert manifest["metadata"] == {"nx": 4}
        assert manifest["outputs"] == [{"index": 0, "t": 0.0, "files": ["fields_0000.csv"]}]
        assert manifest["files"]["fields_0000.csv"] == calculate_sha256(path)
        assert "extra.json" in manifest["files"]

    def test_aborted_run_keeps_error(self, tmp_path):
        manager = OutputManager(tmp_path, "micro")
        error = {
            "error": "AdmissibilityError",
            "message": "height out of band",
            "details": {"t": 0.01},
        }
        manager.finalize("aborted", error)
        manifest = load_manifest(tmp_path)
        assert manifest["status"] == "aborted"
        assert manifest["error"] == error

    def test_streamed_checksum_refreshed(self, tmp_path):
        manager = OutputManager(tmp_path, "macro")
        writer = SeriesWriter(manager.path("series.csv"), ("t",))
        manager.register(writer.path)
        writer.write({"t": 0.5})
        writer.close()
        manager.finalize()
        assert load_manifest(tmp_path)["files"]["series.csv"] == calculate_sha256(writer.path)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ValidationError, match=MANIFEST_NAME):
            load_manifest(tmp_path)

    def test_verified_path(self, tmp_path):
        manager = OutputManager(tmp_path, "macro")
        path = write_csv(manager.path("fields_0000.csv"), ("node",), [(0,)])
        manager.record_output(0, 0.0, [path])
        manager.finalize()
        manifest = load_manifest(tmp_path)

        assert verified_path(tmp_path, manifest, "fields_0000.csv") == path
        with pytest.raises(ValidationError, match="not listed"):
            verified_path(tmp_path, manifest, "fields_0001.csv")

        path.write_text("node\n1\n")
        with pytest.raises(ValidationError, match="checksum"):
            verified_path(tmp_path, manifest, "fields_0000.csv")

        path.unlink()
        with pytest.raises(ValidationError, match="missing"):
            verified_path(tmp_path, manifest, "fields_0000.csv")
