"""Tests for the run logger."""

import pytest

from thermo_homogenization import logger as logger_module
from thermo_homogenization.logger import get_logger, log_increment, setup_logger, summarize


@pytest.fixture
def log_file(tmp_path):
    path = tmp_path / "run.log"
    setup_logger(log_file=path, quiet=True)
    return path


class TestRunLogger:
    """Tests for the file log and summary tracking."""

    def test_file_always_gets_debug(self, log_file):
        get_logger().debug("assembled 12 triangles")
        assert "assembled 12 triangles" in log_file.read_text()

    def test_errors_tracked(self, log_file):
        get_logger().error("height out of band")
        assert get_logger().errors == ["height out of band"]

    def test_artifacts_listed_once(self, log_file, tmp_path):
        logger = get_logger()
        logger.track_artifact(tmp_path / "series.csv")
        logger.track_artifact(tmp_path / "series.csv")
        assert logger.artifacts == [tmp_path / "series.csv"]

    def test_quiet_progress_yields_none(self, log_file):
        with get_logger().progress_bar("Table nodes", 3) as progress:
            assert progress is None

    def test_uninitialized(self, monkeypatch):
        monkeypatch.setattr(logger_module, "_logger", None)
        with pytest.raises(RuntimeError):
            get_logger()
        log_increment("fixed point", [1.0, 2.0])


class TestIncrements:
    """Increment reporting of fixed-point loops."""

    def test_contracting_sequence(self, log_file):
        log_increment("Picard", [1e-2, 1e-4])
        text = log_file.read_text()
        assert "Picard: iteration 2 increment 1.000e-04" in text
        assert "WARNING" not in text

    def test_growth_warns(self, log_file):
        log_increment("fixed point", [1e-3, 5e-3])
        assert "WARNING" in log_file.read_text()
        assert "increment grew" in log_file.read_text()


def test_summarize():
    assert summarize({"h": 0.5, "node": 3}) == "h=5.000e-01, node=3"
