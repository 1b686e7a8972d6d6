"""
Unit tests for logging infrastructure.
"""

import json
import logging
import sys

from borninfeld.logging.logger import (
    JSONFormatter,
    LoggerAdapter,
    TextFormatter,
    create_run_logger,
    setup_logger,
)


def _record(msg: str = "Solve finished", **fields) -> logging.LogRecord:
    record = logging.LogRecord(
        name="borninfeld.solvers",
        level=logging.INFO,
        pathname="",
        lineno=0,
        msg=msg,
        args=(),
        exc_info=None,
    )
    for key, value in fields.items():
        setattr(record, key, value)
    return record


class TestJSONFormatter:
    """Tests for JSON log formatter."""

    def test_format_basic_message(self):
        """Test formatting a basic log message."""
        log_data = json.loads(JSONFormatter().format(_record()))

        assert log_data["level"] == "INFO"
        assert log_data["message"] == "Solve finished"
        assert log_data["logger"] == "borninfeld.solvers"
        assert log_data["timestamp"].endswith("Z")

    def test_format_with_solver_context(self):
        """Test that solver context attributes become JSON fields."""
        record = _record(beta=0.3, separation=2.0, iteration=17, event_type="solve_done", unrelated="x")

        log_data = json.loads(JSONFormatter().format(record))

        assert log_data["beta"] == 0.3
        assert log_data["separation"] == 2.0
        assert log_data["iteration"] == 17
        assert log_data["event_type"] == "solve_done"
        assert "unrelated" not in log_data

    def test_format_exception(self):
        """Test that tracebacks are included."""
        try:
            raise ValueError("bad grid")
        except ValueError:
            record = _record()
            record.exc_info = sys.exc_info()

        log_data = json.loads(JSONFormatter().format(record))

        assert "ValueError: bad grid" in log_data["exception"]


class TestTextFormatter:
    """Tests for text log formatter."""

    def test_format_basic_message(self):
        """Test formatting a basic text message."""
        formatted = TextFormatter(use_colors=False).format(_record())

        assert "[INFO]" in formatted
        assert "borninfeld.solvers: Solve finished" in formatted

    def test_format_with_context(self):
        """Test that sweep context is appended."""
        formatted = TextFormatter(use_colors=False).format(_record(beta=0.1, separation=4.0, iteration=3))

        assert formatted.endswith("[beta=0.1] [r=4.0] [it=3]")


class TestSetupLogger:
    """Tests for logger setup."""

    def test_setup_logger_default(self):
        """Test logger setup with default parameters."""
        logger = setup_logger("borninfeld.test.default")

        assert logger.level == logging.INFO
        assert len(logger.handlers) == 1
        assert isinstance(logger.handlers[0].formatter, JSONFormatter)
        assert not logger.propagate

    def test_setup_logger_text_format(self):
        """Test logger setup with text format and custom level."""
        logger = setup_logger("borninfeld.test.text", level="debug", log_format="text")

        assert logger.level == logging.DEBUG
        assert isinstance(logger.handlers[0].formatter, TextFormatter)

    def test_repeated_setup_replaces_handlers(self):
        """Test that handlers do not accumulate."""
        setup_logger("borninfeld.test.repeat")
        logger = setup_logger("borninfeld.test.repeat")

        assert len(logger.handlers) == 1

    def test_logs_to_stderr(self, capsys):
        """Test that records never reach standard output."""
        logger = setup_logger("borninfeld.test.stream", log_format="text")
        logger.warning("grid too coarse")
        captured = capsys.readouterr()

        assert captured.out == ""
        assert "grid too coarse" in captured.err

    def test_file_handler_writes_json(self, tmp_path):
        """Test file logging into a new directory."""
        log_file = tmp_path / "logs" / "run.jsonl"
        logger = setup_logger("borninfeld.test.file", log_format="text", log_file=log_file)

        logger.info("written", extra={"beta": 0.2})
        for handler in list(logger.handlers):
            handler.close()
            logger.removeHandler(handler)

        entry = json.loads(log_file.read_text().splitlines()[0])
        assert entry["message"] == "written"
        assert entry["beta"] == 0.2


class TestCreateRunLogger:
    """Tests for sweep-point logger adapters."""

    def test_context(self):
        """Test creating a run logger with context."""
        run_logger = create_run_logger(logging.getLogger("borninfeld.test.run"), 0.3, 2.0)

        assert isinstance(run_logger, LoggerAdapter)
        assert run_logger.extra == {"beta": 0.3, "separation": 2.0}

    def test_without_separation(self):
        """Test a beta-only context."""
        run_logger = create_run_logger(logging.getLogger("borninfeld.test.run"), 0.1)

        assert run_logger.extra == {"beta": 0.1}

    def test_context_merged_into_records(self, caplog):
        """Test that call-site extras and run context both reach the record."""
        run_logger = create_run_logger(logging.getLogger("borninfeld.test.run"), 0.3, 2.0)

        with caplog.at_level(logging.INFO, logger="borninfeld"):
            run_logger.info("point done", extra={"event_type": "point_done"})

        (record,) = [r for r in caplog.records if r.getMessage() == "point done"]
        assert record.beta == 0.3
        assert record.separation == 2.0
        assert record.event_type == "point_done"
