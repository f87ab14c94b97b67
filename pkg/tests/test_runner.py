import threading
from types import SimpleNamespace

import pytest

from qaskey.errors import ConvergenceError
from qaskey.runner import RunnerConfig, SuiteRunner


class FakeLogger:
    def __init__(self):
        self.messages = []
        self._lock = threading.Lock()

    def log(self, msg, level="INFO"):
        with self._lock:
            self.messages.append((level, msg))


def make_runner(*, max_workers=2, slow_threshold=999.0, poll_interval=0.01):
    cfg = SimpleNamespace(
        runner=RunnerConfig(
            max_workers=max_workers,
            slow_threshold=slow_threshold,
            poll_interval=poll_interval,
        )
    )
    logger = FakeLogger()
    return SuiteRunner(cfg, logger), logger


def test_run_returns_records_sorted_by_key():
    runner, _ = make_runner(max_workers=3)

    try:
        records = runner.run([(f"k{i}", (lambda i=i: i * i), "tag") for i in (3, 1, 2, 0)])
    finally:
        runner.shutdown(wait=True)

    assert [r.key for r in records] == ["k0", "k1", "k2", "k3"]
    assert [r.result for r in records] == [0, 1, 4, 9]
    assert all(r.success and r.tag == "tag" for r in records)


def test_library_error_becomes_failed_record_logged_at_debug():
    runner, logger = make_runner()

    def fails():
        raise ConvergenceError("did not settle")

    try:
        (rec,) = runner.run([("case", fails, "")])
    finally:
        runner.shutdown(wait=True)

    assert rec.success is False
    assert rec.error == "ConvergenceError: did not settle"
    assert ("DEBUG", "case error: ConvergenceError: did not settle") in logger.messages


def test_unexpected_error_is_logged_at_error():
    runner, logger = make_runner()

    def broken():
        raise KeyError("x")

    try:
        (rec,) = runner.run([("case", broken, "")])
    finally:
        runner.shutdown(wait=True)

    assert rec.success is False
    assert rec.error.startswith("KeyError")
    assert any(level == "ERROR" and "unexpected" in msg for level, msg in logger.messages)


def test_duplicate_key_is_rejected():
    runner, _ = make_runner()

    try:
        runner.submit("same", lambda: 1)
        with pytest.raises(ValueError, match="duplicate case key"):
            runner.submit("same", lambda: 2)
        runner.collect()
    finally:
        runner.shutdown(wait=True)


def test_submit_after_shutdown_raises():
    runner, _ = make_runner()
    runner.shutdown(wait=True)

    with pytest.raises(RuntimeError, match="shut down"):
        runner.submit("late", lambda: 1)


def test_slow_case_is_logged():
    runner, logger = make_runner(slow_threshold=-1.0)

    try:
        runner.run([("slow", lambda: 1, "")])
    finally:
        runner.shutdown(wait=True)

    assert any(level == "DEBUG" and msg.startswith("slow slow") for level, msg in logger.messages)


def test_shutdown_is_idempotent():
    runner, _ = make_runner()

    runner.shutdown(wait=True)
    runner.shutdown(wait=True)

    assert runner._shutdown is True
