"""
qaskey runner.py
Verification cases are independent and some take seconds. Worker threads run them,
each on its own mpmath context; the caller drains a thread-safe result queue and
assembles results in case-key order.
"""

import time
import concurrent.futures
from dataclasses import dataclass, field
from queue import Queue, Empty

from qaskey.errors import QaskeyError

__all__ = ["RunnerConfig", "SuiteRunner", "CaseRecord"]


@dataclass
class RunnerConfig:
    """Default configuration"""
    max_workers: int       = 4
    slow_threshold: float  = 5.0          # seconds; slower cases are logged at DEBUG
    poll_interval: float   = 0.05


@dataclass                                                                                     ##### Data structure
class CaseRecord:
    key: str
    tag: str = ""
    success: bool = False
    result: object = None
    error: str = ""
    duration: float = 0.0
    meta: dict = field(default_factory=dict)

                                                                                               ##### Runner
class SuiteRunner:
    """Fan cases out to worker threads and collect their records."""

    def __init__(self, cfg, logger):
        self.cfg = cfg
        self.logger = logger
        self.slow_threshold = self.cfg.runner.slow_threshold
        self.poll_interval = self.cfg.runner.poll_interval
        self.executor = concurrent.futures.ThreadPoolExecutor(
            max_workers=max(1, self.cfg.runner.max_workers)
        )
        self._result_queue = Queue()
        self._pending = {}
        self._shutdown = False

    def submit(self, key, fn, tag=""):
        """Queue fn() under a unique case key."""
        if self._shutdown:
            raise RuntimeError("runner is shut down")
        if key in self._pending:
            raise ValueError(f"duplicate case key {key!r}")
        self._pending[key] = self.executor.submit(self._worker_wrapper, key, fn, tag)
        self.logger.log(f"Runner: submitted case {key} tag:{tag}", "DEBUG")

    def run(self, jobs):
        """Run (key, fn, tag) jobs; records come back sorted by key."""
        for key, fn, tag in jobs:
            self.submit(key, fn, tag)
        return self.collect()

    def collect(self):
        records = {}
        while self._pending:
            if not self._drain_results(records):
                concurrent.futures.wait(list(self._pending.values()), timeout=self.poll_interval,
                                        return_when=concurrent.futures.FIRST_COMPLETED)
        return [records[k] for k in sorted(records)]

                                                                                               ##### Worker and result
    def _worker_wrapper(self, key, fn, tag):
        start = time.monotonic()
        rec = CaseRecord(key=key, tag=tag)
        try:
            rec.result = fn()
            rec.success = True
        except (QaskeyError, ArithmeticError, ValueError) as e:
            rec.error = f"{e.__class__.__name__}: {e}"
            self.logger.log(f"{key} error: {rec.error}", "DEBUG")
        except Exception as e:
            rec.error = f"{e.__class__.__name__}: {e}"
            self.logger.log(f"{key} unexpected {rec.error}", "ERROR")
        finally:
            rec.duration = time.monotonic() - start
            self._result_queue.put(rec)                                                    # Enqueue
        return True

    def _drain_results(self, records):
        count = 0
        while True:
            try:
                rec = self._result_queue.get_nowait()
            except Empty:
                break
            self._pending.pop(rec.key, None)
            if rec.duration > self.slow_threshold:
                self.logger.log("%s slow %.1fs" % (rec.key, rec.duration), "DEBUG")
            records[rec.key] = rec
            count += 1
        return count
                                                                                              ##### Shutdown
    def shutdown(self, wait=False):
        if self._shutdown:
            return
        self._shutdown = True
        try:
            self.executor.shutdown(wait=wait, cancel_futures=True)
        except Exception as e:
            self.logger.log("Runner shutdown error: %s" % e, "ERROR")
