"""Micro-batching: requests queue up for a short window (default 20 ms) or
until the batch is full, then run through the model in one call.

One worker thread per batcher serializes inference on its device; callers
block on a per-request future, so responses always match their own request
no matter how the batch was assembled.
"""

from __future__ import annotations

import queue
import threading
import time
from concurrent.futures import Future
from typing import Sequence

from .models import ScoreItem


class MicroBatcher:
    def __init__(self, model, max_batch_size: int = 16, window_ms: float = 20.0):
        self.model = model
        self.max_batch_size = max_batch_size
        self.window_s = window_ms / 1000.0
        self._queue: queue.Queue = queue.Queue()
        self._closed = False
        self._worker = threading.Thread(target=self._run, daemon=True)
        self._worker.start()

    def submit(self, item: ScoreItem) -> float:
        future: Future = Future()
        self._queue.put((item, future))
        return future.result()

    def close(self) -> None:
        self._closed = True
        self._queue.put(None)

    # -- worker ---------------------------------------------------------------

    def _run(self) -> None:
        while not self._closed:
            first = self._queue.get()
            if first is None:
                return
            batch = [first]
            deadline = time.monotonic() + self.window_s
            # collect until the window closes or the batch fills
            while len(batch) < self.max_batch_size:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                try:
                    entry = self._queue.get(timeout=remaining)
                except queue.Empty:
                    break
                if entry is None:
                    self._closed = True
                    break
                batch.append(entry)
            self._score(batch)

    def _score(self, batch: Sequence[tuple[ScoreItem, Future]]) -> None:
        items = [item for item, _ in batch]
        try:
            values = self.model.score_batch(items)
        except Exception as exc:
            for _, future in batch:
                future.set_exception(exc)
            return
        if len(values) != len(batch):
            error = RuntimeError(
                f"model returned {len(values)} scores for {len(batch)} items")
            for _, future in batch:
                future.set_exception(error)
            return
        for (_, future), value in zip(batch, values):
            future.set_result(float(value))
