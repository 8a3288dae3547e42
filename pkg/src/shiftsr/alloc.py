"""Transient-allocation accounting hook.

Operations that create large intermediate buffers report them here so
tests and the benchmark harness can observe peak transient memory, in
particular that the fused shift-conv path never materializes a full
channels x height x width intermediate.
"""
from __future__ import annotations

from contextlib import contextmanager

_active: list["AllocationTracker"] = []


class AllocationTracker:
    """Running total and high-water mark of tracked bytes."""

    def __init__(self) -> None:
        self.current = 0
        self.peak = 0

    def add(self, nbytes: int) -> None:
        self.current += nbytes
        if self.current > self.peak:
            self.peak = self.current

    def remove(self, nbytes: int) -> None:
        self.current -= nbytes


@contextmanager
def track():
    """Activate a tracker for the duration of the block and yield it."""
    tracker = AllocationTracker()
    _active.append(tracker)
    try:
        yield tracker
    finally:
        _active.remove(tracker)


def note_alloc(nbytes: int) -> None:
    for tracker in _active:
        tracker.add(nbytes)


def note_free(nbytes: int) -> None:
    for tracker in _active:
        tracker.remove(nbytes)
