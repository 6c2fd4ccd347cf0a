"""Collects one pass/fail line per acceptance criterion."""

import time
from contextlib import contextmanager

LINES: list[str] = []


@contextmanager
def criterion(name: str, budget_s: float):
    """Time the body; record PASS only if it returned normally within budget."""
    state = {"detail": ""}
    start = time.perf_counter()
    try:
        yield state
    except AssertionError as exc:
        elapsed = time.perf_counter() - start
        _emit("FAIL", name, f"{exc}".splitlines()[0] if str(exc) else "assertion failed", elapsed, budget_s)
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < budget_s
    _emit("PASS" if ok else "FAIL", name, state["detail"] if ok else f"over budget; {state['detail']}",
          elapsed, budget_s)
    assert ok, f"{name}: {elapsed:.2f}s exceeds {budget_s}s"


def _emit(status: str, name: str, detail: str, elapsed: float, budget: float) -> None:
    line = f"{status} {name}: {detail} [{elapsed:.2f}s / {budget:g}s]"
    LINES.append(line)
    print(line)
