"""Global search-node budget.

Every backtracking search charges the nodes it visits to the active budget.
The default limit comes from the ``ANTCSP_BUDGET`` environment variable.
"""
import os
from contextlib import contextmanager
from contextvars import ContextVar

DEFAULT_LIMIT = 200_000_000


class BudgetExceeded(RuntimeError):
    """Raised when a search visits more nodes than the active budget allows."""

    def __init__(self, limit, used):
        super().__init__(f"budget exceeded: {used} search nodes used, limit {limit}")
        self.limit = limit
        self.used = used


class Budget:
    def __init__(self, limit=None):
        self.limit = limit
        self.used = 0

    def remaining(self) -> int:
        """Nodes still available, or -1 for unlimited."""
        if self.limit is None:
            return -1
        return max(self.limit - self.used, 0)

    def charge(self, nodes: int):
        self.used += nodes
        if self.limit is not None and self.used > self.limit:
            raise BudgetExceeded(self.limit, self.used)

    def check_size(self, size, what="input"):
        """Refuse up front to build objects larger than the remaining budget."""
        if self.limit is not None and size > self.limit:
            raise BudgetExceeded(self.limit, self.used + size)


def _env_limit():
    raw = os.environ.get("ANTCSP_BUDGET")
    if raw is None or raw.strip() == "":
        return DEFAULT_LIMIT
    value = int(raw)
    return None if value <= 0 else value


_current: ContextVar[Budget | None] = ContextVar("antcsp_budget", default=None)


def current() -> Budget:
    """The active budget; outside any scope each call gets a fresh one."""
    b = _current.get()
    if b is None:
        return Budget(_env_limit())
    return b


@contextmanager
def budget_scope(limit=None):
    """Run a block under a fresh budget; ``limit=None`` reads the environment default."""
    b = Budget(_env_limit() if limit is None else (None if limit <= 0 else limit))
    token = _current.set(b)
    try:
        yield b
    finally:
        _current.reset(token)
