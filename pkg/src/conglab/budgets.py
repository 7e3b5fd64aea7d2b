"""Search budgets.

Every potentially-exponential search in the package is capped.  The caps are
deliberate, documented defaults; CONGLAB_BUDGET_STATES overrides the state
budget for graph/path searches.
"""

from __future__ import annotations

import os


class BudgetError(RuntimeError):
    """A configured search budget was exceeded."""

    def __init__(self, message: str, explored: int | None = None):
        super().__init__(message)
        self.explored = explored


# Masks are materialized (full closure classes, colorings, digraph vertices)
# only while 2^r stays under this.
MASK_BUDGET = 1 << 14

# Claim-3 / path-search automaton states.
DEFAULT_STATE_BUDGET = 2_000_000


def state_budget() -> int:
    raw = os.environ.get("CONGLAB_BUDGET_STATES")
    if raw is None:
        return DEFAULT_STATE_BUDGET
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_STATE_BUDGET


def check_mask_budget(r: int) -> None:
    if (1 << r) > MASK_BUDGET:
        raise BudgetError(f"r too large: 2^{r} masks exceed the budget of {MASK_BUDGET}")
