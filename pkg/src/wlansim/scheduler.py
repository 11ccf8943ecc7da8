"""Round-robin user scheduling with semi-orthogonal user selection (SUS).

Candidates are scanned in round-robin order starting at the pointer; the
head is always picked, later candidates join only if their channel
component orthogonal to the already-selected span keeps at least an eps
fraction of its norm. The pointer advances past the head pick only.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels


@dataclass
class SchedulerState:
    sta_ids: list[int]                    # associated STAs of one AP, fixed order
    epsilon: float = 0.3
    max_multiplexed: int = 8
    pointer: dict[str, int] = field(default_factory=lambda: {"DL": 0, "UL": 0})

    def candidates(self, direction: str, backlogged: set[int]) -> list[int]:
        """Backlogged STAs in round-robin order starting at the pointer."""
        if not backlogged:
            return []
        n = len(self.sta_ids)
        start = self.pointer[direction] % n
        order = []
        for k in range(n):
            sta = self.sta_ids[(start + k) % n]
            if sta in backlogged:
                order.append(sta)
        return order


def sus_select(rows: np.ndarray, epsilon: float, k_max: int) -> list[int]:
    """Greedy SUS over candidate rows (already in round-robin order).

    Returns indices into `rows`; the first candidate is always selected.
    """
    if rows.shape[0] == 0:
        return []
    k_max = min(k_max, rows.shape[1], rows.shape[0])
    sel, n_sel = _kernels.sus_select(np.ascontiguousarray(rows, dtype=np.complex128),
                                     float(epsilon), int(k_max))
    return [int(i) for i in sel[:n_sel]]


def advance_round_robin(state: SchedulerState, direction: str, head_sta: int) -> None:
    """Move the pointer one past the head pick (starvation freedom)."""
    idx = state.sta_ids.index(head_sta)
    state.pointer[direction] = (idx + 1) % len(state.sta_ids)
