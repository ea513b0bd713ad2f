"""Per-interval presence of verbal (VB) codes."""
from __future__ import annotations

import logging
from typing import Iterable, Sequence

from .model import Utterance

log = logging.getLogger(__name__)


def n_intervals(span: tuple[int, int], interval_len: int) -> int:
    """Number of complete intervals in ``span``; a trailing partial one is dropped."""
    return max(span[1] - span[0], 0) // interval_len


def verbal_presence(utterances: Iterable[Utterance], students: Sequence[str],
                    span: tuple[int, int], interval_len: int = 60
                    ) -> tuple[dict[str, list[frozenset[str]]], list[Utterance]]:
    """VB codes present per student per interval.

    An utterance belongs to the interval containing its start time. Returns
    the presence sets and the utterances dropped for starting outside the
    span.
    """
    n = n_intervals(span, interval_len)
    sets: dict[str, list[set[str]]] = {sid: [set() for _ in range(n)] for sid in students}
    dropped = []
    for u in utterances:
        if not span[0] <= u.t_start < span[1]:
            dropped.append(u)
            continue
        k = (u.t_start - span[0]) // interval_len
        if k < n and u.student_id in sets:
            sets[u.student_id][k].add(u.code)
    if dropped:
        log.warning("%d utterance(s) start outside the analysis span and were dropped", len(dropped))
    return {sid: [frozenset(s) for s in v] for sid, v in sets.items()}, dropped
