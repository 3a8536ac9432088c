"""Batched, compiled evaluation of window attributes.

A document is handed over as integer token ids plus per-token boundary
flags; every window is evaluated in one compiled loop. Results match
:func:`wordgraph.graphcore.compute_attributes` exactly (ASP is computed as
the same integer ratio).
"""

from __future__ import annotations

from typing import Sequence

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def _windows_kernel(ids, boundary, starts, length, vocab_size):  # pragma: no cover - compiled
    n_windows = starts.shape[0]
    out = np.zeros((n_windows, 7), dtype=np.float64)
    local = np.full(vocab_size, -1, dtype=np.int64)
    adj = np.zeros((length, length), dtype=np.int64)
    succ = np.zeros((length, length), dtype=np.int64)
    n_succ = np.zeros(length, dtype=np.int64)
    dist = np.zeros((length, length), dtype=np.int64)
    queue = np.zeros(length, dtype=np.int64)
    parent = np.zeros(length, dtype=np.int64)
    comp_size = np.zeros(length, dtype=np.int64)
    words = np.zeros(length, dtype=np.int64)
    loc = np.zeros(length, dtype=np.int64)

    for w in range(n_windows):
        s = starts[w]
        n = 0
        for k in range(length):
            tok = ids[s + k]
            if local[tok] < 0:
                local[tok] = n
                words[n] = tok
                n += 1
            loc[k] = local[tok]
        for i in range(n):
            local[words[i]] = -1
            n_succ[i] = 0
            parent[i] = i
            comp_size[i] = 0
            for j in range(n):
                adj[i, j] = 0

        transitions = 0
        for k in range(length - 1):
            if boundary[s + k + 1]:
                continue
            u = loc[k]
            v = loc[k + 1]
            transitions += 1
            if adj[u, v] == 0:
                succ[u, n_succ[u]] = v
                n_succ[u] += 1
            adj[u, v] += 1
            # union-find for weak components
            ru = u
            while parent[ru] != ru:
                ru = parent[ru]
            rv = v
            while parent[rv] != rv:
                rv = parent[rv]
            if ru != rv:
                if ru < rv:
                    parent[rv] = ru
                else:
                    parent[ru] = rv

        distinct = 0
        anti = 0
        for u in range(n):
            distinct += n_succ[u]
            for j in range(n_succ[u]):
                v = succ[u, j]
                if u < v and adj[v, u] > 0:
                    anti += 1

        lcc = 0
        for x in range(n):
            r = x
            while parent[r] != r:
                r = parent[r]
            comp_size[r] += 1
        for x in range(n):
            if comp_size[x] > lcc:
                lcc = comp_size[x]

        total = 0
        pairs = 0
        for src in range(n):
            for j in range(n):
                dist[src, j] = -1
            dist[src, src] = 0
            head = 0
            tail = 0
            queue[tail] = src
            tail += 1
            while head < tail:
                u = queue[head]
                head += 1
                for j in range(n_succ[u]):
                    v = succ[u, j]
                    if dist[src, v] < 0:
                        dist[src, v] = dist[src, u] + 1
                        queue[tail] = v
                        tail += 1
                        total += dist[src, v]
                        pairs += 1

        lsc = 1
        for u in range(n):
            size = 0
            for v in range(n):
                if dist[u, v] >= 0 and dist[v, u] >= 0:
                    size += 1
            if size > lsc:
                lsc = size

        out[w, 0] = n
        out[w, 1] = distinct
        out[w, 2] = transitions - distinct
        out[w, 3] = anti
        out[w, 4] = lcc
        out[w, 5] = lsc
        out[w, 6] = total / pairs if pairs > 0 else 0.0
    return out


def encode_tokens(tokens: Sequence[str]) -> tuple[np.ndarray, int]:
    """Map tokens to dense integer ids (first-seen order)."""
    index: dict[str, int] = {}
    ids = np.fromiter(
        (index.setdefault(t, len(index)) for t in tokens), dtype=np.int64, count=len(tokens)
    )
    return ids, len(index)


def window_matrix(
    ids: np.ndarray,
    boundary: np.ndarray,
    starts: Sequence[int],
    length: int,
    vocab_size: int | None = None,
) -> np.ndarray:
    """Attributes for each window ``[start, start + length)``; shape ``(len(starts), 7)``.

    ``boundary[i]`` is True when token ``i`` starts a new line.
    """
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    boundary = np.ascontiguousarray(boundary, dtype=np.bool_)
    starts_arr = np.ascontiguousarray(starts, dtype=np.int64)
    if length < 1:
        raise ValueError("window length must be positive")
    if starts_arr.size and (starts_arr.min() < 0 or starts_arr.max() + length > ids.size):
        raise ValueError("window extends past the token array")
    if vocab_size is None:
        vocab_size = int(ids.max()) + 1 if ids.size else 0
    return _windows_kernel(ids, boundary, starts_arr, int(length), int(vocab_size))
