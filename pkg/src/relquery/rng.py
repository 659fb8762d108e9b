"""Seedable, splittable random streams built on the Philox counter-based generator.

Every stochastic operation in the package receives an explicit
``numpy.random.Generator``.  Streams are derived, never shared: a stream is
identified by a tuple of non-negative integers (root seed, then arbitrary
branch indices), so independent work units (ensemble states, sweep
iterations, query evaluations) can be given disjoint streams that are
bit-reproducible across platforms and across process boundaries.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream(*path: int) -> np.random.Generator:
    """Return the generator for an integer-tuple stream id."""
    if not path:
        raise ValueError("stream path must contain at least the root seed")
    seq = np.random.SeedSequence(list(path))
    return np.random.Generator(np.random.Philox(seq))


def text_stream(seed: int, *parts) -> np.random.Generator:
    """Derive a stream from a seed plus arbitrary text/int parts.

    Used for query evaluation, where the stream must depend on the query
    content (identical queries get identical streams regardless of the
    order in which a session runs them).
    """
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x00")
    words = [int.from_bytes(h.digest()[i : i + 4], "big") for i in range(0, 16, 4)]
    return stream(seed, *words)


def choose_log(rng: np.random.Generator, log_weights: np.ndarray) -> int:
    """Sample an index proportionally to exp(log_weights)."""
    w = np.asarray(log_weights, dtype=float)
    m = w.max()
    if not np.isfinite(m):
        raise ValueError("all candidate log weights are -inf")
    cum = np.cumsum(np.exp(w - m))
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(idx, len(w) - 1)
