"""Deterministic RNG substreams derived from one master seed."""

from __future__ import annotations

import hashlib

import numpy as np


def _label_entropy(label: object) -> int:
    """Maps an arbitrary label to a stable 64-bit integer."""
    digest = hashlib.blake2s(repr(label).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def substream(master_seed: int, *labels: object) -> np.random.Generator:
    """Returns a Generator for the (master_seed, labels...) substream.

    The same (seed, labels) pair always yields the same stream, independent
    of call order or process layout, so serial and parallel runs agree.
    """
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF]
    entropy.extend(_label_entropy(lab) for lab in labels)
    return np.random.default_rng(np.random.SeedSequence(entropy))
