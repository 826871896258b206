"""Deterministic counter-based random streams with named labels.

Every random object in the package is drawn from a Philox stream keyed by a
SHA-256 hash of its labels, e.g. ``stream(seed, "tensor", p)``.  Entries are
produced in a fixed order within a stream, so (labels) -> array is a pure
function, identical across processes and platforms.
"""

import hashlib

import numpy as np


def _label_bytes(labels) -> bytes:
    parts = []
    for lab in labels:
        if isinstance(lab, (int, np.integer)):
            parts.append(b"i" + str(int(lab)).encode())
        elif isinstance(lab, str):
            parts.append(b"s" + lab.encode())
        elif isinstance(lab, (tuple, list)):
            parts.append(b"(" + _label_bytes(lab) + b")")
        else:
            raise TypeError(f"unsupported stream label {lab!r}")
    return b"|".join(parts)


def stream_key(*labels) -> int:
    """128-bit Philox key derived from the labels."""
    digest = hashlib.sha256(_label_bytes(labels)).digest()
    return int.from_bytes(digest[:16], "little")


def stream(*labels) -> np.random.Generator:
    """Fresh generator for the labelled stream (position 0)."""
    return np.random.Generator(np.random.Philox(key=stream_key(*labels)))


def derive_seed(*labels) -> int:
    """64-bit sub-seed, e.g. for per-node Hamiltonians or per-replica runs."""
    digest = hashlib.sha256(b"seed:" + _label_bytes(labels)).digest()
    return int.from_bytes(digest[:8], "little")
