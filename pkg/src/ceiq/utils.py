"""Small shared helpers."""

import hashlib
import os

import numpy as np


def round_half_away(x):
    """Round to nearest integer with ties away from zero.

    ``np.round`` rounds half to even; image LUTs and split arithmetic in
    this package use the away-from-zero rule so results do not depend on
    parity quirks.
    """
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def default_workers() -> int:
    """Worker-pool size: CEIQ_WORKERS env var, else 1 (fully serial)."""
    raw = os.environ.get("CEIQ_WORKERS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
