import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from an arbitrary tuple of str/int parts.

    Independent of PYTHONHASHSEED, so keyed draws agree across processes.
    """
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def keyed_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
