"""Stable seed derivation for reproducible runs.

All randomness in a run flows from one user-supplied seed. Sub-streams
(SFCR generation, GA generations, per-candidate evaluations, the telemetry
engine) get their own seeds derived here, so parallel and serial execution
draw identical numbers. Built-in hash() is salted per process and must never
be used for this.
"""

import hashlib


def derive_seed(*parts: object) -> int:
    """Derive a 63-bit seed from a base seed plus any context components."""
    text = "\x1f".join(repr(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1
