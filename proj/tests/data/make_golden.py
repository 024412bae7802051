#!/usr/bin/env python3
"""Writes the committed .lcim/.lcmx fixtures straight from the byte layout in
docs/formats.md, without going through the C++ library.

Run from this directory: python3 make_golden.py
"""
import hashlib
import struct


def canonical(spec):
    return (
        "method={method};m={m};n={n};gamma={gamma:.17g};seed={seed};resize={resize};"
        "crop={crop};copies={copies};mode={mode};flip={flip:.17g}".format(**spec)
    )


def content_digest(head, payload):
    """First 8 bytes of SHA-256 over the header bytes before the digest, then the payload."""
    return hashlib.sha256(head + payload).digest()[:8]


def lcim(method, dtype, m, n, channels, down, across, spec, payload):
    head = b"LCIM" + struct.pack(
        "<HBBIIIII", 1, method, dtype, m, n, channels, down, across
    )
    head += hashlib.sha256(canonical(spec).encode()).digest()[:8]
    head += content_digest(head, payload)
    head += b"\0" * 4
    assert len(head) == 48
    return head + payload


def lcmx(kind, rows, cols, gamma, seed, entries):
    payload = b"".join(struct.pack("<f", v) for v in entries)
    head = b"LCMX" + struct.pack("<HBBIIdQ", 1, kind, 0, rows, cols, gamma, seed)
    head += content_digest(head, payload) + b"\0" * 8
    assert len(head) == 48
    return head + payload


SPEC_U8 = dict(method="percentile", m=7, n=2, gamma=1.0, seed=17, resize=21, crop=14,
               copies=2, mode="default", flip=0.5)
SPEC_F32 = dict(method="rmm", m=4, n=2, gamma=1.0, seed=5, resize=8, crop=8,
                copies=1, mode="default", flip=0.0)

# 2 channels, 2x3 blocks of 2x2: value = 10*c + position within the channel (stored order).
u8_payload = bytes((10 * c + k) % 256 for c in range(2) for k in range(2 * 3 * 4))
# 1 channel, 2x2 blocks of 2x2, exactly representable floats incl. negatives.
f32_values = [(k - 7) * 0.25 for k in range(16)]
f32_payload = b"".join(struct.pack("<f", v) for v in f32_values)

with open("golden_percentile_u8.lcim", "wb") as f:
    f.write(lcim(0, 0, 7, 2, 2, 2, 3, SPEC_U8, u8_payload))
with open("golden_rmm_f32.lcim", "wb") as f:
    f.write(lcim(1, 1, 4, 2, 1, 2, 2, SPEC_F32, f32_payload))
with open("golden_rmm_4x49.lcmx", "wb") as f:
    f.write(lcmx(0, 4, 49, 1.0, 17, [(k - 98) / 64.0 for k in range(4 * 49)]))
with open("golden_ms_2x7.lcmx", "wb") as f:
    f.write(lcmx(1, 2, 7, 0.5, 2**63 + 5, [0.0 if k % 3 else -(k / 8.0) for k in range(14)]))
