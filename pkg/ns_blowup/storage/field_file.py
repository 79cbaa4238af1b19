"""Binary field files.

Layout (little-endian): a 24-byte header

    magic 'BNSF' | version u16 | components u16 | n u32 | reserved u32 | box_length f64

followed by components * n^3 float64 samples in C order of
(components, n, n, n), i.e. component-major with x3 fastest.
"""

import logging
import math
import os
import struct

import numpy as np

from ns_blowup.analysis.spectral import Grid, RealField

logger = logging.getLogger('ns_blowup.storage.field_file')

MAGIC = b'BNSF'
VERSION = 1
HEADER = struct.Struct('<4sHHIId')
HEADER_SIZE = HEADER.size  # 24
_SAMPLE = np.dtype('<f8')


class FieldFormatError(ValueError):
    """Malformed field file; ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset, source=None):
        self.offset = offset
        self.source = source
        prefix = f"{source}: " if source else ""
        super().__init__(f"{prefix}{message} (at byte offset {offset})")


def encode_field(f):
    """Serialize a RealField to bytes."""
    header = HEADER.pack(MAGIC, VERSION, f.components, f.grid.n, 0, f.grid.box_length)
    return header + np.ascontiguousarray(f.samples, dtype=_SAMPLE).tobytes()


def decode_field(data, source=None):
    """Parse bytes produced by ``encode_field``.

    Raises:
        FieldFormatError: truncated or malformed data, non-finite samples
    """
    if len(data) < HEADER_SIZE:
        raise FieldFormatError(f"truncated header: expected {HEADER_SIZE} bytes, got {len(data)}",
                               len(data), source)
    magic, version, components, n, reserved, box_length = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0, source)
    if version != VERSION:
        raise FieldFormatError(f"unsupported version {version}", 4, source)
    if components not in (1, 3):
        raise FieldFormatError(f"components must be 1 or 3, got {components}", 6, source)
    if n < 8 or n & (n - 1):
        raise FieldFormatError(f"grid size must be a power of two >= 8, got {n}", 8, source)
    if reserved != 0:
        raise FieldFormatError(f"reserved header field must be 0, got {reserved}", 12, source)
    if not (math.isfinite(box_length) and box_length > 0):
        raise FieldFormatError(f"box_length must be positive and finite, got {box_length}", 16, source)

    expected = HEADER_SIZE + components * n ** 3 * _SAMPLE.itemsize
    if len(data) < expected:
        raise FieldFormatError(f"truncated samples: expected {expected} bytes, got {len(data)}",
                               len(data), source)
    if len(data) > expected:
        raise FieldFormatError(f"{len(data) - expected} trailing bytes: expected {expected} bytes, got {len(data)}",
                               expected, source)

    samples = np.frombuffer(data, dtype=_SAMPLE, offset=HEADER_SIZE).reshape(components, n, n, n)
    bad = np.flatnonzero(~np.isfinite(samples))
    if bad.size:
        offset = HEADER_SIZE + int(bad[0]) * _SAMPLE.itemsize
        raise FieldFormatError("non-finite sample", offset, source)
    return RealField(Grid(n, box_length), samples.astype(np.float64))


def write_field(path, f):
    """Write a field file (through a temporary file, then renamed).

    Returns:
        int: Bytes written
    """
    data = encode_field(f)
    tmp_path = f"{path}.tmp"
    with open(tmp_path, 'wb') as handle:
        handle.write(data)
    os.replace(tmp_path, path)
    logger.debug(f"Wrote {path} ({len(data)} bytes)")
    return len(data)


def read_field(path):
    """Read a field file.

    Raises:
        FieldFormatError: malformed content
        OSError: unreadable file
    """
    with open(path, 'rb') as handle:
        data = handle.read()
    return decode_field(data, source=str(path))
