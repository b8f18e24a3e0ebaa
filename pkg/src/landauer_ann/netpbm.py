"""Minimal Netpbm reader/writer for PGM (P2/P5) and PBM (P1/P4).

Only 8-bit grayscale (maxval <= 255) and bitmaps are supported. Pixel data is
returned as float64 intensities in [0, 1]; for bitmaps a set bit is black and
maps to 0.0.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

_WHITESPACE = b" \t\n\r\v\f"


class NetpbmError(ValueError):
    """Raised for malformed or unsupported Netpbm files."""


class _Cursor:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def skip_space_and_comments(self) -> None:
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos : self.pos + 1]
            if ch == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif ch in _WHITESPACE:
                self.pos += 1
            else:
                break

    def token(self, what: str) -> bytes:
        self.skip_space_and_comments()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos : self.pos + 1] not in _WHITESPACE + b"#":
            self.pos += 1
        if start == self.pos:
            raise NetpbmError(f"expected {what} at byte offset {start}, found end of file")
        return self.data[start : self.pos]

    def integer(self, what: str) -> int:
        self.skip_space_and_comments()
        offset = self.pos
        tok = self.token(what)
        if not tok.isdigit():
            raise NetpbmError(f"expected {what} at byte offset {offset}, found {tok[:16]!r}")
        return int(tok)


def parse_netpbm(data: bytes) -> np.ndarray:
    """Decode a PGM/PBM byte string into a (height, width) float array in [0, 1]."""
    cur = _Cursor(data)
    if len(data) < 2 or data[:1] != b"P":
        raise NetpbmError("missing magic number at byte offset 0")
    magic = data[:2]
    if magic not in (b"P1", b"P2", b"P4", b"P5"):
        raise NetpbmError(f"unsupported magic number {magic!r} at byte offset 0")
    cur.pos = 2
    width = cur.integer("width")
    height = cur.integer("height")
    if width < 1 or height < 1:
        raise NetpbmError(f"invalid dimensions {width}x{height}")
    bitmap = magic in (b"P1", b"P4")
    maxval = 1
    if not bitmap:
        cur.skip_space_and_comments()
        offset = cur.pos
        maxval = cur.integer("maxval")
        if not 1 <= maxval <= 255:
            raise NetpbmError(f"unsupported maxval {maxval} at byte offset {offset} (only 1..255)")
    n = width * height

    if magic in (b"P4", b"P5"):
        # exactly one whitespace byte separates the header from the raster
        if cur.pos >= len(data) or data[cur.pos : cur.pos + 1] not in _WHITESPACE:
            raise NetpbmError(f"missing whitespace before raster at byte offset {cur.pos}")
        start = cur.pos + 1
        expected = ((width + 7) // 8) * height if magic == b"P4" else n
        payload = data[start : start + expected]
        if len(payload) < expected:
            raise NetpbmError(
                f"truncated raster at byte offset {start}: expected {expected} bytes, got {len(payload)}"
            )
        raw = np.frombuffer(payload, dtype=np.uint8)
        if magic == b"P4":
            bits = np.unpackbits(raw.reshape(height, -1), axis=1)[:, :width]
            return 1.0 - bits.astype(np.float64)
        values = raw.reshape(height, width).astype(np.float64)
    else:
        values = np.empty(n, dtype=np.float64)
        for i in range(n):
            cur.skip_space_and_comments()
            if cur.pos >= len(data):
                raise NetpbmError(
                    f"truncated raster at byte offset {cur.pos}: expected {n} samples, got {i}"
                )
            if magic == b"P1":
                # P1 samples may be packed without separators
                ch = data[cur.pos : cur.pos + 1]
                if ch not in (b"0", b"1"):
                    raise NetpbmError(f"invalid bit {ch!r} at byte offset {cur.pos}")
                values[i] = int(ch)
                cur.pos += 1
            else:
                offset = cur.pos
                values[i] = cur.integer("sample")
                if values[i] > maxval:
                    raise NetpbmError(f"sample {int(values[i])} exceeds maxval {maxval} at byte offset {offset}")
        values = values.reshape(height, width)
        if bitmap:
            return 1.0 - values

    if values.max(initial=0) > maxval:
        raise NetpbmError(f"sample exceeds maxval {maxval}")
    return values / float(maxval)


def read_netpbm(path: str | os.PathLike) -> np.ndarray:
    return parse_netpbm(Path(path).read_bytes())


def encode_pgm(pixels: np.ndarray, binary: bool = True) -> bytes:
    """Encode intensities in [0, 1] as 8-bit PGM (P5 when ``binary`` else P2)."""
    arr = np.asarray(pixels, dtype=np.float64)
    height, width = arr.shape
    q = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    if binary:
        return b"P5\n%d %d\n255\n" % (width, height) + q.tobytes()
    lines = [" ".join(str(int(v)) for v in row) for row in q]
    return ("P2\n%d %d\n255\n" % (width, height) + "\n".join(lines) + "\n").encode("ascii")


def encode_pbm(pixels: np.ndarray, binary: bool = True) -> bytes:
    """Encode a binary image (0.0 black, 1.0 white) as PBM (P4 or P1)."""
    arr = np.asarray(pixels, dtype=np.float64)
    height, width = arr.shape
    bits = (arr < 0.5).astype(np.uint8)
    if binary:
        return b"P4\n%d %d\n" % (width, height) + np.packbits(bits, axis=1).tobytes()
    lines = [" ".join(str(int(v)) for v in row) for row in bits]
    return ("P1\n%d %d\n" % (width, height) + "\n".join(lines) + "\n").encode("ascii")
