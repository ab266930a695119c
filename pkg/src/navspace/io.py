"""Binary PGM/PPM readers and writers plus the plain-text matrix format."""

from __future__ import annotations

from pathlib import Path

import numpy as np


class PnmFormatError(ValueError):
    """Malformed PGM/PPM data; ``offset`` is the byte position of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _parse_header(data: bytes, magic: bytes) -> tuple[int, int, int, int]:
    if data[:2] != magic:
        raise PnmFormatError(f"expected magic {magic.decode()}", 0)
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise PnmFormatError("truncated header", pos)
        c = data[pos:pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise PnmFormatError("unterminated comment", pos)
            pos = end + 1
        elif c.isdigit():
            start = pos
            while pos < len(data) and data[pos:pos + 1].isdigit():
                pos += 1
            fields.append(int(data[start:pos]))
        else:
            raise PnmFormatError(f"unexpected byte {c!r} in header", pos)
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise PnmFormatError("missing whitespace after header", pos)
    pos += 1
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise PnmFormatError("non-positive image size", pos)
    if not 0 < maxval < 256:
        raise PnmFormatError(f"unsupported maxval {maxval}", pos)
    return width, height, maxval, pos


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode a binary (P5) greymap into a ``(height, width)`` uint8 array."""
    width, height, _, pos = _parse_header(data, b"P5")
    need = width * height
    if len(data) - pos < need:
        raise PnmFormatError(f"truncated raster: need {need} bytes, have {len(data) - pos}",
                             len(data))
    return np.frombuffer(data, dtype=np.uint8, count=need, offset=pos).reshape(height, width).copy()


def parse_ppm(data: bytes) -> np.ndarray:
    """Decode a binary (P6) pixmap into a ``(height, width, 3)`` uint8 array."""
    width, height, _, pos = _parse_header(data, b"P6")
    need = width * height * 3
    if len(data) - pos < need:
        raise PnmFormatError(f"truncated raster: need {need} bytes, have {len(data) - pos}",
                             len(data))
    return np.frombuffer(data, dtype=np.uint8, count=need, offset=pos).reshape(height, width, 3).copy()


def encode_pgm(pixels: np.ndarray) -> bytes:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w = pixels.shape
    return f"P5\n{w} {h}\n255\n".encode() + pixels.tobytes()


def encode_ppm(pixels: np.ndarray) -> bytes:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w, _ = pixels.shape
    return f"P6\n{w} {h}\n255\n".encode() + pixels.tobytes()


def read_pgm(path) -> np.ndarray:
    return parse_pgm(Path(path).read_bytes())


def write_pgm(path, pixels: np.ndarray) -> None:
    Path(path).write_bytes(encode_pgm(pixels))


def read_ppm(path) -> np.ndarray:
    return parse_ppm(Path(path).read_bytes())


def write_ppm(path, pixels: np.ndarray) -> None:
    Path(path).write_bytes(encode_ppm(pixels))


def format_matrix(values: np.ndarray, fmt: str = "%.6g") -> str:
    """Rows on lines, space-separated, six significant digits by default."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    return "".join(" ".join(fmt % x for x in row) + "\n" for row in values)


def parse_matrix(text: str) -> np.ndarray:
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    if not rows:
        return np.zeros((0, 0))
    if len({len(r) for r in rows}) != 1:
        raise ValueError("ragged matrix text")
    return np.array([[float(x) for x in r] for r in rows])


def write_matrix(path, values: np.ndarray, fmt: str = "%.6g") -> None:
    Path(path).write_text(format_matrix(values, fmt))


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())
