"""Portable pixmap/graymap codec (P2/P3 plain, P5/P6 raw).

Color images are converted to gray with the 0.299/0.587/0.114 luminance
weights; intensities are scaled to [0, 1] by the file's maxval.
"""

from __future__ import annotations

import numpy as np

from .edges import GrayImage
from .errors import MalformedHeader, UnsupportedMagic

_LUMA = (0.299, 0.587, 0.114)


def _header_tokens(data: bytes, count: int):
    """First `count` whitespace-separated tokens after the magic, honoring
    '#' comments; returns (tokens, offset just past the final separator)."""
    tokens = []
    i = 2  # past the 2-byte magic
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < n and not data[i:i + 1].isspace():
            i += 1
        if start == i:
            raise MalformedHeader("pixmap header ended early")
        tokens.append(data[start:i])
    if i >= n:
        raise MalformedHeader("pixmap data missing after header")
    return tokens, i + 1  # single whitespace separates header from raster


def read_pixmap(path) -> GrayImage:
    """Read a P2/P3/P5/P6 pixmap as a grayscale image."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise UnsupportedMagic(f"unsupported pixmap magic {magic!r}")
    color = magic in (b"P3", b"P6")
    raw = magic in (b"P5", b"P6")
    channels = 3 if color else 1

    tokens, offset = _header_tokens(data, 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise MalformedHeader("width/height/maxval must be integers") from exc
    if width < 1 or height < 1:
        raise MalformedHeader("pixmap dimensions must be positive")
    if not (0 < maxval < 65536):
        raise MalformedHeader(f"maxval {maxval} out of range")

    n_values = width * height * channels
    if raw:
        two_byte = maxval > 255
        need = n_values * (2 if two_byte else 1)
        body = data[offset:offset + need]
        if len(body) < need:
            raise MalformedHeader("raster data shorter than header promises")
        dtype = ">u2" if two_byte else "u1"  # 16-bit raw PNM is big-endian
        values = np.frombuffer(body, dtype=dtype).astype(np.float64)
    else:
        toks = data[offset:].split()
        vals = []
        for t in toks:
            if t.startswith(b"#"):
                break  # trailing comment
            vals.append(t)
        if len(vals) < n_values:
            raise MalformedHeader("raster data shorter than header promises")
        try:
            values = np.array([int(t) for t in vals[:n_values]], dtype=np.float64)
        except ValueError as exc:
            raise MalformedHeader("plain raster values must be integers") from exc
    if values.max() > maxval:
        raise MalformedHeader("raster value exceeds maxval")

    values /= float(maxval)
    if color:
        rgb = values.reshape(height, width, 3)
        gray = _LUMA[0] * rgb[:, :, 0] + _LUMA[1] * rgb[:, :, 1] + _LUMA[2] * rgb[:, :, 2]
    else:
        gray = values.reshape(height, width)
    return GrayImage(np.clip(gray, 0.0, 1.0))


def write_pixmap(img: GrayImage, path, fmt: str = "P5", maxval: int = 255) -> None:
    """Write a grayscale image as P2 (plain) or P5 (raw)."""
    if fmt not in ("P2", "P5"):
        raise ValueError(f"unsupported output format {fmt!r}")
    if not (0 < maxval < 256):
        raise ValueError("maxval must be in 1..255 for output")
    quant = np.rint(img.pixels * maxval).astype(np.uint8)
    header = f"{fmt}\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        if fmt == "P5":
            fh.write(quant.tobytes())
        else:
            lines = [" ".join(str(v) for v in row) for row in quant]
            fh.write(("\n".join(lines) + "\n").encode("ascii"))
