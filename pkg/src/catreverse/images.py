"""Binary initial images and grayscale density renders.

Input is portable bitmap (P1 ASCII or P4 packed); output is portable graymap
(P2 ASCII or P5 binary).  Images are square with power-of-two side N and sit
in the central phase-space cell: column c maps to i = c, and the top row maps
to the largest y, so row r maps to j = LN/2 - N/2 + (N - 1 - r).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticePoint, PhaseSpaceConfig


class ParseError(ValueError):
    """Malformed portable-anymap payload; ``offset`` is the failing byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass
class BinaryImage:
    """Square bit image; pixels[row, col] with row 0 at the top."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=bool)
        if self.pixels.ndim != 2 or self.pixels.shape[0] != self.pixels.shape[1]:
            raise ValueError(f"image must be square, got shape {self.pixels.shape}")
        n = self.pixels.shape[0]
        if n < 1 or (n & (n - 1)) != 0:
            raise ValueError(f"image side must be a power of two, got {n}")

    @property
    def side(self) -> int:
        return self.pixels.shape[0]

    def set_count(self) -> int:
        return int(self.pixels.sum())

    def set_fraction(self) -> float:
        return self.set_count() / self.pixels.size


@dataclass
class DensityImage:
    """Gray levels 0..255; the maximum density maps to 255."""

    gray: np.ndarray
    max_density: float

    def __post_init__(self):
        self.gray = np.asarray(self.gray, dtype=np.uint8)
        if self.gray.ndim != 2:
            raise ValueError("gray must be 2-D")


def _tokens(data: bytes, count: int, start: int):
    """Yield (token, offset) for whitespace-separated fields, '#' comments skipped."""
    pos = start
    got = 0
    while got < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        if pos >= len(data):
            raise ParseError("unexpected end of header", pos)
        tok_start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        yield data[tok_start:pos], tok_start
        got += 1
    # position after the last token; caller handles the single separator
    yield b"", pos


def load_portable_bitmap(data: bytes) -> BinaryImage:
    """Parse a P1 or P4 portable bitmap into a BinaryImage."""
    if len(data) < 2:
        raise ParseError("payload too short for a magic number", 0)
    magic = data[:2]
    if magic not in (b"P1", b"P4"):
        raise ParseError(f"unsupported magic {magic!r}, expected P1 or P4", 0)
    fields = []
    gen = _tokens(data, 2, 2)
    for tok, off in gen:
        if tok == b"":
            after = off
            break
        try:
            fields.append(int(tok))
        except ValueError:
            raise ParseError(f"non-numeric header field {tok!r}", off) from None
    width, height = fields
    if width != height:
        raise ParseError(f"image must be square, got {width}x{height}", 2)
    if width < 1 or (width & (width - 1)) != 0:
        raise ParseError(f"side must be a power of two, got {width}", 2)

    if magic == b"P1":
        bits = []
        pos = after
        while pos < len(data) and len(bits) < width * height:
            ch = data[pos : pos + 1]
            if ch.isspace():
                pos += 1
            elif ch == b"#":
                while pos < len(data) and data[pos] != 0x0A:
                    pos += 1
            elif ch in (b"0", b"1"):
                bits.append(ch == b"1")
                pos += 1
            else:
                raise ParseError(f"unexpected character {ch!r} in P1 raster", pos)
        if len(bits) < width * height:
            raise ParseError(f"raster ended after {len(bits)} of {width * height} pixels", pos)
        pixels = np.array(bits, dtype=bool).reshape(height, width)
        return BinaryImage(pixels)

    # P4: a single whitespace byte after the header, then packed rows.
    pos = after
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ParseError("expected single whitespace before P4 raster", pos)
    pos += 1
    row_bytes = (width + 7) // 8
    need = row_bytes * height
    if len(data) - pos < need:
        raise ParseError(f"raster needs {need} bytes, have {len(data) - pos}", pos)
    raw = np.frombuffer(data[pos : pos + need], dtype=np.uint8).reshape(height, row_bytes)
    bits = np.unpackbits(raw, axis=1)[:, :width]
    return BinaryImage(bits.astype(bool))


def save_portable_bitmap(img: BinaryImage, binary: bool = True) -> bytes:
    """Encode as P4 (binary) or P1 (ASCII)."""
    n = img.side
    if binary:
        packed = np.packbits(img.pixels.astype(np.uint8), axis=1)
        return b"P4\n%d %d\n" % (n, n) + packed.tobytes()
    rows = [" ".join("1" if v else "0" for v in row) for row in img.pixels]
    return ("P1\n%d %d\n" % (n, n) + "\n".join(rows) + "\n").encode()


def image_to_points(img: BinaryImage, cfg: PhaseSpaceConfig) -> list[LatticePoint]:
    """Set pixels as lattice points in the central cell, top row at largest y."""
    n = img.side
    if n != cfg.N:
        raise ValueError(f"image side {n} does not match lattice N={cfg.N}")
    j_base = cfg.LN // 2 - cfg.N // 2
    rows, cols = np.nonzero(img.pixels)
    return [LatticePoint(int(c), j_base + (n - 1 - int(r))) for r, c in zip(rows, cols)]


def points_to_image(points, cfg: PhaseSpaceConfig) -> BinaryImage:
    """Inverse of :func:`image_to_points` for points inside the central cell."""
    n = cfg.N
    j_base = cfg.LN // 2 - cfg.N // 2
    pixels = np.zeros((n, n), dtype=bool)
    for p in points:
        r = n - 1 - (p.j - j_base)
        if not (0 <= r < n):
            raise ValueError(f"point {p} outside the central cell")
        pixels[r, p.i] = True
    return BinaryImage(pixels)


def generate_demon_image(N: int) -> BinaryImage:
    """Deterministic horned-silhouette test image with set fraction in [0.05, 0.30].

    Built from closed-form shape tests at pixel centers, so the image is
    identical on every platform for a given N.
    """
    if N < 16:
        raise ValueError(f"N must be >= 16, got {N}")
    r = (np.arange(N) + 0.5) / N  # row fraction, 0 at top
    c = (np.arange(N) + 0.5) / N
    v, u = np.meshgrid(r, c, indexing="ij")
    x = u - 0.5

    head = (x / 0.17) ** 2 + ((v - 0.40) / 0.15) ** 2 <= 1.0
    horn_left = (v >= 0.10) & (v <= 0.34) & (x >= -0.34 + 0.5 * (v - 0.10)) & (
        x <= -0.16 + 0.25 * (v - 0.10)
    )
    horn_right = (v >= 0.10) & (v <= 0.34) & (-x >= -0.34 + 0.5 * (v - 0.10)) & (
        -x <= -0.16 + 0.25 * (v - 0.10)
    )
    body = (x / (0.10 + 0.16 * (v - 0.52))) ** 2 + ((v - 0.70) / 0.20) ** 2 <= 1.0
    arm_left = (v >= 0.55) & (v <= 0.63) & (x >= -0.34) & (x <= -0.08)
    arm_right = (v >= 0.55) & (v <= 0.63) & (-x >= -0.34) & (-x <= -0.08)
    eye_left = ((x + 0.07) / 0.035) ** 2 + ((v - 0.37) / 0.045) ** 2 <= 1.0
    eye_right = ((x - 0.07) / 0.035) ** 2 + ((v - 0.37) / 0.045) ** 2 <= 1.0

    pixels = (head | horn_left | horn_right | body | arm_left | arm_right) & ~(
        eye_left | eye_right
    )
    img = BinaryImage(pixels)
    frac = img.set_fraction()
    if not (0.05 <= frac <= 0.30):
        raise AssertionError(f"demon fraction {frac:.3f} outside [0.05, 0.30] at N={N}")
    return img


def density_to_image(
    p: np.ndarray,
    region: tuple[int, int, int, int],
    gamma: float = 1.0,
) -> DensityImage:
    """Render p(i, j) over the half-open cell range (i0, i1, j0, j1).

    Rows run top-down in decreasing j (largest y at the top); the maximum
    density in the region maps to gray 255 (after the gamma curve).
    """
    i0, i1, j0, j1 = region
    if not (i0 < i1 and j0 < j1):
        raise ValueError(f"empty region {region}")
    n_i, n_j = p.shape
    if not (0 <= i0 and i1 <= n_i and 0 <= j0 and j1 <= n_j):
        raise ValueError(f"region {region} outside table shape {p.shape}")
    block = p[i0:i1, j0:j1]
    peak = float(block.max())
    if peak <= 0:
        gray = np.zeros((j1 - j0, i1 - i0), dtype=np.uint8)
        return DensityImage(gray, 0.0)
    scaled = (block / peak) ** gamma
    gray = np.minimum(255, np.floor(scaled * 255.0 + 0.5)).astype(np.uint8)
    # block axes are (i, j); view with y (j) as rows, descending.
    return DensityImage(gray.T[::-1], peak)


def save_portable_graymap(img: DensityImage, binary: bool = True) -> bytes:
    """Encode as P5 (binary) or P2 (ASCII)."""
    h, w = img.gray.shape
    if binary:
        return b"P5\n%d %d\n255\n" % (w, h) + img.gray.tobytes()
    rows = [" ".join(str(int(v)) for v in row) for row in img.gray]
    return ("P2\n%d %d\n255\n" % (w, h) + "\n".join(rows) + "\n").encode()


def recovery_overlap(initial: BinaryImage, final_density: np.ndarray, cfg: PhaseSpaceConfig) -> float:
    """Probability mass sitting inside the initially occupied pixels."""
    if initial.side != cfg.N:
        raise ValueError(f"image side {initial.side} does not match N={cfg.N}")
    if final_density.shape != (cfg.N, cfg.LN):
        raise ValueError(f"density shape {final_density.shape} != ({cfg.N}, {cfg.LN})")
    total = 0.0
    for p in image_to_points(initial, cfg):
        total += float(final_density[p.i, p.j])
    return total
