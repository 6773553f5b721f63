"""8-bit grayscale image I/O (binary PGM) and fixed-size block tiling.

Pixels are kept as float64 on the 0-255 scale. Blocks are stored as the rows
of a ``(n_blocks, B*B)`` array, each block flattened row-major and blocks
ordered row-major over the block grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Image",
    "BlockLayout",
    "BlockSet",
    "PGMError",
    "load_pgm",
    "save_pgm",
    "parse_pgm",
    "encode_pgm",
    "to_blocks",
    "from_blocks",
]


class PGMError(ValueError):
    """Malformed or unsupported PGM data.

    ``field`` names the header field or section that failed to parse.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class Image:
    """Grayscale raster, ``pixels`` has shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"image pixels must be a non-empty 2-D array, got shape {px.shape}")
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_data(cls, width: int, height: int, data) -> "Image":
        data = np.asarray(data, dtype=np.float64).ravel()
        if data.size != width * height:
            raise ValueError(f"data length {data.size} != {width}x{height}")
        return cls(data.reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Row-major flat view of the pixels."""
        return self.pixels.ravel()

    def clipped(self) -> "Image":
        return Image(np.clip(self.pixels, 0.0, 255.0))

    def is_clipped(self) -> bool:
        return bool(np.all((self.pixels >= 0.0) & (self.pixels <= 255.0)))


# --------------------------------------------------------------------- PGM

_WHITESPACE = b" \t\n\r\v\f"


def _next_token(buf: bytes, pos: int, field: str) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        ch = buf[pos : pos + 1]
        if ch in _WHITESPACE:
            pos += 1
        elif ch == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and buf[pos : pos + 1] not in _WHITESPACE and buf[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PGMError(field, "unexpected end of header")
    return buf[start:pos], pos


def _int_token(buf: bytes, pos: int, field: str) -> tuple[int, int]:
    tok, pos = _next_token(buf, pos, field)
    if not tok.isdigit():
        raise PGMError(field, f"non-numeric header token {tok!r}")
    return int(tok), pos


def parse_pgm(buf: bytes) -> Image:
    """Parse the bytes of a binary (P5) PGM with maxval 255."""
    if buf[:2] != b"P5":
        raise PGMError("magic", f"expected P5, got {buf[:2]!r}")
    pos = 2
    if pos < len(buf) and buf[pos : pos + 1] not in _WHITESPACE + b"#":
        raise PGMError("magic", f"expected P5, got {buf[:3]!r}")
    width, pos = _int_token(buf, pos, "width")
    height, pos = _int_token(buf, pos, "height")
    maxval, pos = _int_token(buf, pos, "maxval")
    if width < 1 or height < 1:
        raise PGMError("width" if width < 1 else "height", "dimensions must be positive")
    if maxval != 255:
        raise PGMError("maxval", f"unsupported maxval {maxval}")
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(buf) or buf[pos : pos + 1] not in _WHITESPACE:
        raise PGMError("payload", "missing whitespace after maxval")
    pos += 1
    need = width * height
    payload = buf[pos : pos + need]
    if len(payload) < need:
        raise PGMError("payload", f"truncated pixel payload: {len(payload)} of {need} bytes")
    px = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return Image(px.astype(np.float64))


def load_pgm(path) -> Image:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def encode_pgm(image: Image) -> bytes:
    # nearest integer, ties upward (np.rint would round half to even)
    px = np.floor(image.pixels + 0.5)
    px = np.clip(px, 0, 255).astype(np.uint8)
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + px.tobytes()


def save_pgm(image: Image, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(image))


# ------------------------------------------------------------------ blocks


@dataclass(frozen=True)
class BlockLayout:
    block_size: int
    original_width: int
    original_height: int
    blocks_x: int
    blocks_y: int

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.padded_width < self.original_width or self.padded_height < self.original_height:
            raise ValueError("block grid does not cover the original image")

    @classmethod
    def for_image(cls, width: int, height: int, block_size: int) -> "BlockLayout":
        if block_size < 1:
            raise ValueError("block_size must be >= 1")
        return cls(
            block_size=block_size,
            original_width=width,
            original_height=height,
            blocks_x=math.ceil(width / block_size),
            blocks_y=math.ceil(height / block_size),
        )

    @property
    def padded_width(self) -> int:
        return self.blocks_x * self.block_size

    @property
    def padded_height(self) -> int:
        return self.blocks_y * self.block_size

    @property
    def n_blocks(self) -> int:
        return self.blocks_x * self.blocks_y

    @property
    def dim(self) -> int:
        return self.block_size * self.block_size


@dataclass(frozen=True)
class BlockSet:
    layout: BlockLayout
    blocks: np.ndarray  # (n_blocks, D)

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=np.float64)
        if b.ndim != 2 or b.shape[0] != self.layout.n_blocks:
            raise ValueError(
                f"expected {self.layout.n_blocks} blocks for a "
                f"{self.layout.blocks_x}x{self.layout.blocks_y} layout, got "
                f"{b.shape[0] if b.ndim == 2 else b.shape}"
            )
        if b.shape[1] != self.layout.dim:
            raise ValueError(f"block dimension {b.shape[1]} != {self.layout.dim}")
        object.__setattr__(self, "blocks", b)

    def with_blocks(self, blocks) -> "BlockSet":
        return BlockSet(self.layout, blocks)


def _pad_axis(px: np.ndarray, pad: int, axis: int) -> np.ndarray:
    if pad == 0:
        return px
    width = [(0, 0), (0, 0)]
    width[axis] = (0, pad)
    # 'reflect' excludes the border pixel and needs pad <= n - 1
    mode = "reflect" if pad <= px.shape[axis] - 1 else "edge"
    return np.pad(px, width, mode=mode)


def to_blocks(image: Image, block_size: int = 32) -> BlockSet:
    layout = BlockLayout.for_image(image.width, image.height, block_size)
    B = block_size
    px = _pad_axis(image.pixels, layout.padded_height - image.height, 0)
    px = _pad_axis(px, layout.padded_width - image.width, 1)
    blocks = (
        px.reshape(layout.blocks_y, B, layout.blocks_x, B)
        .transpose(0, 2, 1, 3)
        .reshape(layout.n_blocks, B * B)
    )
    return BlockSet(layout, blocks.copy())


def from_blocks(blockset: BlockSet) -> Image:
    lay = blockset.layout
    B = lay.block_size
    if blockset.blocks.shape != (lay.n_blocks, lay.dim):
        raise ValueError("blocks do not match layout")
    px = (
        blockset.blocks.reshape(lay.blocks_y, lay.blocks_x, B, B)
        .transpose(0, 2, 1, 3)
        .reshape(lay.padded_height, lay.padded_width)
    )
    return Image(px[: lay.original_height, : lay.original_width])
