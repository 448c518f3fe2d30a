"""Deterministic rasterization of Hebrew text into fixed-geometry images.

Each letter cluster occupies one fixed-advance cell; diacritics are
zero-advance overlays inside the cell, so a diacritized word and its
stripped form always share dimensions.  Images decompose into 16x16 patches
(row-major) that feed the candidate encoder, and can be horizontally
mirrored so right-to-left script reads left-to-right in pixel space.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field, replace

import numpy as np

from . import glyphs, hebrew
from .errors import ConfigurationError, MissingGlyph, TooWide

PATCH_SIZE = 16
DEFAULT_MAX_PATCHES = 529

WHITE = 1.0
INK = 0.0


@dataclass(frozen=True)
class RenderConfig:
    cell_height: int = 16
    advance_width: int = 16
    max_patches: int = DEFAULT_MAX_PATCHES
    glyph_source: str = "embedded-v1"

    def __post_init__(self):
        for name in ("cell_height", "advance_width"):
            value = getattr(self, name)
            if value <= 0 or value % PATCH_SIZE != 0:
                raise ConfigurationError(
                    f"{name} must be a positive multiple of {PATCH_SIZE}"
                )
        if self.max_patches < 1:
            raise ConfigurationError("max_patches must be >= 1")

    def to_dict(self) -> dict:
        return {
            "cell_height": self.cell_height,
            "advance_width": self.advance_width,
            "max_patches": self.max_patches,
            "glyph_source": self.glyph_source,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RenderConfig":
        return cls(**data)


class EmbeddedBitmapFace:
    """The built-in face: unit-scale pixel sets, integer-upscaled to the cell.

    Substituting a real font rasterizer (e.g. a PangoCairo pipeline) means
    implementing the same two methods behind ``register_glyph_source``.
    """

    def has_glyph(self, ch: str) -> bool:
        return glyphs.has_glyph(ch)

    def cell_bitmap(self, base: str | None, marks: tuple[str, ...],
                    cell_height: int, advance_width: int,
                    strict: bool = False) -> np.ndarray:
        """Boolean ink mask of shape (cell_height, advance_width)."""
        pixels: set[tuple[int, int]] = set()
        if base is not None:
            base_pix = glyphs.base_pixels(base)
            if base_pix is None:
                if strict:
                    raise MissingGlyph(f"no glyph for {base!r} (U+{ord(base):04X})")
                base_pix = glyphs.REPLACEMENT_BOX
            pixels |= base_pix
        for mark in marks:
            pixels |= glyphs.MARK_PIXELS[mark]

        sy = cell_height // PATCH_SIZE
        sx = advance_width // PATCH_SIZE
        mask = np.zeros((cell_height, advance_width), dtype=bool)
        for r, c in pixels:
            mask[r * sy:(r + 1) * sy, c * sx:(c + 1) * sx] = True
        return mask


_GLYPH_SOURCES = {"embedded-v1": EmbeddedBitmapFace()}


def register_glyph_source(name: str, provider) -> None:
    _GLYPH_SOURCES[name] = provider


def get_glyph_source(name: str):
    try:
        return _GLYPH_SOURCES[name]
    except KeyError:
        raise ConfigurationError(f"unknown glyph source {name!r}") from None


@dataclass(frozen=True)
class RenderedImage:
    """Fixed-height grayscale raster; white background 1.0, ink 0.0."""

    pixels: np.ndarray
    truncated: bool = False
    config: RenderConfig = field(default_factory=RenderConfig)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def patch_count(self) -> int:
        return (self.height // PATCH_SIZE) * (self.width // PATCH_SIZE)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RenderedImage):
            return NotImplemented
        return (self.truncated == other.truncated
                and np.array_equal(self.pixels, other.pixels))


def _scan_cells(text: str) -> list[tuple[str | None, tuple[str, ...]]]:
    """Split text into render cells: (base or None, attached marks).

    Hebrew letters anchor cells and absorb following marks; every other
    non-combining character is its own cell; stray marks with no preceding
    letter get a bare-mark cell; out-of-inventory combining marks vanish.
    """
    cells: list[tuple[str | None, tuple[str, ...]]] = []
    base: str | None = None
    marks: list[str] = []
    pending = False

    def flush():
        nonlocal base, marks, pending
        if pending:
            cells.append((base, tuple(sorted(set(marks)))))
        base, marks, pending = None, [], False

    for ch in unicodedata.normalize("NFD", text):
        if hebrew.is_hebrew_letter(ch):
            flush()
            base, pending = ch, True
        elif hebrew.is_supported_mark(ch):
            mark = hebrew.HOLAM if ch == hebrew.HOLAM_HASER_VAV else ch
            if not pending:
                base, pending = None, True
            marks.append(mark)
        elif unicodedata.combining(ch) != 0:
            continue
        else:
            flush()
            cells.append((ch, ()))
    flush()
    return cells


def render_text(text: str, config: RenderConfig | None = None, *,
                truncate: bool = False, strict: bool = False) -> RenderedImage:
    """Rasterize text deterministically: one fixed-advance cell per cluster.

    Raises TooWide when the patch budget is exceeded, unless ``truncate`` is
    set, in which case surplus cells are dropped and the image is flagged.
    """
    config = config or RenderConfig()
    provider = get_glyph_source(config.glyph_source)
    cells = _scan_cells(text)

    patches_per_cell = ((config.cell_height // PATCH_SIZE)
                        * (config.advance_width // PATCH_SIZE))
    max_cells = config.max_patches // patches_per_cell
    truncated = False
    if len(cells) > max_cells:
        if not truncate:
            raise TooWide(
                f"{len(cells)} cells need {len(cells) * patches_per_cell} patches; "
                f"budget is {config.max_patches}"
            )
        cells = cells[:max_cells]
        truncated = True
    if not cells:
        cells = [(" ", ())]  # empty text renders one blank cell

    width = len(cells) * config.advance_width
    pixels = np.full((config.cell_height, width), WHITE, dtype=np.float64)
    for i, (base, marks) in enumerate(cells):
        mask = provider.cell_bitmap(base, marks, config.cell_height,
                                    config.advance_width, strict=strict)
        column = slice(i * config.advance_width, (i + 1) * config.advance_width)
        pixels[:, column][mask] = INK
    return RenderedImage(pixels=pixels, truncated=truncated, config=config)


def mirror_rtl(image: RenderedImage) -> RenderedImage:
    """Horizontal flip of the full raster: (r, col) -> (r, width-1-col)."""
    return replace(image, pixels=np.ascontiguousarray(image.pixels[:, ::-1]))


def patchify(image: RenderedImage) -> np.ndarray:
    """Row-major 16x16 patches, each flattened row-major to 256 values."""
    h, w = image.pixels.shape
    if h % PATCH_SIZE or w % PATCH_SIZE:
        raise ConfigurationError("image dimensions must be multiples of 16")
    rows, cols = h // PATCH_SIZE, w // PATCH_SIZE
    blocks = image.pixels.reshape(rows, PATCH_SIZE, cols, PATCH_SIZE)
    return blocks.transpose(0, 2, 1, 3).reshape(rows * cols, PATCH_SIZE * PATCH_SIZE)


def unpatchify(patches: np.ndarray, height: int, width: int) -> np.ndarray:
    """Inverse of :func:`patchify` for a raster of known dimensions."""
    rows, cols = height // PATCH_SIZE, width // PATCH_SIZE
    blocks = patches.reshape(rows, cols, PATCH_SIZE, PATCH_SIZE)
    return blocks.transpose(0, 2, 1, 3).reshape(height, width)


# --- debug dumps -------------------------------------------------------------

def to_pgm(image: RenderedImage) -> bytes:
    """Plain (P2) PGM, 0 = ink, 255 = white."""
    levels = np.rint(image.pixels * 255).astype(np.uint8)
    lines = [f"P2", f"{image.width} {image.height}", "255"]
    for row in levels:
        lines.append(" ".join(str(v) for v in row))
    return ("\n".join(lines) + "\n").encode("ascii")


def save_image(image: RenderedImage, path) -> None:
    """PGM or PNG dump selected by file extension."""
    path = str(path)
    if path.endswith(".pgm"):
        with open(path, "wb") as fh:
            fh.write(to_pgm(image))
    elif path.endswith(".png"):
        from PIL import Image

        levels = np.rint(image.pixels * 255).astype(np.uint8)
        Image.fromarray(levels, mode="L").save(path)
    else:
        raise ConfigurationError(f"unsupported image extension: {path!r}")
