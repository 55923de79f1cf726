"""Image decoding, grayscale conversion, histograms, and view splitting.

The scanner takes one photo containing two views of the same foot, divided
by a bright horizontal LED band: side view above, under view (through the
glass) below. Everything downstream works on 8-bit grayscale arrays.
"""

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import BandNotFound, DecodeError, UnsupportedFormat

# Integer Rec.601 luma, round half up. Kept integral so conversion is
# bit-reproducible across platforms: gray = (299 R + 587 G + 114 B + 500) // 1000.
_LUMA = (299, 587, 114)


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image. The pixel array is validated and frozen."""

    pixels: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pixels)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-d array, got shape {a.shape}")
        if a.dtype != np.uint8:
            if not np.issubdtype(a.dtype, np.integer):
                raise ValueError(f"expected integer pixels, got {a.dtype}")
            if a.size and (a.min() < 0 or a.max() > 255):
                raise ValueError("pixel values outside [0, 255]")
            a = a.astype(np.uint8)
        else:
            a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "pixels", a)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class Mask:
    """Boolean acceptance mask with the same grid as its source image."""

    accepted: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.accepted)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-d array, got shape {a.shape}")
        a = a.astype(bool).copy()
        a.flags.writeable = False
        object.__setattr__(self, "accepted", a)

    @property
    def height(self) -> int:
        return self.accepted.shape[0]

    @property
    def width(self) -> int:
        return self.accepted.shape[1]

    def count(self) -> int:
        return int(np.count_nonzero(self.accepted))


@dataclass(frozen=True)
class Histogram:
    """256-bin intensity histogram."""

    bins: np.ndarray
    total: int

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=np.int64)
        if b.shape != (256,):
            raise ValueError(f"expected 256 bins, got shape {b.shape}")
        if b.min() < 0:
            raise ValueError("negative bin count")
        if int(b.sum()) != self.total:
            raise ValueError("total does not match bin sum")
        b = b.copy()
        b.flags.writeable = False
        object.__setattr__(self, "bins", b)


@dataclass(frozen=True)
class ViewPair:
    """Side and under views cut from one photo.

    split_row is the band center row in source coordinates; band_height is
    how many source rows the divider consumed (0 for a fixed split).
    """

    side: GrayImage
    under: GrayImage
    split_row: int
    band_height: int


def to_gray(rgb: np.ndarray) -> np.ndarray:
    """Integer luma conversion of an (H, W, 3) uint8 array."""
    r = rgb[:, :, 0].astype(np.int32)
    g = rgb[:, :, 1].astype(np.int32)
    b = rgb[:, :, 2].astype(np.int32)
    return ((_LUMA[0] * r + _LUMA[1] * g + _LUMA[2] * b + 500) // 1000).astype(np.uint8)


def _rescale_16bit(a: np.ndarray) -> np.ndarray:
    # round half up: v * 255 / 65535
    v = a.astype(np.int64)
    return ((v * 255 + 32767) // 65535).astype(np.uint8)


def load_gray(data: bytes) -> GrayImage:
    """Decode PNG or JPEG bytes into a GrayImage.

    Color images go through the integer luma conversion; 16-bit grayscale is
    rescaled to 8-bit with round-half-up. Alpha channels are ignored.
    Raises DecodeError for undecodable bytes and UnsupportedFormat for other
    container formats or pixel modes.
    """
    try:
        im = Image.open(io.BytesIO(data))
        fmt = im.format
        im.load()
    except UnidentifiedImageError as e:
        raise DecodeError("input is not a decodable image") from e
    except OSError as e:
        raise DecodeError(f"image data is corrupt or truncated: {e}") from e

    if fmt not in ("PNG", "JPEG"):
        raise UnsupportedFormat(f"unsupported container format: {fmt}")

    mode = im.mode
    if mode == "L":
        arr = np.asarray(im, dtype=np.uint8)
    elif mode == "1":
        arr = np.asarray(im.convert("L"), dtype=np.uint8)
    elif mode == "LA":
        arr = np.asarray(im)[:, :, 0].astype(np.uint8)
    elif mode in ("RGB", "RGBA"):
        arr = to_gray(np.asarray(im)[:, :, :3])
    elif mode == "P":
        arr = to_gray(np.asarray(im.convert("RGB")))
    elif mode in ("I", "I;16", "I;16B", "I;16L"):
        raw = np.asarray(im)
        if raw.size and (raw.min() < 0 or raw.max() > 65535):
            raise UnsupportedFormat("integer image exceeds 16-bit range")
        arr = _rescale_16bit(raw)
    else:
        raise UnsupportedFormat(f"unsupported pixel mode: {mode}")

    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DecodeError("decoded image is empty")
    return GrayImage(arr)


def gray_to_png(img: GrayImage) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(img.pixels, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def mask_to_png(mask: Mask) -> bytes:
    """Accepted pixels encode as 255, rejected as 0."""
    buf = io.BytesIO()
    arr = mask.accepted.astype(np.uint8) * 255
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def mask_from_png(data: bytes) -> Mask:
    img = load_gray(data)
    return Mask(img.pixels > 0)


def histogram(img: GrayImage) -> Histogram:
    bins = np.bincount(img.pixels.reshape(-1), minlength=256).astype(np.int64)
    return Histogram(bins=bins, total=int(bins.sum()))


def split_views(img: GrayImage, split_row: int | None = None, *, band_thickness: int = 3) -> ViewPair:
    """Cut a two-view photo at the LED divider band.

    With split_row given, the cut is exactly there and no band is consumed.
    Otherwise the band is auto-detected as the band_thickness-row window
    with the highest mean brightness; that mean must exceed the whole-image
    mean by two standard deviations, and both resulting views must be
    non-empty, else BandNotFound.
    """
    a = img.pixels
    h = img.height

    if split_row is not None:
        if not 1 <= split_row <= h - 1:
            raise BandNotFound(f"fixed split row {split_row} leaves an empty view")
        return ViewPair(
            side=GrayImage(a[:split_row]),
            under=GrayImage(a[split_row:]),
            split_row=split_row,
            band_height=0,
        )

    k = band_thickness
    if k < 1 or h < k + 2:
        raise BandNotFound(f"image of height {h} cannot hold a {k}-row band and two views")

    row_means = a.mean(axis=1)
    # mean of each k-row window
    csum = np.concatenate([[0.0], np.cumsum(row_means)])
    window = (csum[k:] - csum[:-k]) / k
    top = int(np.argmax(window))

    floor = float(a.mean()) + 2.0 * float(a.std())
    if window[top] <= floor:
        raise BandNotFound(
            f"brightest {k}-row band ({window[top]:.1f}) does not clear mean+2*std ({floor:.1f})"
        )
    if top < 1 or top + k > h - 1:
        raise BandNotFound("divider band touches the image edge")

    return ViewPair(
        side=GrayImage(a[:top]),
        under=GrayImage(a[top + k:]),
        split_row=top + k // 2,
        band_height=k,
    )
