"""Feature vectors, the portable on-disk feature store, and the built-in
baseline extractor.

Deep features enter the pipeline only through SNOWFEAT store files (the
cross-component contract); this module never touches network weights. The
baseline extractor exists so the whole system runs and tests with zero
external model dependencies.

Store payloads are f32 (typical network output precision); the solver upcasts
to f64 internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._binio import ByteReader, ByteWriter, check_magic
from .domain import VALID_CLASS_CODES
from .errors import DataError

STORE_MAGIC = b"SNOWFEAT"
STORE_VERSION = 1

BASELINE_TAG = "baseline112"
BASELINE_DIM = 112
_GRID = 8
_HIST_BINS = 16


@dataclass(frozen=True)
class RasterImage:
    """RGB image, 8-bit channels, shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise DataError(f"expected uint8 pixels of shape (h, w, 3), got {p.dtype} {p.shape}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise DataError("image must have positive dimensions")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def normalize_intensity(img: RasterImage) -> np.ndarray:
    """Map every 8-bit channel value v to v/255; output is float64 in [0, 1]."""
    return img.pixels.astype(np.float64) / 255.0


def baseline_extract(img: RasterImage) -> np.ndarray:
    """Handcrafted 112-d feature vector.

    Concatenates (a) an 8x8 mean-luminance grid over the normalized image
    (luminance = (R+G+B)/3), 64 values, and (b) per-channel 16-bin normalized
    histograms, 48 values, each channel's bins summing to 1. Pure function of
    the pixel content.
    """
    if img.height < _GRID or img.width < _GRID:
        raise DataError(f"image {img.width}x{img.height} is smaller than {_GRID}x{_GRID}")

    norm = normalize_intensity(img)
    lum = norm.mean(axis=2)

    grid = np.empty(_GRID * _GRID, dtype=np.float64)
    row_edges = [(r * img.height) // _GRID for r in range(_GRID + 1)]
    col_edges = [(c * img.width) // _GRID for c in range(_GRID + 1)]
    k = 0
    for r in range(_GRID):
        for c in range(_GRID):
            cell = lum[row_edges[r]:row_edges[r + 1], col_edges[c]:col_edges[c + 1]]
            grid[k] = cell.mean()
            k += 1

    n_pixels = img.height * img.width
    hists = np.empty(3 * _HIST_BINS, dtype=np.float64)
    for ch in range(3):
        bins = img.pixels[:, :, ch].ravel() >> 4  # floor(16 * v / 256)
        counts = np.bincount(bins, minlength=_HIST_BINS)
        hists[ch * _HIST_BINS:(ch + 1) * _HIST_BINS] = counts / n_pixels

    return np.concatenate([grid, hists])


@dataclass(frozen=True, eq=False)
class FeatureStore:
    """Labeled fixed-dimension vectors keyed by u32 record ids.

    ``vectors`` is an (n, dim) float32 matrix; row order matches ``ids`` and
    ``class_codes``.
    """

    dim: int
    source_tag: str
    ids: np.ndarray
    class_codes: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise DataError(f"store dim must be positive, got {self.dim}")
        n = self.ids.shape[0]
        if self.class_codes.shape != (n,) or self.vectors.shape != (n, self.dim):
            raise DataError("store arrays disagree on record count or dimension")
        if np.unique(self.ids).size != n:
            raise DataError("duplicate record ids in store")
        bad = set(np.unique(self.class_codes)) - VALID_CLASS_CODES
        if bad:
            raise DataError(f"invalid class codes in store: {sorted(bad)}")
        if not np.all(np.isfinite(self.vectors)):
            raise DataError("store vectors contain non-finite values")

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    def __eq__(self, other):
        if not isinstance(other, FeatureStore):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.source_tag == other.source_tag
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.class_codes, other.class_codes)
            and self.vectors.tobytes() == other.vectors.tobytes()
        )


def build_store(dim: int, source_tag: str, records) -> FeatureStore:
    """Assemble a store from (id, class_code, vector) triples, casting vectors
    to f32 storage precision. Raises naming the offending record on length
    mismatch."""
    ids, codes, rows = [], [], []
    for rec_id, code, vec in records:
        v = np.asarray(vec, dtype=np.float32).ravel()
        if v.shape[0] != dim:
            raise DataError(f"record {rec_id} has vector length {v.shape[0]}, expected {dim}")
        ids.append(rec_id)
        codes.append(code)
        rows.append(v)
    n = len(ids)
    vectors = np.vstack(rows) if n else np.empty((0, dim), dtype=np.float32)
    return FeatureStore(
        dim=dim,
        source_tag=source_tag,
        ids=np.asarray(ids, dtype=np.uint32),
        class_codes=np.asarray(codes, dtype=np.uint8),
        vectors=vectors,
    )


def write_store(store: FeatureStore) -> bytes:
    w = ByteWriter()
    w.raw(STORE_MAGIC)
    w.u8(STORE_VERSION)
    tag = store.source_tag.encode("utf-8")
    if len(tag) > 0xFFFF:
        raise DataError("source tag too long")
    w.u16(len(tag))
    w.raw(tag)
    w.u32(store.dim)
    w.u32(len(store))
    for i in range(len(store)):
        w.u32(int(store.ids[i]))
        w.u8(int(store.class_codes[i]))
        w.f32_array(store.vectors[i])
    return w.getvalue()


def read_store(data: bytes) -> FeatureStore:
    r = ByteReader(data, "feature store")
    check_magic(r, STORE_MAGIC)
    version = r.u8()
    if version != STORE_VERSION:
        raise DataError(f"unsupported store version {version}")
    tag = r.take(r.u16()).decode("utf-8")
    dim = r.u32()
    n = r.u32()
    if dim < 1:
        raise DataError(f"invalid store dim {dim}")
    ids = np.empty(n, dtype=np.uint32)
    codes = np.empty(n, dtype=np.uint8)
    vectors = np.empty((n, dim), dtype=np.float32)
    for i in range(n):
        ids[i] = r.u32()
        codes[i] = r.u8()
        vectors[i] = r.f32_array(dim)
    r.expect_done()
    return FeatureStore(dim=dim, source_tag=tag, ids=ids, class_codes=codes, vectors=vectors)
