"""Little-endian binary reader/writer helpers shared by the on-disk formats."""

import struct

import numpy as np

from .errors import FormatError


class ByteWriter:
    def __init__(self):
        self._parts = []

    def raw(self, b: bytes):
        self._parts.append(bytes(b))

    def u8(self, v: int):
        self._parts.append(struct.pack("<B", v))

    def u16(self, v: int):
        self._parts.append(struct.pack("<H", v))

    def u32(self, v: int):
        self._parts.append(struct.pack("<I", v))

    def f64(self, v: float):
        self._parts.append(struct.pack("<d", v))

    def f32_array(self, a: np.ndarray):
        self._parts.append(np.ascontiguousarray(a, dtype="<f4").tobytes())

    def f64_array(self, a: np.ndarray):
        self._parts.append(np.ascontiguousarray(a, dtype="<f8").tobytes())

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class ByteReader:
    """Cursor over a bytes payload; every read checks for truncation."""

    def __init__(self, data: bytes, what: str = "payload"):
        self._data = data
        self._pos = 0
        self._what = what

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise FormatError(f"truncated {self._what}: needed {n} bytes at offset {self._pos}")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def f32_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * count), dtype="<f4").astype(np.float32, copy=True)

    def f64_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64, copy=True)

    def expect_done(self):
        if self._pos != len(self._data):
            raise FormatError(f"trailing bytes in {self._what}: {len(self._data) - self._pos} unread")

    @property
    def remaining(self) -> int:
        return len(self._data) - self._pos


def check_magic(reader: ByteReader, magic: bytes):
    """Validate an 8-byte magic; a matching stem with a wrong final version digit
    is reported as a version mismatch rather than a bad magic."""
    got = reader.take(len(magic))
    if got == magic:
        return
    if got[:-1] == magic[:-1]:
        raise FormatError(f"unsupported format version {got!r}, expected {magic!r}")
    raise FormatError(f"bad magic {got!r}, expected {magic!r}")
