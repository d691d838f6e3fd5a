"""Event stream container and file formats.

The canonical interchange format is header-less CSV with one ``x,y,t,p``
line per event (timestamps in microseconds, non-decreasing).  A binary
decoder for the public 34x34 digit recordings (5 bytes per event) is
provided for dataset ingestion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import DataError

MAX_TIMESTAMP = (1 << 63) - 1


@dataclass(frozen=True)
class SensorGeometry:
    """Pixel-array dimensions of the sensor (rows x cols)."""

    n_rows: int = 180
    n_cols: int = 240

    def __post_init__(self) -> None:
        if self.n_rows <= 0 or self.n_cols <= 0:
            raise DataError(f"sensor geometry must be positive, got {self.n_rows}x{self.n_cols}")

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.n_cols and 0 <= y < self.n_rows


#: Geometry of the public N-MNIST recordings.
NMNIST_GEOMETRY = SensorGeometry(n_rows=34, n_cols=34)


@dataclass(frozen=True)
class Event:
    """One camera spike: pixel location, microsecond timestamp, polarity."""

    x: int
    y: int
    t: int
    p: int


class EventStream:
    """Ordered event sequence over a fixed geometry, stored as column arrays.

    Timestamps are non-decreasing across the sequence; coordinates lie
    within the geometry.  Instances are treated as immutable.
    """

    __slots__ = ("geometry", "x", "y", "t", "p")

    def __init__(
        self,
        geometry: SensorGeometry,
        x: np.ndarray,
        y: np.ndarray,
        t: np.ndarray,
        p: np.ndarray,
        *,
        validate: bool = True,
    ) -> None:
        self.geometry = geometry
        self.x = np.ascontiguousarray(x, dtype=np.int64)
        self.y = np.ascontiguousarray(y, dtype=np.int64)
        self.t = np.ascontiguousarray(t, dtype=np.int64)
        self.p = np.ascontiguousarray(p, dtype=np.int64)
        if not (len(self.x) == len(self.y) == len(self.t) == len(self.p)):
            raise DataError("event stream columns must have equal length")
        if validate:
            self.validate()

    @classmethod
    def from_events(cls, geometry: SensorGeometry, events: Iterable[Event | tuple]) -> "EventStream":
        rows = [(e.x, e.y, e.t, e.p) if isinstance(e, Event) else tuple(e) for e in events]
        if rows:
            arr = np.asarray(rows, dtype=np.int64).reshape(len(rows), 4)
        else:
            arr = np.empty((0, 4), dtype=np.int64)
        return cls(geometry, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])

    def validate(self) -> None:
        n = len(self.x)
        if n == 0:
            return
        geo = self.geometry
        bad = np.flatnonzero(
            (self.x < 0) | (self.x >= geo.n_cols) | (self.y < 0) | (self.y >= geo.n_rows)
        )
        if bad.size:
            i = int(bad[0])
            raise DataError(
                f"event {i}: coordinate ({int(self.x[i])},{int(self.y[i])}) outside "
                f"{geo.n_cols}x{geo.n_rows} sensor"
            )
        if np.any(self.t < 0):
            i = int(np.flatnonzero(self.t < 0)[0])
            raise DataError(f"event {i}: negative timestamp {int(self.t[i])}")
        reg = np.flatnonzero(np.diff(self.t) < 0)
        if reg.size:
            i = int(reg[0]) + 1
            raise DataError(
                f"event {i}: timestamp regression {int(self.t[i])} after {int(self.t[i - 1])}"
            )
        badp = np.flatnonzero((self.p != 0) & (self.p != 1))
        if badp.size:
            i = int(badp[0])
            raise DataError(f"event {i}: polarity must be 0 or 1, got {int(self.p[i])}")

    def __len__(self) -> int:
        return len(self.x)

    def __iter__(self) -> Iterator[Event]:
        xs, ys, ts, ps = self.x.tolist(), self.y.tolist(), self.t.tolist(), self.p.tolist()
        for i in range(len(xs)):
            yield Event(xs[i], ys[i], ts[i], ps[i])

    def __getitem__(self, i: int) -> Event:
        return Event(int(self.x[i]), int(self.y[i]), int(self.t[i]), int(self.p[i]))

    def slice(self, index: np.ndarray) -> "EventStream":
        """Subsequence selected by a sorted index array (no re-validation)."""
        return EventStream(
            self.geometry, self.x[index], self.y[index], self.t[index], self.p[index],
            validate=False,
        )


def parse_csv(data: bytes | str, geometry: SensorGeometry) -> EventStream:
    """Parse header-less ``x,y,t,p`` lines, validating bounds and ordering.

    Errors carry 1-based line numbers.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    xs: list[int] = []
    ys: list[int] = []
    ts: list[int] = []
    ps: list[int] = []
    prev_t = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise DataError(f"line {lineno}: expected 4 comma-separated fields, got {len(parts)}")
        try:
            x, y, t, p = (int(v) for v in parts)
        except ValueError:
            raise DataError(f"line {lineno}: non-integer field in {line!r}") from None
        if not geometry.contains(x, y):
            raise DataError(
                f"line {lineno}: coordinate ({x},{y}) outside "
                f"{geometry.n_cols}x{geometry.n_rows} sensor"
            )
        if t < 0 or t > MAX_TIMESTAMP:
            raise DataError(f"line {lineno}: timestamp {t} out of range")
        if t < prev_t:
            raise DataError(f"line {lineno}: timestamp regression {t} after {prev_t}")
        if p not in (0, 1):
            raise DataError(f"line {lineno}: polarity must be 0 or 1, got {p}")
        xs.append(x)
        ys.append(y)
        ts.append(t)
        ps.append(p)
        prev_t = t
    return EventStream(
        geometry,
        np.asarray(xs, dtype=np.int64),
        np.asarray(ys, dtype=np.int64),
        np.asarray(ts, dtype=np.int64),
        np.asarray(ps, dtype=np.int64),
        validate=False,
    )


def write_csv(stream: EventStream) -> str:
    """Inverse of :func:`parse_csv`; reproduces field values exactly."""
    xs, ys, ts, ps = stream.x.tolist(), stream.y.tolist(), stream.t.tolist(), stream.p.tolist()
    lines = [f"{xs[i]},{ys[i]},{ts[i]},{ps[i]}" for i in range(len(xs))]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_nmnist_bin(data: bytes) -> EventStream:
    """Decode the public N-MNIST binary recording format.

    5 bytes per event: byte0 = x, byte1 = y, byte2 bit 7 = polarity, and the
    remaining 23 bits (byte2 bits 6..0, byte3, byte4, big-endian) are the
    timestamp in microseconds.
    """
    raw = np.frombuffer(data, dtype=np.uint8)
    if raw.size % 5 != 0:
        raise DataError(f"truncated record: {raw.size} bytes is not a multiple of 5")
    rec = raw.reshape(-1, 5).astype(np.int64)
    x = rec[:, 0]
    y = rec[:, 1]
    p = rec[:, 2] >> 7
    t = ((rec[:, 2] & 0x7F) << 16) | (rec[:, 3] << 8) | rec[:, 4]
    return EventStream(NMNIST_GEOMETRY, x, y, t, p)
