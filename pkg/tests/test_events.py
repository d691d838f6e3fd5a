import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evrect.errors import DataError
from evrect.events import (
    NMNIST_GEOMETRY,
    Event,
    EventStream,
    SensorGeometry,
    parse_csv,
    parse_nmnist_bin,
    write_csv,
)

GEO = SensorGeometry()


def test_parse_csv_two_events_same_pixel():
    stream = parse_csv("3,4,100,1\n3,4,250,0", GEO)
    assert len(stream) == 2
    assert stream[0] == Event(3, 4, 100, 1)
    assert stream[1] == Event(3, 4, 250, 0)


def test_parse_csv_timestamp_regression_reports_line():
    with pytest.raises(DataError, match="line 2"):
        parse_csv("3,4,250,1\n3,4,100,0", GEO)


def test_parse_csv_bounds_error():
    with pytest.raises(DataError, match="line 1"):
        parse_csv("300,4,100,1", GEO)


def test_parse_csv_malformed_line_number():
    with pytest.raises(DataError, match="line 3"):
        parse_csv("1,1,5,0\n1,1,6,0\n1,1\n", GEO)
    with pytest.raises(DataError, match="non-integer"):
        parse_csv("1,1,x,0", GEO)


def test_parse_csv_accepts_bytes_and_blank_lines():
    stream = parse_csv(b"1,2,3,0\n\n4,5,6,1\n", GEO)
    assert len(stream) == 2


def test_parse_csv_bad_polarity():
    with pytest.raises(DataError, match="polarity"):
        parse_csv("1,1,5,2", GEO)


def test_parse_nmnist_bin_single_record():
    stream = parse_nmnist_bin(bytes([0x05, 0x07, 0x80, 0x00, 0x64]))
    assert stream.geometry == NMNIST_GEOMETRY
    assert stream[0] == Event(5, 7, 100, 1)


def test_parse_nmnist_bin_all_zero_record():
    stream = parse_nmnist_bin(bytes(5))
    assert stream[0] == Event(0, 0, 0, 0)


def test_parse_nmnist_bin_truncated():
    with pytest.raises(DataError, match="truncated"):
        parse_nmnist_bin(bytes(7))


def test_parse_nmnist_bin_timestamp_field_width(rng):
    n = 500
    ts = np.sort(rng.integers(0, 1 << 23, size=n))
    recs = bytearray()
    for i in range(n):
        t = int(ts[i])
        recs += bytes(
            [
                int(rng.integers(0, 34)),
                int(rng.integers(0, 34)),
                (int(rng.integers(0, 2)) << 7) | ((t >> 16) & 0x7F),
                (t >> 8) & 0xFF,
                t & 0xFF,
            ]
        )
    stream = parse_nmnist_bin(bytes(recs))
    assert np.array_equal(stream.t, ts)
    assert stream.t.max() < (1 << 23)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.integers(0, 239),
            st.integers(0, 179),
            st.integers(0, 10_000),
            st.integers(0, 1),
        ),
        max_size=40,
    )
)
def test_csv_round_trip(events):
    events = sorted(events, key=lambda e: e[2])
    stream = EventStream.from_events(GEO, events)
    again = parse_csv(write_csv(stream), GEO)
    assert np.array_equal(again.x, stream.x)
    assert np.array_equal(again.y, stream.y)
    assert np.array_equal(again.t, stream.t)
    assert np.array_equal(again.p, stream.p)


def test_write_csv_empty_stream():
    stream = EventStream.from_events(GEO, [])
    assert write_csv(stream) == ""
    assert len(parse_csv("", GEO)) == 0


def test_stream_validation_errors():
    with pytest.raises(DataError, match="outside"):
        EventStream.from_events(GEO, [(250, 0, 0, 0)])
    with pytest.raises(DataError, match="regression"):
        EventStream.from_events(GEO, [(0, 0, 10, 0), (0, 0, 5, 0)])
    with pytest.raises(DataError, match="polarity"):
        EventStream.from_events(GEO, [(0, 0, 10, 7)])
    with pytest.raises(DataError, match="negative"):
        EventStream.from_events(GEO, [(0, 0, -3, 0)])


def test_stream_slice_and_iteration():
    stream = EventStream.from_events(GEO, [(1, 2, 10, 0), (3, 4, 20, 1), (5, 6, 30, 0)])
    sub = stream.slice(np.asarray([0, 2]))
    assert [e.x for e in sub] == [1, 5]
    assert len(sub) == 2


def test_geometry_must_be_positive():
    with pytest.raises(DataError):
        SensorGeometry(n_rows=0, n_cols=10)
