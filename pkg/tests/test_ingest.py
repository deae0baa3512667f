import pytest
from hypothesis import given
from hypothesis import strategies as st

from alarmsim.ingest import (
    AlarmEvent,
    AlarmLogError,
    Mode,
    TimeGrid,
    group_by_tag,
    infer_grid,
    parse_alarm_log,
    serialize_alarm_log,
)

HEADER = b"tag,timestamp,kind,event_type\n"


def ev(tag, t, kind="HI", etype="ALM"):
    return AlarmEvent(tag, t * 1000, kind, etype)


def test_parse_single_row():
    events, diags = parse_alarm_log(HEADER + b"T1,1000,HI,ALM\n")
    assert events == [AlarmEvent("T1", 1_000_000, "HI", "ALM")]
    assert events[0].timestamp == 1000.0
    assert diags == []


def test_parse_empty_body():
    assert parse_alarm_log(HEADER) == ([], [])


def test_unknown_kind_reports_line():
    events, diags = parse_alarm_log(HEADER + b"T1,1000,XX,ALM\n")
    assert events == []
    assert len(diags) == 1 and diags[0].line == 2
    assert "XX" in diags[0].message


@pytest.mark.parametrize(
    "row, fragment",
    [(b"T1,abc,HI,ALM", "timestamp"), (b"T1,10,HI,ACK", "ACK"), (b"T1,10,HI", "fields"), (b"T1,-5,HI,ALM", "negative")],
)
def test_row_errors(row, fragment):
    events, diags = parse_alarm_log(HEADER + b"T1,1,LO,ALM\n" + row + b"\n")
    assert len(events) == 1
    assert diags[0].line == 3 and fragment in diags[0].message


def test_missing_header_and_column():
    with pytest.raises(AlarmLogError):
        parse_alarm_log(b"")
    with pytest.raises(AlarmLogError, match="event_type"):
        parse_alarm_log(b"tag,timestamp,kind\nT1,1,HI\n")


def test_iso_timestamps_and_schema_mapping():
    data = "Tag,Time,Type,Msg\nP1,2021-01-01T00:00:10Z,LL,ALM\nP1,2021-01-01T00:00:12.5+00:00,LL,RTN\n"
    events, diags = parse_alarm_log(data, {"tag": "Tag", "timestamp": "Time", "kind": "Type", "event_type": "Msg"})
    assert not diags
    assert events[1].timestamp_ms - events[0].timestamp_ms == 2500
    assert events[0].timestamp_ms == 1609459210000


def test_round_trip_fixed_example():
    events = [ev("A", 5), ev("B", 7, "LL"), AlarmEvent("A", 9_250, "HI", "RTN")]
    parsed, diags = parse_alarm_log(serialize_alarm_log(events))
    assert parsed == events and not diags


event_strategy = st.builds(
    AlarmEvent,
    st.text(alphabet="ABCXYZ_0123", min_size=1, max_size=6),
    st.integers(0, 4_000_000_000_000),
    st.sampled_from(["HH", "HI", "LO", "LL"]),
    st.sampled_from(["ALM", "RTN"]),
)


@given(st.lists(event_strategy, max_size=30))
def test_round_trip_property(events):
    parsed, diags = parse_alarm_log(serialize_alarm_log(events))
    assert parsed == events and not diags


def test_group_modes():
    logs, diags = group_by_tag([ev("T1", 10), ev("T1", 20, etype="RTN")])
    assert logs["T1"].mode is Mode.INTERVAL and not diags
    logs, _ = group_by_tag([ev("T1", 10), ev("T1", 30)])
    assert logs["T1"].mode is Mode.POINT


def test_unmatched_rtn_dropped_with_warning():
    logs, diags = group_by_tag([ev("T1", 5, etype="RTN")])
    assert logs["T1"].events == ()
    assert len(diags) == 1 and diags[0].severity == "warning"


def test_group_sorts_with_stable_ties():
    a, b, c = ev("T", 30), ev("T", 10, "LO"), ev("T", 10, "HH")
    logs, _ = group_by_tag([a, b, c])
    assert logs["T"].events == (b, c, a)


@given(st.lists(event_strategy, max_size=40))
def test_group_preserves_valid_events(events):
    logs, diags = group_by_tag(events)
    kept = [e for log in logs.values() for e in log.events]
    assert len(kept) + len(diags) == len(events)
    assert all(e.tag_id == tag for tag, log in logs.items() for e in log.events)
    for log in logs.values():
        times = [e.timestamp_ms for e in log.events]
        assert times == sorted(times)
        assert (log.mode is Mode.INTERVAL) == any(e.event_type == "RTN" for e in log.events)


def test_infer_grid_examples():
    logs, _ = group_by_tag([ev("A", 10), ev("B", 100)])
    g = infer_grid(logs.values(), 1.0)
    assert (g.start, g.length) == (9.0, 93)
    logs, _ = group_by_tag([ev("A", 50)])
    g = infer_grid(logs.values(), 5.0)
    assert (g.start, g.length) == (45.0, 3)


def test_infer_grid_errors():
    logs, _ = group_by_tag([ev("A", 50)])
    with pytest.raises(ValueError):
        infer_grid(logs.values(), 0)
    with pytest.raises(ValueError, match="empty log"):
        infer_grid([], 1.0)


@given(st.lists(st.integers(0, 10**9), min_size=1, max_size=20), st.integers(1, 60_000))
def test_infer_grid_covers_every_event(times_ms, res_ms):
    logs, _ = group_by_tag([AlarmEvent("A", t, "HI", "ALM") for t in times_ms])
    g = infer_grid(logs.values(), res_ms / 1000)
    for t in times_ms:
        assert 0 <= g.index_of(t) < g.length


def test_time_grid_bijection():
    g = TimeGrid.from_seconds(100, 0.5, 10)
    for i in range(10):
        assert g.index_of(round(g.time_of(i) * 1000)) == i
    with pytest.raises(ValueError):
        g.index_of(99_000)
    with pytest.raises(ValueError):
        TimeGrid(0, 0, 5)
