import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from alarmsim.analytic import GaussianPVSpec
from alarmsim.ingest import AlarmEvent, TimeGrid, group_by_tag
from alarmsim.sequences import (
    BinarySequence,
    MultivaluedSequence,
    PrecedenceWarning,
    binarize_ia,
    build_multivalued,
    combine_ca_binary,
    pad,
    padding_for,
    read_sequence_csv,
    shift,
    threshold_pv,
    write_sequence_csv,
)
from oracles import dilate_set, ones

S1 = "01000100100000100"
S2 = "00100010001000010"
GRID17 = TimeGrid(0, 1000, 17)


def B(bits, grid=None):
    return BinarySequence.from_string(bits, "t", grid)


def test_point_based_example():
    events = [AlarmEvent("T", i * 1000, "HI", "ALM") for i in (1, 5, 8, 14)]
    logs, _ = group_by_tag(events)
    assert str(binarize_ia(logs["T"], "HI", GRID17)) == S1


def test_interval_fill_and_open_alarm():
    g = TimeGrid(0, 1000, 8)
    logs, _ = group_by_tag([AlarmEvent("T", 2000, "HI", "ALM"), AlarmEvent("T", 5000, "HI", "RTN")])
    assert str(binarize_ia(logs["T"], "HI", g)) == "00111000"
    logs, _ = group_by_tag(
        [AlarmEvent("T", 1000, "LO", "ALM"), AlarmEvent("T", 2000, "LO", "RTN"), AlarmEvent("T", 6000, "LO", "ALM")]
    )
    assert str(binarize_ia(logs["T"], "LO", g)) == "01000011"


def test_interval_same_sample_and_reannunciation():
    g = TimeGrid(0, 1000, 6)
    logs, _ = group_by_tag(
        [
            AlarmEvent("T", 1000, "HH", "ALM"),
            AlarmEvent("T", 1400, "HH", "RTN"),
            AlarmEvent("T", 3000, "HH", "ALM"),
            AlarmEvent("T", 3500, "HH", "ALM"),
            AlarmEvent("T", 5000, "HH", "RTN"),
        ]
    )
    assert str(binarize_ia(logs["T"], "HH", g)) == "010110"


def test_empty_log_and_off_grid():
    logs, _ = group_by_tag([AlarmEvent("T", 99_000, "HI", "ALM")])
    assert str(binarize_ia(logs["T"], "LL", GRID17)) == "0" * 17
    with pytest.raises(ValueError):
        binarize_ia(logs["T"], "HI", GRID17)


def test_combine():
    assert str(combine_ca_binary([B("0100"), B("0010")])) == "0110"
    assert str(combine_ca_binary([B("1001")])) == "1001"
    assert str(combine_ca_binary([B("0000")] * 4)) == "0000"
    with pytest.raises(ValueError):
        combine_ca_binary([B("0100"), B("0100", TimeGrid(5, 1000, 4))])


def test_pad_textbook_example():
    expected = dilate_set(ones(S1), 1, len(S1))
    assert expected == {0, 1, 2, 4, 5, 6, 7, 8, 9, 13, 14, 15}
    assert ones(str(pad(B(S1), 1))) == expected


def test_pad_trivial():
    assert pad(B(S1), 0) == B(S1)
    assert str(pad(B("0" * 9), 4)) == "0" * 9
    assert str(pad(B("0001000"), 100)) == "1" * 7
    with pytest.raises(ValueError):
        pad(B(S1), -1)


bits = st.text(alphabet="01", min_size=1, max_size=40)


@given(bits, st.integers(0, 10), st.integers(0, 10))
def test_pad_properties(b, r1, r2):
    s = B(b)
    once = pad(s, r1)
    assert ones(b) <= ones(str(once))
    assert pad(once, r2) == pad(s, r1 + r2)
    assert ones(str(once)) == dilate_set(ones(b), r1, len(b))


def test_padding_defaults():
    assert padding_for("temperature") == 60
    assert padding_for("flow", resolution=5) == 3
    with pytest.raises(ValueError):
        padding_for("vibration")


def test_build_multivalued_examples():
    mv = build_multivalued(B("0100"), B("0010"), B("0000"), B("0001"))
    assert mv.values.tolist() == [0, 2, 1, -2]
    z = B("0000")
    assert build_multivalued(z, z, z, z).values.tolist() == [0, 0, 0, 0]


def test_build_multivalued_precedence():
    with pytest.warns(PrecedenceWarning):
        mv = build_multivalued(B("1000"), B("1100"), B("0011"), B("0001"))
    assert mv.values.tolist() == [2, 1, -1, -2]
    with pytest.warns(PrecedenceWarning):
        assert build_multivalued(B("1"), B("1"), B("0"), B("0")).values.tolist() == [2]
    # the thresholded construction agrees: x > hh implies x > h, and the code is 2
    spec = GaussianPVSpec("p", 0, 1, ll=-2, l=-1, h=1, hh=2)
    assert threshold_pv([2.5], spec)[0].values.tolist() == [2]


def test_threshold_examples():
    spec = GaussianPVSpec("p", 0, 1, ll=-2, l=-1, h=1, hh=2)
    mv, b = threshold_pv(np.array([2.5, 0.0, 1.5, -1.5, -3.0, 2.0, 1.0, -1.0, -2.0]), spec)
    assert mv.values.tolist() == [2, 0, 1, -1, -2, 1, 0, 0, -1]
    assert b["HI"].values[2] == 1 and b["HH"].values[2] == 0


def test_threshold_missing_limits_never_fire():
    spec = GaussianPVSpec("p", 0, 1, h=1)
    mv, b = threshold_pv(np.array([5.0, -5.0, 1.5]), spec)
    assert mv.values.tolist() == [1, 0, 1]
    assert not b["HH"].values.any() and not b["LL"].values.any()


samples = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=60)


@given(samples)
def test_threshold_decomposition_identities(xs):
    spec = GaussianPVSpec("p", 0.3, 1.2, ll=-2, l=-0.5, h=1, hh=2.5)
    mv, b = threshold_pv(np.array(xs), spec)
    hh, hi, lo, ll = (b[k].values.astype(int) for k in ("HH", "HI", "LO", "LL"))
    np.testing.assert_array_equal(mv.values, 2 * hh + hi - lo - 2 * ll)
    ca = combine_ca_binary(list(b.values()))
    np.testing.assert_array_equal(ca.values, (mv.values != 0).astype(int))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert build_multivalued(b["HH"], b["HI"], b["LO"], b["LL"], "p") == mv


def test_shift_examples():
    assert str(shift(B("0100"), 1)) == "0010"
    assert str(shift(B("0100"), -1)) == "1000"
    assert shift(B("0100"), 0) == B("0100")
    with pytest.raises(ValueError):
        shift(B("0100"), 4)


@given(st.lists(st.integers(-2, 2), min_size=2, max_size=30), st.data())
def test_shift_round_trip(vals, data):
    n = len(vals)
    k = data.draw(st.integers(-(n - 1), n - 1))
    s = MultivaluedSequence("m", TimeGrid(0, 1000, n), vals)
    back = shift(shift(s, k), -k)
    assert isinstance(back, MultivaluedSequence)
    keep = slice(None, n - k) if k >= 0 else slice(-k, None)
    np.testing.assert_array_equal(back.values[keep], s.values[keep])


def test_sequence_invariants():
    with pytest.raises(ValueError):
        BinarySequence("x", TimeGrid(0, 1000, 3), [0, 1])
    with pytest.raises(ValueError):
        BinarySequence("x", TimeGrid(0, 1000, 2), [0, 2])
    with pytest.raises(ValueError):
        MultivaluedSequence("x", TimeGrid(0, 1000, 2), [0, 3])


def test_sequence_csv_round_trip(tmp_path):
    g = TimeGrid.from_seconds(1000.5, 0.25, 6)
    for s in (BinarySequence("b", g, [0, 1, 1, 0, 0, 1]), MultivaluedSequence("m", g, [0, 2, -1, -2, 1, 0])):
        path = tmp_path / f"{s.tag_id}.csv"
        write_sequence_csv(s, path)
        assert path.read_text().splitlines()[0] == "index,time,value"
        back = read_sequence_csv(path, s.tag_id)
        assert back == s
