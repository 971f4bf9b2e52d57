import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagrank.errors import ValidationError
from lagrank.ingest import (
    IncidenceRow,
    IncidenceTable,
    align_panel,
    load_incidence,
    load_locations,
    load_regions,
    load_weather,
    write_incidence,
    write_locations,
    write_weather,
)

from conftest import write_lines

INC_HEADER = "location_id,week_start,cases"
LOC_HEADER = "location_id,name,latitude,longitude,population"


def test_load_incidence_three_rows(tmp_path):
    p = write_lines(tmp_path / "inc.csv", [
        INC_HEADER,
        "a,2015-01-04,3",
        "a,2015-01-11,0",
        "b,2015-01-04,7",
    ])
    table = load_incidence(p)
    assert len(table.rows) == 3
    assert table.rows[0] == IncidenceRow("a", dt.date(2015, 1, 4), 3)
    assert table.rows[2].location_id == "b"  # row order preserved


def test_load_incidence_negative_cases(tmp_path):
    p = write_lines(tmp_path / "inc.csv", [INC_HEADER, "a,2015-01-04,-1"])
    with pytest.raises(ValidationError, match="negative cases"):
        load_incidence(p)


def test_load_incidence_duplicate_week(tmp_path):
    p = write_lines(tmp_path / "inc.csv", [
        INC_HEADER, "a,2015-01-04,1", "a,2015-01-04,2",
    ])
    with pytest.raises(ValidationError, match="duplicate"):
        load_incidence(p)


def test_load_incidence_malformed_row_names_line(tmp_path):
    p = write_lines(tmp_path / "inc.csv", [INC_HEADER, "a,2015-01-04,1", "a,not-a-date,2"])
    with pytest.raises(ValidationError, match=r":3"):
        load_incidence(p)


def test_load_incidence_requires_header(tmp_path):
    p = write_lines(tmp_path / "inc.csv", ["a,2015-01-04,1"])
    with pytest.raises(ValidationError, match="header"):
        load_incidence(p)


def test_load_locations_accepts_vitoria(tmp_path):
    # population back-computed from the published cumulative counts:
    # 71,348 cases at 19,501.72 per 100k
    pop = round(71348 / (19501.72 / 1e5))
    p = write_lines(tmp_path / "loc.csv", [
        LOC_HEADER,
        f"3205309,Vitória,-20.32,-40.34,{pop}",
    ])
    recs = load_locations(p)
    assert len(recs) == 1
    assert recs[0].population == pop
    assert recs[0].name == "Vitória"


def test_load_locations_rejects_latitude_91(tmp_path):
    p = write_lines(tmp_path / "loc.csv", [LOC_HEADER, "a,A,91,0,1000"])
    with pytest.raises(ValidationError, match="latitude"):
        load_locations(p)


def test_load_locations_empty_warns(tmp_path):
    p = write_lines(tmp_path / "loc.csv", [LOC_HEADER])
    with pytest.warns(UserWarning, match="no location records"):
        assert load_locations(p) == []


def test_load_weather_blank_is_missing(tmp_path):
    p = write_lines(tmp_path / "wx.csv", [
        "location_id,date,t_avg,t_min,t_max,precip,rh,pressure,pwat",
        "a,2015-01-04,25.0,,30.0,0.0,80,1013,40",
    ])
    rows = load_weather(p).rows
    assert "t_min" not in rows[0].values
    assert rows[0].values["t_max"] == 30.0


def test_load_weather_temperature_ordering(tmp_path):
    p = write_lines(tmp_path / "wx.csv", [
        "location_id,date,t_avg,t_min,t_max,precip,rh,pressure,pwat",
        "a,2015-01-04,25.0,26.0,24.0,,,,",
    ])
    with pytest.raises(ValidationError, match="t_min <= t_avg <= t_max"):
        load_weather(p)


def test_round_trip_incidence(tmp_path):
    p = write_lines(tmp_path / "inc.csv", [
        INC_HEADER,
        "a,2015-01-04,3",
        "b,2015-01-04,0",
        "a,2015-01-11,12",
    ])
    table = load_incidence(p)
    out = tmp_path / "out.csv"
    write_incidence(table, out)
    assert out.read_bytes().replace(b"\r\n", b"\n") == p.read_bytes()


def test_round_trip_locations(tmp_path):
    p = write_lines(tmp_path / "loc.csv", [
        LOC_HEADER,
        "a,Alpha,-20.32,-40.34,365855",
        "b,Beta,10.5,20.25,1000",
    ])
    recs = load_locations(p)
    out = tmp_path / "out.csv"
    write_locations(recs, out)
    assert out.read_bytes().replace(b"\r\n", b"\n") == p.read_bytes()


def test_round_trip_weather(tmp_path):
    p = write_lines(tmp_path / "wx.csv", [
        "location_id,date,t_avg,t_min,t_max,precip,rh,pressure,pwat",
        "a,2015-01-04,25.0,20.0,30.0,0.0,80.5,1013.2,40.0",
        "a,2015-01-05,24.0,,29.0,,,,",
    ])
    table = load_weather(p)
    out = tmp_path / "out.csv"
    write_weather(table, out)
    assert out.read_bytes().replace(b"\r\n", b"\n") == p.read_bytes()


def test_load_regions(tmp_path):
    p = write_lines(tmp_path / "reg.csv", [
        "location_id,region", "a,north", "b,north", "c,south",
    ])
    assert load_regions(p) == {"north": ["a", "b"], "south": ["c"]}


def _locs(*ids, pop=100_000):
    return [f"{i},{i},-20.{k},-40.{k},{pop}" for k, i in enumerate(ids)]


def test_align_two_complete_locations(tmp_path):
    inc = write_lines(tmp_path / "inc.csv", [
        INC_HEADER,
        "a,2015-01-04,10", "a,2015-01-11,20", "a,2015-01-18,30",
        "b,2015-01-04,1", "b,2015-01-11,2", "b,2015-01-18,3",
    ])
    loc = write_lines(tmp_path / "loc.csv", [LOC_HEADER] + _locs("a", "b"))
    panel = align_panel(load_incidence(inc), load_locations(loc))
    assert panel.n_weeks == 3
    assert set(panel.location_ids()) == {"a", "b"}
    assert not panel.incidence_missing["a"].any()
    assert not panel.incidence_missing["b"].any()


def test_align_interior_gap_filled_and_masked(tmp_path):
    inc = write_lines(tmp_path / "inc.csv", [
        INC_HEADER,
        "a,2015-01-04,10", "a,2015-01-11,20", "a,2015-01-18,30",
        "b,2015-01-04,1", "b,2015-01-18,3",  # missing the middle week
    ])
    loc = write_lines(tmp_path / "loc.csv", [LOC_HEADER] + _locs("a", "b"))
    panel = align_panel(load_incidence(inc), load_locations(loc))
    assert panel.cases["b"][1] == 0.0
    assert panel.incidence_missing["b"].tolist() == [False, True, False]


def test_align_unknown_location_error(tmp_path):
    inc = write_lines(tmp_path / "inc.csv", [INC_HEADER, "a,2015-01-04,1", "a,2015-01-11,1", "zz,2015-01-04,1", "zz,2015-01-11,1"])
    loc = write_lines(tmp_path / "loc.csv", [LOC_HEADER] + _locs("a"))
    with pytest.raises(ValidationError, match="zz"):
        align_panel(load_incidence(inc), load_locations(loc))


def test_align_mismatched_weekdays_error(tmp_path):
    inc = write_lines(tmp_path / "inc.csv", [
        INC_HEADER, "a,2015-01-04,1", "a,2015-01-12,1",  # Sunday then Monday
    ])
    loc = write_lines(tmp_path / "loc.csv", [LOC_HEADER] + _locs("a"))
    with pytest.raises(ValidationError, match="weekday"):
        align_panel(load_incidence(inc), load_locations(loc))


def test_align_cumulative_per_100k_matches_published_value(tmp_path):
    # spread the published 71,348 total over weeks; cumulative per-100k must
    # come back within rounding of 19,501.72
    pop = round(71348 / (19501.72 / 1e5))
    total, n = 71348, 52
    per_week = [total // n + (1 if i < total % n else 0) for i in range(n)]
    start = dt.date(2015, 1, 4)
    rows = [f"v,{start + dt.timedelta(weeks=i)},{c}" for i, c in enumerate(per_week)]
    inc = write_lines(tmp_path / "inc.csv", [INC_HEADER] + rows)
    loc = write_lines(tmp_path / "loc.csv", [LOC_HEADER, f"v,Vitória,-20.32,-40.34,{pop}"])
    panel = align_panel(load_incidence(inc), load_locations(loc))
    assert panel.incidence["v"].sum() == pytest.approx(19501.72, abs=0.5)


def test_align_never_drops_weeks(tmp_path):
    inc = write_lines(tmp_path / "inc.csv", [
        INC_HEADER,
        "a,2015-01-04,1", "a,2015-02-01,1",
        "b,2015-01-18,5", "b,2015-03-01,5",
    ])
    loc = write_lines(tmp_path / "loc.csv", [LOC_HEADER] + _locs("a", "b"))
    panel = align_panel(load_incidence(inc), load_locations(loc))
    # union spans 2015-01-04 .. 2015-03-01 inclusive = 9 weeks
    assert panel.n_weeks == 9
    steps = np.diff(panel.weeks).astype("timedelta64[D]").astype(int)
    assert (steps == 7).all()


@settings(max_examples=50, deadline=None)
@given(
    cases=st.lists(st.integers(min_value=0, max_value=10_000), min_size=2, max_size=30),
    population=st.integers(min_value=1_000, max_value=5_000_000),
)
def test_per_100k_conversion_inverts_to_raw_counts(cases, population):
    start = dt.date(2015, 1, 4)
    rows = [IncidenceRow("a", start + dt.timedelta(weeks=i), c) for i, c in enumerate(cases)]
    from lagrank.ingest import LocationRecord

    panel = align_panel(
        IncidenceTable(rows), [LocationRecord("a", "a", 0.0, 0.0, population)]
    )
    reconstructed = panel.incidence["a"].sum() * population / 1e5
    assert reconstructed == pytest.approx(sum(cases), rel=1e-9)
