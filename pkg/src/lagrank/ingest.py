"""CSV ingestion and panel alignment.

Input files are plain UTF-8 CSV with a header row and ISO-8601 dates:

    incidence.csv   location_id,week_start,cases
    locations.csv   location_id,name,latitude,longitude,population
    weather.csv     location_id,date,t_avg,t_min,t_max,precip,rh,pressure,pwat

Blank weather cells mean "missing". An optional ``rean_t`` column carries a
reanalysis temperature; when absent the observed ``t_avg`` stands in for it.
"""

from __future__ import annotations

import csv
import datetime as dt
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

WEEK = np.timedelta64(7, "D")

#: daily weather variables accepted from weather.csv (rean_t optional)
WEATHER_VARS = ("t_avg", "t_min", "t_max", "precip", "rh", "pressure", "pwat", "rean_t")


@dataclass(frozen=True)
class LocationRecord:
    location_id: str
    name: str
    latitude: float
    longitude: float
    population: int


@dataclass(frozen=True)
class IncidenceRow:
    location_id: str
    week_start: dt.date
    cases: int


@dataclass
class IncidenceTable:
    rows: list[IncidenceRow]

    def location_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for row in self.rows:
            seen.setdefault(row.location_id, None)
        return list(seen)


@dataclass(frozen=True)
class WeatherRow:
    location_id: str
    date: dt.date
    values: dict[str, float]  # only the variables present on this day


@dataclass
class DailyWeatherTable:
    rows: list[WeatherRow]


@dataclass
class AlignedPanel:
    """Per-location weekly columns on one shared, contiguous week axis.

    ``incidence`` is cases per 100k people (the unit all correlation and
    prevalence math runs on); raw ``cases`` are kept for reporting. Mask
    arrays are True where a cell was filled rather than observed.
    """

    weeks: np.ndarray  # datetime64[D], strictly increasing, 7-day step
    locations: dict[str, LocationRecord]
    incidence: dict[str, np.ndarray]
    cases: dict[str, np.ndarray]
    incidence_missing: dict[str, np.ndarray]
    weather: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)
    weather_missing: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)

    @property
    def n_weeks(self) -> int:
        return len(self.weeks)

    def location_ids(self) -> list[str]:
        return list(self.incidence)


def _parse_date(raw: str, path, line_no: int) -> dt.date:
    try:
        return dt.date.fromisoformat(raw.strip())
    except ValueError:
        raise ValidationError(f"{path}:{line_no}: bad ISO date {raw!r}") from None


def _open_reader(path, expected: list[str], optional: tuple[str, ...] = ()):
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot open {path}: {exc}") from exc
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        handle.close()
        raise ValidationError(f"{path}: empty file, header row required") from None
    got = [h.strip() for h in header]
    allowed = list(expected) + list(optional)
    if got[: len(expected)] != expected or any(col not in allowed for col in got):
        handle.close()
        raise ValidationError(f"{path}: expected header {','.join(expected)}, got {','.join(got)}")
    return handle, reader, got


def load_incidence(path) -> IncidenceTable:
    """Read and validate incidence.csv, preserving row order."""
    handle, reader, _ = _open_reader(path, ["location_id", "week_start", "cases"])
    rows: list[IncidenceRow] = []
    seen: set[tuple[str, dt.date]] = set()
    with handle:
        for line_no, raw in enumerate(reader, start=2):
            if not raw or raw == [""]:
                continue
            if len(raw) != 3:
                raise ValidationError(f"{path}:{line_no}: expected 3 fields, got {len(raw)}")
            loc = raw[0].strip()
            if not loc:
                raise ValidationError(f"{path}:{line_no}: empty location_id")
            week = _parse_date(raw[1], path, line_no)
            try:
                cases = int(raw[2])
            except ValueError:
                raise ValidationError(f"{path}:{line_no}: cases must be an integer, got {raw[2]!r}") from None
            if cases < 0:
                raise ValidationError(f"{path}:{line_no}: negative cases ({cases})")
            key = (loc, week)
            if key in seen:
                raise ValidationError(f"{path}:{line_no}: duplicate (location, week) = ({loc}, {week})")
            seen.add(key)
            rows.append(IncidenceRow(loc, week, cases))
    return IncidenceTable(rows)


def load_locations(path) -> list[LocationRecord]:
    """Read and validate locations.csv."""
    handle, reader, _ = _open_reader(
        path, ["location_id", "name", "latitude", "longitude", "population"]
    )
    records: list[LocationRecord] = []
    seen: set[str] = set()
    with handle:
        for line_no, raw in enumerate(reader, start=2):
            if not raw or raw == [""]:
                continue
            if len(raw) != 5:
                raise ValidationError(f"{path}:{line_no}: expected 5 fields, got {len(raw)}")
            loc = raw[0].strip()
            if loc in seen:
                raise ValidationError(f"{path}:{line_no}: duplicate location_id {loc!r}")
            seen.add(loc)
            try:
                lat, lon = float(raw[2]), float(raw[3])
                pop = int(raw[4])
            except ValueError:
                raise ValidationError(f"{path}:{line_no}: malformed numeric field") from None
            if not -90.0 <= lat <= 90.0:
                raise ValidationError(f"{path}:{line_no}: latitude {lat} outside [-90, 90]")
            if not -180.0 <= lon <= 180.0:
                raise ValidationError(f"{path}:{line_no}: longitude {lon} outside [-180, 180]")
            if pop <= 0:
                raise ValidationError(f"{path}:{line_no}: population must be positive, got {pop}")
            records.append(LocationRecord(loc, raw[1].strip(), lat, lon, pop))
    if not records:
        warnings.warn(f"{path}: no location records", stacklevel=2)
    return records


def load_weather(path) -> DailyWeatherTable:
    """Read and validate weather.csv; blank cells are missing."""
    required = ["location_id", "date", "t_avg", "t_min", "t_max", "precip", "rh", "pressure", "pwat"]
    handle, reader, got = _open_reader(path, required, optional=("rean_t",))
    var_cols = got[2:]
    rows: list[WeatherRow] = []
    with handle:
        for line_no, raw in enumerate(reader, start=2):
            if not raw or raw == [""]:
                continue
            if len(raw) != len(got):
                raise ValidationError(f"{path}:{line_no}: expected {len(got)} fields, got {len(raw)}")
            loc = raw[0].strip()
            date = _parse_date(raw[1], path, line_no)
            values: dict[str, float] = {}
            for name, cell in zip(var_cols, raw[2:]):
                cell = cell.strip()
                if cell == "":
                    continue
                try:
                    values[name] = float(cell)
                except ValueError:
                    raise ValidationError(f"{path}:{line_no}: bad {name} value {cell!r}") from None
            if {"t_min", "t_avg", "t_max"} <= values.keys():
                if not values["t_min"] <= values["t_avg"] <= values["t_max"]:
                    raise ValidationError(
                        f"{path}:{line_no}: temperatures violate t_min <= t_avg <= t_max"
                    )
            rows.append(WeatherRow(loc, date, values))
    return DailyWeatherTable(rows)


def load_regions(path) -> dict[str, list[str]]:
    """Read a plain id-to-region membership CSV (``location_id,region``)."""
    handle, reader, _ = _open_reader(path, ["location_id", "region"])
    regions: dict[str, list[str]] = {}
    with handle:
        for line_no, raw in enumerate(reader, start=2):
            if not raw or raw == [""]:
                continue
            if len(raw) != 2:
                raise ValidationError(f"{path}:{line_no}: expected 2 fields, got {len(raw)}")
            loc, region = raw[0].strip(), raw[1].strip()
            if not loc or not region:
                raise ValidationError(f"{path}:{line_no}: empty field")
            members = regions.setdefault(region, [])
            if loc in members:
                raise ValidationError(f"{path}:{line_no}: duplicate member {loc!r} in {region!r}")
            members.append(loc)
    return regions


def write_incidence(table: IncidenceTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["location_id", "week_start", "cases"])
        for row in table.rows:
            writer.writerow([row.location_id, row.week_start.isoformat(), row.cases])


def write_locations(records: list[LocationRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["location_id", "name", "latitude", "longitude", "population"])
        for rec in records:
            writer.writerow(
                [rec.location_id, rec.name, repr(rec.latitude), repr(rec.longitude), rec.population]
            )


def write_weather(table: DailyWeatherTable, path) -> None:
    cols = [v for v in WEATHER_VARS if v != "rean_t"]
    if any("rean_t" in row.values for row in table.rows):
        cols.append("rean_t")
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["location_id", "date"] + cols)
        for row in table.rows:
            cells = [repr(row.values[v]) if v in row.values else "" for v in cols]
            writer.writerow([row.location_id, row.date.isoformat()] + cells)


def _week_axis(weeks: list[dt.date], start: dt.date | None, end: dt.date | None) -> np.ndarray:
    anchors = {(w.toordinal() % 7) for w in weeks}
    if len(anchors) > 1:
        raise ValidationError(
            "week_start values do not share a weekday; cannot build a 7-day-spaced axis"
        )
    lo = min(weeks) if start is None else max(min(weeks), start)
    hi = max(weeks) if end is None else min(max(weeks), end)
    if lo > hi:
        raise ValidationError("configured week range excludes all data")
    first = np.datetime64(lo, "D")
    n = int((np.datetime64(hi, "D") - first) / WEEK) + 1
    return first + np.arange(n) * WEEK


def align_panel(
    incidence: IncidenceTable,
    locations: list[LocationRecord],
    weather: DailyWeatherTable | None = None,
    start: dt.date | None = None,
    end: dt.date | None = None,
) -> AlignedPanel:
    """Align incidence (and optional weather) onto one weekly axis.

    The axis is the union of all weeks seen, clipped to [start, end]. Raw
    counts are converted to cases per 100k using each location's population.
    Interior reporting gaps are filled with 0 and flagged in the missing
    mask; epidemic feeds routinely omit zero-case weeks.
    """
    from .preprocess import weekly_resample

    loc_map = {rec.location_id: rec for rec in locations}
    unknown = sorted({r.location_id for r in incidence.rows} - loc_map.keys())
    if unknown:
        raise ValidationError(f"incidence locations missing from locations file: {', '.join(unknown)}")
    if not incidence.rows:
        raise ValidationError("incidence table is empty")

    weeks = _week_axis([r.week_start for r in incidence.rows], start, end)
    if len(weeks) < 2:
        raise ValidationError("need at least 2 weeks of incidence")
    index = {w: i for i, w in enumerate(weeks)}

    ids = incidence.location_ids()
    cases = {loc: np.zeros(len(weeks)) for loc in ids}
    missing = {loc: np.ones(len(weeks), dtype=bool) for loc in ids}
    for row in incidence.rows:
        i = index.get(np.datetime64(row.week_start, "D"))
        if i is None:
            continue  # clipped out by start/end
        cases[row.location_id][i] = row.cases
        missing[row.location_id][i] = False

    per100k = {
        loc: cases[loc] * (1e5 / loc_map[loc].population) for loc in ids
    }

    panel = AlignedPanel(
        weeks=weeks,
        locations={loc: loc_map[loc] for loc in ids},
        incidence=per100k,
        cases=cases,
        incidence_missing=missing,
    )

    if weather is not None:
        by_loc: dict[str, list[WeatherRow]] = {}
        for row in weather.rows:
            by_loc.setdefault(row.location_id, []).append(row)
        for loc, rows in by_loc.items():
            if loc not in loc_map:
                raise ValidationError(f"weather location {loc!r} missing from locations file")
            dates = np.array([np.datetime64(r.date, "D") for r in rows])
            series = {var: np.full(len(rows), np.nan) for var in WEATHER_VARS}
            for i, r in enumerate(rows):
                for var, val in r.values.items():
                    series[var][i] = val
            cols, masks = weekly_resample(dates, series, weeks)
            panel.weather[loc] = cols
            panel.weather_missing[loc] = masks
    return panel
