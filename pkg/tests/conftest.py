import datetime as dt

import numpy as np
import pytest

from lagrank.ingest import AlignedPanel, LocationRecord, WEEK


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def weeks_from(start: dt.date, n: int) -> np.ndarray:
    return np.datetime64(start, "D") + np.arange(n) * WEEK


def make_panel(series: dict[str, np.ndarray], coords: dict[str, tuple[float, float]] | None = None,
               populations: dict[str, int] | None = None) -> AlignedPanel:
    """Panel straight from arrays; per-100k equals the given values (pop 100k)."""
    n = len(next(iter(series.values())))
    coords = coords or {}
    populations = populations or {}
    locations = {
        loc: LocationRecord(loc, loc, *coords.get(loc, (-20.0 - i, -40.0 - i)), populations.get(loc, 100_000))
        for i, loc in enumerate(series)
    }
    return AlignedPanel(
        weeks=weeks_from(dt.date(2015, 1, 4), n),
        locations=locations,
        incidence={k: np.asarray(v, dtype=float) for k, v in series.items()},
        cases={
            k: np.asarray(v, dtype=float) * (locations[k].population / 1e5) for k, v in series.items()
        },
        incidence_missing={k: np.zeros(n, dtype=bool) for k in series},
    )


def outbreak_series(n_weeks: int = 260, centers=(30, 92, 150, 215), widths=(6.0, 8.0, 5.0, 7.0),
                    amps=(0.8, 1.0, 0.5, 0.9)) -> np.ndarray:
    """Deterministic multi-outbreak curve: distinct bumps over a flat baseline.

    With the default smoothing and detection settings (i_min 0.05,
    min_length 10) each bump yields exactly one window.
    """
    t = np.arange(n_weeks, dtype=float)
    out = np.zeros(n_weeks)
    for c, w, a in zip(centers, widths, amps):
        out += a * np.exp(-0.5 * ((t - c) / w) ** 2)
    return 40.0 * out  # per-100k scale


def sine_pair_matrix(n_weeks: int = 400) -> np.ndarray:
    """Two-column matrix [sin, cos]: every future sin step is an exact linear
    function of the current (sin, cos) pair, so a last-step linear model can
    fit it perfectly."""
    t = np.arange(n_weeks)
    w = 2 * np.pi / 52
    return np.column_stack([10.0 * (1 + np.sin(w * t)), 10.0 * (1 + np.cos(w * t))])


@pytest.fixture
def sine_panel() -> AlignedPanel:
    X = sine_pair_matrix(400)
    return make_panel({"ic": X[:, 0], "helper": X[:, 1]},
                      coords={"ic": (-20.3, -40.3), "helper": (-20.4, -40.4)})


def write_panel_csvs(dir_path, panel: AlignedPanel):
    """Dump a panel as the CSV pair the CLI ingests (cases rounded, clipped at 0)."""
    inc_lines = ["location_id,week_start,cases"]
    for loc in panel.location_ids():
        for week, cases in zip(panel.weeks, panel.cases[loc]):
            inc_lines.append(f"{loc},{week},{max(0, round(float(cases)))}")
    loc_lines = ["location_id,name,latitude,longitude,population"]
    for loc, rec in panel.locations.items():
        loc_lines.append(f"{loc},{rec.name},{rec.latitude!r},{rec.longitude!r},{rec.population}")
    inc = write_lines(dir_path / "incidence.csv", inc_lines)
    locs = write_lines(dir_path / "locations.csv", loc_lines)
    return inc, locs
