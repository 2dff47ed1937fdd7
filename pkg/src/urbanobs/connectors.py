"""Source payload formats: parsing and serialization.

Three line-oriented text formats, one per source kind. Parsers turn a
payload into raw readings that keep every field as verbatim text;
nothing here interprets values beyond structural checks. Serializers
produce the exact same formats, so parse(serialize(x)) is an identity.

Weather payload, one observation per line::

    <station_file_id> <ISO-8601 local timestamp> key=value ...

Values with spaces are shell-quoted. A key that is absent means the
sensor did not report. Lines starting with '#' and blank lines are
ignored.

Traffic payload, exactly one record::

    <route_file_id> <ISO-8601 timestamp> <dist_m> <time_std_s> <time_curr_s>

Pollution payload, one block per (station, contaminant, day)::

    station=<file_id> contaminant=<CODE> date=<YYYY-MM-DD>
    HH:MM <integer or dash>
    ...

Blocks are separated by blank lines. Hours 00 and 01 never appear; a
dash cell means the instrument had no value for that hour.
"""

from __future__ import annotations

import shlex
import threading
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConflictError, ParseError, PreconditionError, SourceError
from .model import (
    CONTAMINANTS,
    AIRPORT_ONLY_ATTRIBUTES,
    WEATHER_ATTRIBUTES,
    PollutionStation,
    TrafficRoute,
    WeatherStation,
)

__all__ = [
    "SourcePayload",
    "RawReading",
    "QuarantinedLine",
    "Quarantine",
    "parse_weather_observations",
    "parse_traffic_response",
    "parse_pollution_tables",
    "assemble_station_day",
    "weather_payload_body",
    "traffic_payload_body",
    "pollution_payload_body",
    "FixtureDirectorySource",
    "WEATHER_KEYS",
    "CONTAMINANT_CODES",
    "NA_CELL",
]

# Keys allowed on a weather observation line: the record attributes
# plus the zone code.
WEATHER_KEYS = ("time_zone",) + WEATHER_ATTRIBUTES

# Block headers use the upper-case external codes.
CONTAMINANT_CODES = {c.upper(): c for c in CONTAMINANTS}

# The dash marking an empty hourly cell. The em dash is what the
# upstream tables render; a plain hyphen is accepted on input.
NA_CELL = "—"
_NA_INPUTS = {NA_CELL, "-"}

TIMESTAMP_FMT = "%Y-%m-%dT%H:%M:%S"


@dataclass(frozen=True)
class SourcePayload:
    """One fetched body of source text plus provenance."""

    source_kind: str  # weather | traffic | pollution
    fetched_at: datetime
    body: str
    origin: str  # URL, file path, or synth tag

    def __post_init__(self) -> None:
        if self.source_kind not in ("weather", "traffic", "pollution"):
            raise PreconditionError(f"unknown source kind {self.source_kind!r}")
        if not self.body:
            raise PreconditionError("payload body must be non-empty text")


@dataclass(frozen=True)
class RawReading:
    """One structurally parsed observation, all values still text.

    For weather this is a full observation line; for traffic the single
    measurement triple; for pollution one hourly cell (field dict empty
    when the cell was a dash) or, after assembly, one merged hour.
    """

    kind: str
    target: str  # station or route file_id
    timestamp: str  # verbatim local timestamp text
    fields: Mapping[str, str]
    origin: str
    fetched_at: datetime
    station_kind: str | None = None  # weather only: pws | airport


@dataclass(frozen=True)
class QuarantinedLine:
    """A payload line set aside instead of parsed."""

    origin: str
    line_no: int
    line: str
    reason: str


class Quarantine:
    """Append-only, thread-safe sink for quarantined lines."""

    def __init__(self) -> None:
        self._items: list[QuarantinedLine] = []
        self._lock = threading.Lock()

    def extend(self, items: Iterable[QuarantinedLine]) -> None:
        with self._lock:
            self._items.extend(items)

    @property
    def items(self) -> tuple[QuarantinedLine, ...]:
        with self._lock:
            return tuple(self._items)

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)


def _content_lines(body: str) -> list[tuple[int, str]]:
    out = []
    for i, line in enumerate(body.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        out.append((i, stripped))
    return out


def _check_timestamp_text(text: str, origin: str, line_no: int) -> None:
    try:
        datetime.strptime(text, TIMESTAMP_FMT)
    except ValueError:
        raise ParseError(f"bad timestamp {text!r}", origin=origin, line_no=line_no)


def parse_weather_observations(
    payload: SourcePayload,
    stations: Mapping[str, WeatherStation],
) -> tuple[list[RawReading], list[QuarantinedLine]]:
    """Parse a weather payload against a station catalog.

    Observations for station ids missing from the catalog are
    quarantined, not fatal. Structural defects (unknown key, duplicate
    key, airport-only key on a personal station, broken timestamp) stop
    the parse with a positioned error.
    """
    if payload.source_kind != "weather":
        raise PreconditionError(f"expected a weather payload, got {payload.source_kind}")
    readings: list[RawReading] = []
    quarantined: list[QuarantinedLine] = []
    for line_no, line in _content_lines(payload.body):
        try:
            tokens = shlex.split(line)
        except ValueError as exc:
            raise ParseError(f"unbalanced quoting: {exc}", origin=payload.origin,
                             line_no=line_no)
        if len(tokens) < 2:
            raise ParseError("observation needs a station id and a timestamp",
                             origin=payload.origin, line_no=line_no)
        file_id, ts_text = tokens[0], tokens[1]
        _check_timestamp_text(ts_text, payload.origin, line_no)
        station = stations.get(file_id)
        if station is None:
            quarantined.append(QuarantinedLine(
                origin=payload.origin, line_no=line_no, line=line,
                reason=f"unknown station id {file_id!r}",
            ))
            continue
        fields: dict[str, str] = {}
        for tok in tokens[2:]:
            key, sep, value = tok.partition("=")
            if not sep or not key:
                raise ParseError(f"expected key=value, got {tok!r}",
                                 origin=payload.origin, line_no=line_no)
            if key not in WEATHER_KEYS:
                raise ParseError(f"unknown weather key {key!r}",
                                 origin=payload.origin, line_no=line_no)
            if key in fields:
                raise ParseError(f"duplicate key {key!r}",
                                 origin=payload.origin, line_no=line_no)
            if not station.is_airport and key in AIRPORT_ONLY_ATTRIBUTES:
                raise ParseError(
                    f"key {key!r} is airport-only but {file_id} is a personal station",
                    origin=payload.origin, line_no=line_no)
            fields[key] = value
        readings.append(RawReading(
            kind="weather", target=file_id, timestamp=ts_text, fields=fields,
            origin=payload.origin, fetched_at=payload.fetched_at,
            station_kind=station.kind,
        ))
    return readings, quarantined


def parse_traffic_response(payload: SourcePayload, route: TrafficRoute) -> RawReading:
    """Parse a single-record traffic payload bound to one route."""
    if payload.source_kind != "traffic":
        raise PreconditionError(f"expected a traffic payload, got {payload.source_kind}")
    lines = _content_lines(payload.body)
    if len(lines) != 1:
        raise ParseError(f"expected exactly one traffic record, got {len(lines)}",
                         origin=payload.origin)
    line_no, line = lines[0]
    tokens = line.split()
    if len(tokens) != 5:
        raise ParseError(
            f"traffic record needs 5 fields (route, timestamp, distance, "
            f"standard time, current time), got {len(tokens)}",
            origin=payload.origin, line_no=line_no)
    file_id, ts_text, dist, t_std, t_curr = tokens
    if file_id != route.file_id:
        raise ParseError(f"payload names route {file_id!r}, expected {route.file_id!r}",
                         origin=payload.origin, line_no=line_no)
    _check_timestamp_text(ts_text, payload.origin, line_no)
    return RawReading(
        kind="traffic", target=route.file_id, timestamp=ts_text,
        fields={"traveldist": dist, "traveltime_std": t_std,
                "traveltime_curr": t_curr},
        origin=payload.origin, fetched_at=payload.fetched_at,
    )


def parse_pollution_tables(payload: SourcePayload) -> list[RawReading]:
    """Parse hourly contaminant tables into per-cell readings.

    Each reading covers one (station, hour, contaminant) cell; a dash
    cell yields a reading with an empty field dict so the hour is still
    known to exist. Duplicate cells are a conflict.
    """
    if payload.source_kind != "pollution":
        raise PreconditionError(f"expected a pollution payload, got {payload.source_kind}")
    readings: list[RawReading] = []
    seen: set[tuple[str, str, str, str]] = set()
    station = contaminant = day_text = None
    for line_no, line in _content_lines(payload.body):
        if line.startswith("station="):
            tokens = line.split()
            if len(tokens) != 3:
                raise ParseError("block header needs station=, contaminant= and date=",
                                 origin=payload.origin, line_no=line_no)
            head = {}
            for tok in tokens:
                key, sep, value = tok.partition("=")
                if not sep or key not in ("station", "contaminant", "date") or not value:
                    raise ParseError(f"bad header field {tok!r}",
                                     origin=payload.origin, line_no=line_no)
                head[key] = value
            if set(head) != {"station", "contaminant", "date"}:
                raise ParseError("block header needs station=, contaminant= and date=",
                                 origin=payload.origin, line_no=line_no)
            if head["contaminant"] not in CONTAMINANT_CODES:
                raise ParseError(f"unknown contaminant {head['contaminant']!r}",
                                 origin=payload.origin, line_no=line_no)
            try:
                date.fromisoformat(head["date"])
            except ValueError:
                raise ParseError(f"bad date {head['date']!r}",
                                 origin=payload.origin, line_no=line_no)
            station = head["station"]
            contaminant = CONTAMINANT_CODES[head["contaminant"]]
            day_text = head["date"]
            continue
        if station is None:
            raise ParseError("hour line before any block header",
                             origin=payload.origin, line_no=line_no)
        tokens = line.split()
        if len(tokens) not in (1, 2):
            raise ParseError(f"expected 'HH:MM value', got {line!r}",
                             origin=payload.origin, line_no=line_no)
        hhmm = tokens[0]
        try:
            t = datetime.strptime(hhmm, "%H:%M")
        except ValueError:
            raise ParseError(f"bad hour {hhmm!r}", origin=payload.origin,
                             line_no=line_no)
        if t.hour in (0, 1):
            raise ParseError("hourly tables never list hours 00 or 01",
                             origin=payload.origin, line_no=line_no)
        key = (station, day_text, hhmm, contaminant)
        if key in seen:
            raise ConflictError(
                f"duplicate cell for station {station}, {day_text} {hhmm}, "
                f"{contaminant} [{payload.origin}:{line_no}]")
        seen.add(key)
        if len(tokens) == 2 and tokens[1] not in _NA_INPUTS:
            fields = {contaminant: tokens[1]}
        else:
            fields = {}
        readings.append(RawReading(
            kind="pollution", target=station, timestamp=f"{day_text}T{hhmm}:00",
            fields=fields, origin=payload.origin, fetched_at=payload.fetched_at,
        ))
    return readings


def assemble_station_day(
    readings: Sequence[RawReading],
    station: PollutionStation,
    day: date,
) -> list[RawReading]:
    """Merge per-cell readings into one candidate reading per hour.

    All inputs must belong to the given station and day; mixing is a
    precondition error, since silently merging two stations would
    corrupt both. Output is ordered by hour; an hour whose cells were
    all dashes still yields a candidate (an all-empty hour is data).
    """
    by_hour: dict[str, dict[str, str]] = {}
    for r in readings:
        if r.kind != "pollution":
            raise PreconditionError(f"expected pollution readings, got {r.kind!r}")
        if r.target != station.file_id:
            raise PreconditionError(
                f"reading for station {r.target!r} mixed into {station.file_id!r}")
        r_day, _, hhmm_s = r.timestamp.partition("T")
        if r_day != day.isoformat():
            raise PreconditionError(
                f"reading dated {r_day} mixed into the {day.isoformat()} batch")
        merged = by_hour.setdefault(hhmm_s[:5], {})
        merged.update(r.fields)
    out = []
    sample = readings[0] if readings else None
    for hhmm in sorted(by_hour):
        out.append(RawReading(
            kind="pollution", target=station.file_id,
            timestamp=f"{day.isoformat()}T{hhmm}:00",
            fields=by_hour[hhmm],
            origin=sample.origin if sample else "assembled",
            fetched_at=sample.fetched_at if sample else datetime.combine(day, datetime.min.time()),
        ))
    return out


def _quote(value: str) -> str:
    # shlex.quote('') would give ''; empty values never occur because a
    # missing sensor is expressed by omitting the key.
    return shlex.quote(value)


def weather_payload_body(
    rows: Iterable[tuple[str, str, Mapping[str, str]]],
) -> str:
    """Serialize (station, timestamp, fields) rows to payload text.

    Keys are written in canonical attribute order so the output is
    byte-stable for a given input.
    """
    lines = []
    for file_id, ts_text, fields in rows:
        parts = [file_id, ts_text]
        for key in WEATHER_KEYS:
            if key in fields:
                parts.append(f"{key}={_quote(fields[key])}")
        for key in fields:
            if key not in WEATHER_KEYS:
                raise PreconditionError(f"unknown weather key {key!r}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n" if lines else "# no observations\n"


def traffic_payload_body(route_id: str, ts_text: str, dist: str,
                         t_std: str, t_curr: str) -> str:
    return f"{route_id} {ts_text} {dist} {t_std} {t_curr}\n"


def pollution_payload_body(
    blocks: Iterable[tuple[str, str, str, Sequence[tuple[str, str | None]]]],
) -> str:
    """Serialize (station, contaminant code, date, [(HH:MM, value|None)]) blocks."""
    chunks = []
    for station, code, day_text, cells in blocks:
        lines = [f"station={station} contaminant={code} date={day_text}"]
        for hhmm, value in cells:
            lines.append(f"{hhmm} {NA_CELL if value is None else value}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n" if chunks else "# no tables\n"


class FixtureDirectorySource:
    """Source registry reading pre-captured payloads from a directory.

    Layout::

        <root>/weather/<station_file_id>/<YYYY-MM-DD>.txt
        <root>/traffic/<route_file_id>/<YYYY-MM-DD>.txt
        <root>/pollution/<station_file_id>/<YYYY-MM-DD>.txt

    Traffic fixture files hold one record per line; the fetch picks the
    line whose timestamp matches the requested instant.
    """

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    def _read(self, kind: str, target: str, day: date) -> tuple[str, str]:
        path = self.root / kind / target / f"{day.isoformat()}.txt"
        if not path.is_file():
            raise SourceError(f"no {kind} fixture for {target} on {day}: {path}")
        return path.read_text(), str(path)

    def fetch_weather(self, meta, day: date, fetched_at: datetime | None = None) -> SourcePayload:
        body, origin = self._read("weather", meta.station.file_id, day)
        return SourcePayload("weather", fetched_at or datetime.now(), body, origin)

    def fetch_traffic(self, route: TrafficRoute, at: datetime) -> SourcePayload:
        body, origin = self._read("traffic", route.file_id, at.date())
        want = at.strftime(TIMESTAMP_FMT)
        for _, line in _content_lines(body):
            if line.split()[1:2] == [want]:
                return SourcePayload("traffic", at, line + "\n", origin)
        raise SourceError(f"no traffic fixture line at {want} in {origin}")

    def fetch_pollution(self, station: PollutionStation, day: date,
                        request_hour: int,
                        fetched_at: datetime | None = None) -> SourcePayload:
        body, origin = self._read("pollution", station.file_id, day)
        return SourcePayload("pollution", fetched_at or datetime.now(), body, origin)
