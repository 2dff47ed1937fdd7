"""Per-day collection plans and their execution.

A plan is built from cadence windows. Traffic windows tick every
`interval_min` minutes from their start, densified during rush hours;
the weather backfill (which collects the previous day) and the
pollution scrape (which needs the full 02:00-23:00 table, so it runs
late in the evening) each fire exactly once per day whether or not the
window list mentions them.

Execution is clock-driven. The simulated clock jumps straight to each
fire time so a full day runs in milliseconds; the wall clock sleeps.
Entries already in the past when the run starts are skipped, except
the two daily jobs, which are replayed once because their payloads are
historical anyway.
"""

from __future__ import annotations

import time as _time
from bisect import bisect_left
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta
from typing import Protocol, Sequence

from .connectors import (
    Quarantine,
    assemble_station_day,
    parse_pollution_tables,
    parse_traffic_response,
    parse_weather_observations,
)
from .errors import (
    ConfigError,
    Error,
    RecordRejected,
    RunAborted,
    StorageUnavailable,
)
from .validation import validate_pollution, validate_traffic, validate_weather

__all__ = [
    "WEATHER_BACKFILL",
    "TRAFFIC_POLL",
    "POLLUTION_SCRAPE",
    "CadenceWindow",
    "PlanEntry",
    "CadencePlan",
    "build_plan",
    "next_due",
    "run_day",
    "RunSummary",
    "SimulatedClock",
    "WallClock",
    "parse_hhmm",
]

WEATHER_BACKFILL = "weather_backfill"
TRAFFIC_POLL = "traffic_poll"
POLLUTION_SCRAPE = "pollution_scrape"
TASK_KINDS = (WEATHER_BACKFILL, TRAFFIC_POLL, POLLUTION_SCRAPE)

# Symbolic target for the two jobs that sweep every station in one go.
ALL_TARGETS = "*"


def parse_hhmm(text: str) -> int:
    """'HH:MM' -> minutes from midnight; '24:00' marks end of day."""
    try:
        hh, _, mm = text.partition(":")
        h, m = int(hh), int(mm)
    except ValueError:
        raise ConfigError(f"bad time of day {text!r}, expected HH:MM")
    if not (0 <= m <= 59) or not (0 <= h <= 24) or (h == 24 and m != 0):
        raise ConfigError(f"bad time of day {text!r}")
    return h * 60 + m


@dataclass(frozen=True)
class CadenceWindow:
    """One collection window: [start, end) at a fixed interval."""

    kind: str
    start_min: int  # minutes from local midnight, inclusive
    end_min: int    # exclusive
    interval_min: int

    def __post_init__(self) -> None:
        if self.kind not in TASK_KINDS:
            raise ConfigError(f"unknown task kind {self.kind!r}")
        if not (0 <= self.start_min < self.end_min <= 1440):
            raise ConfigError(
                f"window {self.kind} {self.start_min}..{self.end_min} "
                f"must satisfy 0 <= start < end <= 1440")
        if self.interval_min <= 0:
            raise ConfigError(f"window {self.kind}: interval must be positive")

    @classmethod
    def from_tokens(cls, kind: str, start: str, end: str, interval: str) -> "CadenceWindow":
        try:
            iv = int(interval)
        except ValueError:
            raise ConfigError(f"bad interval {interval!r} in cadence window")
        return cls(kind, parse_hhmm(start), parse_hhmm(end), iv)

    def ticks(self) -> range:
        return range(self.start_min, self.end_min, self.interval_min)


@dataclass(frozen=True)
class PlanEntry:
    at: datetime
    kind: str
    target: str  # route file_id, or '*' for the station-sweep jobs


@dataclass(frozen=True)
class CadencePlan:
    day: date
    entries: tuple[PlanEntry, ...]  # sorted by fire time

    def count(self, kind: str) -> int:
        return sum(1 for e in self.entries if e.kind == kind)


def _check_no_overlap(windows: Sequence[CadenceWindow]) -> None:
    by_kind: dict[str, list[CadenceWindow]] = {}
    for w in windows:
        by_kind.setdefault(w.kind, []).append(w)
    for kind, ws in by_kind.items():
        ws = sorted(ws, key=lambda w: w.start_min)
        for a, b in zip(ws, ws[1:]):
            if b.start_min < a.end_min:
                raise ConfigError(
                    f"{kind} windows overlap: "
                    f"{a.start_min}..{a.end_min} and {b.start_min}..{b.end_min}")


def build_plan(windows: Sequence[CadenceWindow], routes: Sequence,
               day: date) -> CadencePlan:
    """Expand windows into the ordered entry list for one day.

    Traffic windows fan out over every route. The two daily jobs fire
    once each: at their window start if one is configured, else at
    00:30 (backfill) and 23:30 (scrape). A pollution window starting
    before 23:00 is a configuration error because the day's table would
    still be incomplete when scraped.
    """
    _check_no_overlap(windows)
    midnight = datetime.combine(day, time(0, 0))
    entries: list[PlanEntry] = []

    for w in windows:
        if w.kind != TRAFFIC_POLL:
            continue
        for tick in w.ticks():
            at = midnight + timedelta(minutes=tick)
            for route in routes:
                entries.append(PlanEntry(at, TRAFFIC_POLL, route.file_id))

    backfills = [w for w in windows if w.kind == WEATHER_BACKFILL]
    scrapes = [w for w in windows if w.kind == POLLUTION_SCRAPE]
    if len(backfills) > 1 or len(scrapes) > 1:
        raise ConfigError("the daily jobs take at most one window each")
    backfill_at = midnight + timedelta(
        minutes=backfills[0].start_min if backfills else 30)
    scrape_min = scrapes[0].start_min if scrapes else 23 * 60 + 30
    if scrape_min < 23 * 60:
        raise ConfigError(
            "pollution scrape must start at 23:00 or later; the hourly "
            "tables are incomplete before then")
    entries.append(PlanEntry(backfill_at, WEATHER_BACKFILL, ALL_TARGETS))
    entries.append(PlanEntry(midnight + timedelta(minutes=scrape_min),
                             POLLUTION_SCRAPE, ALL_TARGETS))

    entries.sort(key=lambda e: (e.at, e.kind, e.target))
    seen = set()
    for e in entries:
        key = (e.at, e.kind, e.target)
        if key in seen:
            raise ConfigError(f"duplicate plan entry {key}")
        seen.add(key)
    return CadencePlan(day=day, entries=tuple(entries))


def next_due(plan: CadencePlan, now: datetime) -> PlanEntry | None:
    """Earliest entry with fire time >= now, or None after the last."""
    times = [e.at for e in plan.entries]
    i = bisect_left(times, now)
    return plan.entries[i] if i < len(plan.entries) else None


class Clock(Protocol):
    def now(self) -> datetime: ...
    def wait_until(self, when: datetime) -> None: ...


class SimulatedClock:
    """A clock that jumps: wait_until() lands instantly."""

    def __init__(self, start: datetime) -> None:
        self._now = start

    def now(self) -> datetime:
        return self._now

    def wait_until(self, when: datetime) -> None:
        if when > self._now:
            self._now = when


class WallClock:
    def now(self) -> datetime:
        return datetime.now()

    def wait_until(self, when: datetime) -> None:
        delta = (when - self.now()).total_seconds()
        if delta > 0:
            _time.sleep(delta)


@dataclass
class RunSummary:
    """What one day of collection actually did."""

    day: date
    fired: int = 0        # entries executed (including replayed daily jobs)
    skipped: int = 0      # entries already in the past at start
    stored: int = 0
    duplicates: int = 0
    rejected: int = 0     # records validation refused
    quarantined: int = 0  # payload lines set aside by parsers
    failures: list[str] = field(default_factory=list)

    def line(self) -> str:
        return (f"day {self.day.isoformat()}: fired={self.fired} "
                f"skipped={self.skipped} stored={self.stored} "
                f"duplicates={self.duplicates} rejected={self.rejected} "
                f"quarantined={self.quarantined} failures={len(self.failures)}")


class _DayRunner:
    def __init__(self, plan, source, store, config, summary, quarantine):
        self.plan = plan
        self.source = source
        self.store = store
        self.config = config
        self.summary = summary
        self.quarantine = quarantine
        self.routes = {r.file_id: r for r in config.routes}
        self.stations = {m.station.file_id: m.station
                         for m in config.weather_stations}

    def _insert(self, record) -> None:
        status = self.store.insert_record(record)
        if status == "duplicate":
            self.summary.duplicates += 1
        else:
            self.summary.stored += 1

    def traffic(self, entry) -> None:
        route = self.routes.get(entry.target)
        if route is None:
            raise ConfigError(f"plan names unknown route {entry.target!r}")
        payload = self.source.fetch_traffic(route, entry.at)
        raw = parse_traffic_response(payload, route)
        try:
            record, _report = validate_traffic(raw, self.config.rules)
        except RecordRejected as exc:
            self.summary.rejected += 1
            self.summary.failures.append(str(exc))
            return
        self._insert(record)

    def weather_backfill(self, entry) -> None:
        day_before = self.plan.day - timedelta(days=1)
        for meta in self.config.weather_stations:
            try:
                payload = self.source.fetch_weather(meta, day_before,
                                                    fetched_at=entry.at)
                readings, quarantined = parse_weather_observations(
                    payload, self.stations)
                self.quarantine.extend(quarantined)
                self.summary.quarantined += len(quarantined)
                for raw in readings:
                    try:
                        record, _report = validate_weather(raw, self.config.rules)
                    except RecordRejected as exc:
                        self.summary.rejected += 1
                        self.summary.failures.append(str(exc))
                        continue
                    self._insert(record)
            except StorageUnavailable:
                raise
            except Error as exc:
                # One broken station feed must not cost the other 31.
                self.summary.failures.append(
                    f"weather {meta.station.file_id}: {exc}")

    def pollution_scrape(self, entry) -> None:
        request_hour = min(23, entry.at.hour)
        for station in self.config.pollution_stations:
            try:
                payload = self.source.fetch_pollution(
                    station, self.plan.day, request_hour, fetched_at=entry.at)
                readings = parse_pollution_tables(payload)
                candidates = assemble_station_day(readings, station, self.plan.day)
                for raw in candidates:
                    try:
                        record, _report = validate_pollution(raw, self.config.rules)
                    except RecordRejected as exc:
                        self.summary.rejected += 1
                        self.summary.failures.append(str(exc))
                        continue
                    self._insert(record)
            except StorageUnavailable:
                raise
            except Error as exc:
                self.summary.failures.append(
                    f"pollution {station.file_id}: {exc}")

    def execute(self, entry) -> None:
        if entry.kind == TRAFFIC_POLL:
            self.traffic(entry)
        elif entry.kind == WEATHER_BACKFILL:
            self.weather_backfill(entry)
        elif entry.kind == POLLUTION_SCRAPE:
            self.pollution_scrape(entry)
        else:  # pragma: no cover - plans only hold known kinds
            raise ConfigError(f"unknown task kind {entry.kind!r}")


def run_day(plan: CadencePlan, source, store, config,
            clock: Clock | None = None,
            quarantine: Quarantine | None = None) -> RunSummary:
    """Execute one day's plan against a source registry and a store.

    Individual entry failures are recorded and the day continues; only
    an unavailable store aborts, raising with the partial summary
    attached. Inserts for the whole day share one transaction.
    """
    clock = clock or SimulatedClock(datetime.combine(plan.day, time(0, 0)))
    quarantine = quarantine if quarantine is not None else Quarantine()
    summary = RunSummary(day=plan.day)
    runner = _DayRunner(plan, source, store, config, summary, quarantine)
    started_at = clock.now()
    daily = (WEATHER_BACKFILL, POLLUTION_SCRAPE)
    try:
        with store.deferred():
            for entry in plan.entries:
                if entry.at < started_at and entry.kind not in daily:
                    summary.skipped += 1
                    continue
                clock.wait_until(entry.at)
                try:
                    runner.execute(entry)
                except StorageUnavailable:
                    raise
                except Error as exc:
                    summary.failures.append(f"{entry.kind} {entry.target}: {exc}")
                summary.fired += 1
    except StorageUnavailable as exc:
        raise RunAborted(f"store unavailable on {plan.day}: {exc}",
                         summary) from exc
    return summary
