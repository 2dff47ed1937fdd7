from __future__ import annotations

import json
from datetime import date, datetime
from pathlib import Path

import pytest

from urbanobs.connectors import (
    NA_CELL,
    FixtureDirectorySource,
    Quarantine,
    SourcePayload,
    assemble_station_day,
    parse_pollution_tables,
    parse_traffic_response,
    parse_weather_observations,
    pollution_payload_body,
    traffic_payload_body,
    weather_payload_body,
)
from urbanobs.errors import (
    ConflictError,
    ParseError,
    PreconditionError,
    SourceError,
)
from urbanobs.model import CONTAMINANTS, PollutionStation, TrafficRoute

FIXTURES = Path(__file__).parent / "fixtures"
MANIFEST = json.loads((FIXTURES / "manifest.json").read_text())

FETCHED = datetime(2016, 5, 17, 0, 30, 0)


def _payload(kind: str, name: str) -> SourcePayload:
    return SourcePayload(kind, FETCHED, (FIXTURES / name).read_text(), name)


@pytest.fixture(scope="module")
def stations(default_cfg):
    return {m.station.file_id: m.station for m in default_cfg.weather_stations}


class TestWeatherParsing:
    def test_fixture_against_manifest(self, stations):
        want = MANIFEST["weather_day.txt"]
        readings, quarantined = parse_weather_observations(
            _payload("weather", "weather_day.txt"), stations)
        assert len(readings) == want["readings"]
        assert len(quarantined) == want["quarantined"]
        assert want["quarantine_reason_contains"] in quarantined[0].reason
        first = readings[0]
        assert first.target == want["first"]["target"]
        assert first.timestamp == want["first"]["timestamp"]
        assert first.station_kind == want["first"]["station_kind"]
        assert dict(first.fields) == want["first"]["fields"]
        airport = readings[-1]
        assert airport.target == want["airport"]["target"]
        assert airport.station_kind == "airport"
        assert airport.fields["metar"] == want["airport"]["metar"]

    def test_values_kept_verbatim(self, stations):
        # every numeric field text appears in the payload untouched
        body = (FIXTURES / "weather_day.txt").read_text()
        readings, _ = parse_weather_observations(
            _payload("weather", "weather_day.txt"), stations)
        for r in readings:
            for key, value in r.fields.items():
                assert value in body

    def test_serialize_round_trip(self, stations):
        body = (FIXTURES / "weather_day.txt").read_text()
        payload = SourcePayload("weather", FETCHED, body, "x")
        readings, quarantined = parse_weather_observations(payload, stations)
        # the ghost line is quarantined, so rebuild without it
        rebuilt = weather_payload_body(
            (r.target, r.timestamp, r.fields) for r in readings)
        readings2, q2 = parse_weather_observations(
            SourcePayload("weather", FETCHED, rebuilt, "x"), stations)
        assert readings2 == readings
        assert q2 == []

    def test_empty_payload(self, stations):
        readings, quarantined = parse_weather_observations(
            SourcePayload("weather", FETCHED, "# nothing today\n", "x"), stations)
        assert readings == [] and quarantined == []

    def test_unknown_key_rejected(self, stations):
        bad = "pws_obispado 2016-05-16T08:05:00 sunshine=11\n"
        with pytest.raises(ParseError, match="sunshine"):
            parse_weather_observations(
                SourcePayload("weather", FETCHED, bad, "x"), stations)

    def test_duplicate_key_rejected(self, stations):
        bad = "pws_obispado 2016-05-16T08:05:00 temp=20 temp=21\n"
        with pytest.raises(ParseError, match="duplicate"):
            parse_weather_observations(
                SourcePayload("weather", FETCHED, bad, "x"), stations)

    def test_airport_only_key_on_pws_rejected(self, stations):
        bad = "pws_obispado 2016-05-16T08:05:00 metar='METAR X'\n"
        with pytest.raises(ParseError, match="airport-only"):
            parse_weather_observations(
                SourcePayload("weather", FETCHED, bad, "x"), stations)

    def test_bad_timestamp_rejected(self, stations):
        bad = "pws_obispado yesterday temp=20\n"
        with pytest.raises(ParseError, match="timestamp"):
            parse_weather_observations(
                SourcePayload("weather", FETCHED, bad, "x"), stations)

    def test_error_carries_line_number(self, stations):
        bad = ("pws_obispado 2016-05-16T08:05:00 temp=20\n"
               "pws_obispado 2016-05-16T08:10:00 nope=1\n")
        with pytest.raises(ParseError) as err:
            parse_weather_observations(
                SourcePayload("weather", FETCHED, bad, "feed"), stations)
        assert err.value.line_no == 2
        assert err.value.origin == "feed"

    def test_wrong_payload_kind(self, stations):
        with pytest.raises(PreconditionError):
            parse_weather_observations(
                SourcePayload("traffic", FETCHED, "x 2016-05-16T00:00:00 1 2 3\n", "x"),
                stations)


ROUTE = TrafficRoute(file_id="downtown-aeropuerto",
                     start_lat=25.6695, start_long=-100.3095,
                     end_lat=25.7785, end_long=-100.1070)


class TestTrafficParsing:
    def test_fixture_against_manifest(self):
        want = MANIFEST["traffic_single.txt"]
        raw = parse_traffic_response(_payload("traffic", "traffic_single.txt"), ROUTE)
        assert raw.target == want["route"]
        assert raw.timestamp == want["timestamp"]
        assert dict(raw.fields) == want["fields"]

    def test_serialize_round_trip(self):
        body = (FIXTURES / "traffic_single.txt").read_text()
        raw = parse_traffic_response(
            SourcePayload("traffic", FETCHED, body, "x"), ROUTE)
        rebuilt = traffic_payload_body(
            raw.target, raw.timestamp, raw.fields["traveldist"],
            raw.fields["traveltime_std"], raw.fields["traveltime_curr"])
        assert rebuilt == body

    def test_missing_field_rejected(self):
        bad = "downtown-aeropuerto 2016-05-16T07:48:00 18560 1215\n"
        with pytest.raises(ParseError, match="5 fields"):
            parse_traffic_response(SourcePayload("traffic", FETCHED, bad, "x"), ROUTE)

    def test_wrong_route_rejected(self):
        bad = "elsewhere-aeropuerto 2016-05-16T07:48:00 18560 1215 2066\n"
        with pytest.raises(ParseError, match="elsewhere"):
            parse_traffic_response(SourcePayload("traffic", FETCHED, bad, "x"), ROUTE)

    def test_two_records_rejected(self):
        bad = ("downtown-aeropuerto 2016-05-16T07:48:00 18560 1215 2066\n"
               "downtown-aeropuerto 2016-05-16T08:00:00 18560 1215 2066\n")
        with pytest.raises(ParseError, match="exactly one"):
            parse_traffic_response(SourcePayload("traffic", FETCHED, bad, "x"), ROUTE)


STATION = PollutionStation(file_id="sima_centro", lat=25.67, long=-100.338)
DAY = date(2016, 5, 16)


class TestPollutionParsing:
    def test_fixture_against_manifest(self):
        want = MANIFEST["pollution_day.txt"]
        readings = parse_pollution_tables(_payload("pollution", "pollution_day.txt"))
        assert len(readings) == want["cells_total"]
        per_contaminant: dict[str, int] = {}
        for r in readings:
            assert r.target == want["station"]
            assert r.timestamp.startswith(want["date"])
        # cells with values name their contaminant in the field dict
        for c in CONTAMINANTS:
            n = sum(1 for r in readings if c in r.fields)
            if want["na_cells"].get(c) == "all":
                assert n == 0
            else:
                na = len(want["na_cells"].get(c, []))
                assert n == want["hours_per_contaminant"] - na

    def test_assembled_day_against_manifest(self):
        want = MANIFEST["pollution_day.txt"]
        readings = parse_pollution_tables(_payload("pollution", "pollution_day.txt"))
        candidates = assemble_station_day(readings, STATION, DAY)
        assert len(candidates) == want["hours_per_contaminant"]
        by_hour = {c.timestamp[11:16]: c for c in candidates}
        for hhmm, values in want["spot_values"].items():
            for attr, v in values.items():
                assert int(by_hour[hhmm].fields[attr]) == v
        # NA pattern: missing keys where the table had dashes
        assert "o3" not in by_hour["07:00"].fields
        assert "co" not in by_hour["02:00"].fields
        assert all("pm25" not in c.fields for c in candidates)

    def test_candidates_ordered_by_hour(self):
        readings = parse_pollution_tables(_payload("pollution", "pollution_day.txt"))
        candidates = assemble_station_day(readings, STATION, DAY)
        hours = [c.timestamp for c in candidates]
        assert hours == sorted(hours)

    def test_no_hour_00_or_01_anywhere(self):
        readings = parse_pollution_tables(_payload("pollution", "pollution_day.txt"))
        for r in readings:
            assert r.timestamp[11:13] not in ("00", "01")

    def test_early_hours_rejected_at_parse(self):
        for hh in ("00", "01"):
            bad = (f"station=sima_centro contaminant=PM10 date=2016-05-16\n"
                   f"{hh}:00 40\n")
            with pytest.raises(ParseError, match="00 or 01"):
                parse_pollution_tables(SourcePayload("pollution", FETCHED, bad, "x"))

    def test_unknown_contaminant_rejected(self):
        bad = "station=sima_centro contaminant=NH3 date=2016-05-16\n02:00 40\n"
        with pytest.raises(ParseError, match="NH3"):
            parse_pollution_tables(SourcePayload("pollution", FETCHED, bad, "x"))

    def test_duplicate_cell_conflicts(self):
        bad = ("station=sima_centro contaminant=PM10 date=2016-05-16\n"
               "02:00 40\n02:00 44\n")
        with pytest.raises(ConflictError):
            parse_pollution_tables(SourcePayload("pollution", FETCHED, bad, "x"))

    def test_duplicate_cell_across_blocks_conflicts(self):
        bad = ("station=sima_centro contaminant=PM10 date=2016-05-16\n02:00 40\n"
               "\n"
               "station=sima_centro contaminant=PM10 date=2016-05-16\n02:00 41\n")
        with pytest.raises(ConflictError):
            parse_pollution_tables(SourcePayload("pollution", FETCHED, bad, "x"))

    def test_ascii_dash_also_means_na(self):
        body = "station=sima_centro contaminant=PM10 date=2016-05-16\n02:00 -\n"
        readings = parse_pollution_tables(SourcePayload("pollution", FETCHED, body, "x"))
        assert len(readings) == 1 and readings[0].fields == {}

    def test_mixed_station_assembly_rejected(self):
        readings = parse_pollution_tables(_payload("pollution", "pollution_day.txt"))
        other = PollutionStation(file_id="sima_norte", lat=25.8, long=-100.34)
        with pytest.raises(PreconditionError, match="sima_centro"):
            assemble_station_day(readings, other, DAY)

    def test_mixed_day_assembly_rejected(self):
        readings = parse_pollution_tables(_payload("pollution", "pollution_day.txt"))
        with pytest.raises(PreconditionError, match="2016-05-17"):
            assemble_station_day(readings, STATION, date(2016, 5, 17))

    def test_all_dash_hour_still_yields_candidate(self):
        body = ("station=sima_centro contaminant=PM10 date=2016-05-16\n"
                f"02:00 {NA_CELL}\n")
        readings = parse_pollution_tables(SourcePayload("pollution", FETCHED, body, "x"))
        candidates = assemble_station_day(readings, STATION, DAY)
        assert len(candidates) == 1
        assert candidates[0].fields == {}

    def test_serialize_round_trip(self):
        body = (FIXTURES / "pollution_day.txt").read_text()
        blocks = []
        # rebuild the blocks from the parsed cells plus the known grid
        readings = parse_pollution_tables(
            SourcePayload("pollution", FETCHED, body, "x"))
        by_cell = {}
        hours = sorted({r.timestamp[11:16] for r in readings})
        for r in readings:
            for attr, v in r.fields.items():
                by_cell[(attr, r.timestamp[11:16])] = v
        for c in CONTAMINANTS:
            cells = [(h, by_cell.get((c, h))) for h in hours]
            blocks.append(("sima_centro", c.upper(), "2016-05-16", cells))
        assert pollution_payload_body(blocks) == body


class TestQuarantine:
    def test_threadsafe_sink_collects(self):
        q = Quarantine()
        from urbanobs.connectors import QuarantinedLine
        q.extend([QuarantinedLine("x", 1, "line", "why")])
        assert len(q) == 1
        assert q.items[0].reason == "why"


class TestFixtureDirectorySource:
    def _layout(self, tmp_path: Path) -> Path:
        root = tmp_path / "corpus"
        (root / "weather" / "pws_obispado").mkdir(parents=True)
        (root / "weather" / "pws_obispado" / "2016-05-16.txt").write_text(
            "pws_obispado 2016-05-16T00:00:00 temp=20.0\n")
        (root / "traffic" / "downtown-aeropuerto").mkdir(parents=True)
        (root / "traffic" / "downtown-aeropuerto" / "2016-05-16.txt").write_text(
            "downtown-aeropuerto 2016-05-16T07:48:00 18560 1215 2066\n"
            "downtown-aeropuerto 2016-05-16T08:00:00 18560 1215 1998\n")
        (root / "pollution" / "sima_centro").mkdir(parents=True)
        (root / "pollution" / "sima_centro" / "2016-05-16.txt").write_text(
            "station=sima_centro contaminant=PM10 date=2016-05-16\n02:00 40\n")
        return root

    def test_fetch_each_kind(self, tmp_path):
        root = self._layout(tmp_path)
        src = FixtureDirectorySource(root)

        class Meta:
            pass

        class St:
            file_id = "pws_obispado"

        meta = Meta()
        meta.station = St()
        payload = src.fetch_weather(meta, DAY)
        assert "temp=20.0" in payload.body

        at = datetime(2016, 5, 16, 8, 0, 0)
        payload = src.fetch_traffic(ROUTE, at)
        assert payload.body.strip().endswith("1998")

        payload = src.fetch_pollution(STATION, DAY, 23)
        assert "PM10" in payload.body

    def test_missing_fixture_errors(self, tmp_path):
        src = FixtureDirectorySource(self._layout(tmp_path))
        with pytest.raises(SourceError, match="2016-05-17"):
            src.fetch_pollution(STATION, date(2016, 5, 17), 23)

    def test_missing_traffic_instant_errors(self, tmp_path):
        src = FixtureDirectorySource(self._layout(tmp_path))
        with pytest.raises(SourceError, match="09:00"):
            src.fetch_traffic(ROUTE, datetime(2016, 5, 16, 9, 0, 0))


def test_payload_kind_checked():
    with pytest.raises(PreconditionError):
        SourcePayload("video", FETCHED, "x\n", "x")
    with pytest.raises(PreconditionError):
        SourcePayload("weather", FETCHED, "", "x")
