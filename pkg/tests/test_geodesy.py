import csv
import math

import pytest
from hypothesis import given, settings, strategies as st

from proximity.geodesy import (EARTH_RADIUS_KM, GazetteerError, GeoPoint, ZipGazetteer, haversine_km,
                               load_gazetteer, normalize_zip, pair_distances)

lats = st.floats(min_value=-90, max_value=90, allow_nan=False)
lons = st.floats(min_value=-180, max_value=180, allow_nan=False)
points = st.builds(GeoPoint, lats, lons)


def _vector_distance(a, b):
    # independent route: angle between unit vectors via atan2(|u x v|, u . v)
    def vec(p):
        la, lo = math.radians(p.lat), math.radians(p.lon)
        return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))
    u, v = vec(a), vec(b)
    cross = (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
    return EARTH_RADIUS_KM * math.atan2(math.sqrt(sum(c * c for c in cross)), sum(x * y for x, y in zip(u, v)))


@pytest.mark.parametrize("lat,lon", [(91, 0), (-90.5, 0), (0, 180.1), (0, -181), (math.nan, 0)])
def test_geopoint_rejects_out_of_range(lat, lon):
    with pytest.raises(ValueError):
        GeoPoint(lat, lon)


def test_haversine_identity_and_quarter_circle():
    p = GeoPoint(12.5, -40.0)
    assert haversine_km(p, p) == 0.0
    d = haversine_km(GeoPoint(0, 0), GeoPoint(0, 90))
    assert d == pytest.approx(math.pi / 2 * 6371.0088, rel=1e-6)


def test_haversine_nyc_la():
    d = haversine_km(GeoPoint(40.7128, -74.0060), GeoPoint(34.0522, -118.2437))
    assert abs(d - 3936) <= 1
    assert d == pytest.approx(_vector_distance(GeoPoint(40.7128, -74.0060), GeoPoint(34.0522, -118.2437)), abs=1e-6)


@given(points, points)
def test_symmetric_and_bounded(a, b):
    d = haversine_km(a, b)
    assert d == haversine_km(b, a)
    assert 0 <= d <= math.pi * EARTH_RADIUS_KM


@given(points, points)
def test_agrees_with_vector_formula(a, b):
    assert haversine_km(a, b) == pytest.approx(_vector_distance(a, b), abs=1e-6)


@settings(max_examples=300)
@given(points, points, points)
def test_triangle_inequality(a, b, c):
    assert haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-9


def test_normalize_zip():
    assert normalize_zip("02139-4307") == "02139"
    for bad in ("2139", "ABCDE", "021390"):
        with pytest.raises(ValueError):
            normalize_zip(bad)


def test_load_single_row_keeps_leading_zero(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("zip,lat,lon\n02139,42.3647,-71.1042\n")
    g = load_gazetteer(p)
    assert len(g) == 1 and "02139" in g
    assert g.lookup("02139") == GeoPoint(42.3647, -71.1042)


def test_empty_file_is_error(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("")
    with pytest.raises(GazetteerError, match="zero valid rows"):
        load_gazetteer(p)
    p.write_text("zip,lat,lon\nnope,1,2\n")
    with pytest.raises(GazetteerError, match="zero valid rows"):
        load_gazetteer(p)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_gazetteer("/nonexistent/gaz.csv")


def test_malformed_rows_counted(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("zip,lat,lon\n02139,42.3647,-71.1042\nABCDE,1,2\n12345,95,0\n10001,40.75,x\n")
    g = load_gazetteer(p)
    assert len(g) == 1 and g.malformed == 3


def test_conflicting_duplicate(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("zip,lat,lon\n02139,42.3647,-71.1042\n02139,42.0,-71.0\n")
    with pytest.raises(GazetteerError, match="conflicting"):
        load_gazetteer(p)
    p.write_text("zip,lat,lon\n02139,42.3647,-71.1042\n02139,42.3647,-71.1042\n")
    assert len(load_gazetteer(p)) == 1


def test_configurable_columns(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("postal,latitude,longitude\n00501,40.8154,-73.0451\n")
    g = load_gazetteer(p, zip_col="postal", lat_col="latitude", lon_col="longitude")
    assert g.lookup("00501").lat == 40.8154


def test_bundled_fixture_round_trip(gazetteer_csv):
    g = load_gazetteer(gazetteer_csv)
    with open(gazetteer_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert sorted(g.entries) == sorted(r["zip"] for r in rows)
    row = next(r for r in rows if r["zip"] == "10001")
    pt = g.lookup("10001")
    assert (pt.lat, pt.lon) == (float(row["lat"]), float(row["lon"]))


def test_gazetteer_rejects_bad_keys():
    with pytest.raises(GazetteerError):
        ZipGazetteer({"2139": GeoPoint(0, 0)})


def test_pair_distances(gazetteer_csv):
    g = load_gazetteer(gazetteer_csv)
    res = pair_distances([("02139", "02139")], g)
    assert list(res.sample.values) == [0.0] and res.excluded == 0
    with pytest.raises(GazetteerError):
        pair_distances([("02139", "99999")], g)
    pairs = [("02139", "10001"), ("99999", "10001"), ("90001", "60601"), ("02139", "00000"), ("94105", "33101")]
    res = pair_distances(pairs, g)
    assert res.sample.n == 3 and res.excluded == 2
    assert res.sample.values[0] == haversine_km(g.lookup("02139"), g.lookup("10001"))
