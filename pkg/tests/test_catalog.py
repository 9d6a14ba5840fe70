import pytest
from hypothesis import given, strategies as st

from regscope.catalog import (
    N_LOCATIONS,
    Catalog,
    FeatureVector,
    builtin_catalog,
    example_path,
    parse_manifest,
)
from regscope.errors import ManifestInvalid
from regscope.paths import is_prefix_of, parse_path

from oracles import naive_match
from pathgen import WORDS, random_event_paths




@pytest.fixture(scope="module")
def catalog():
    return builtin_catalog()


def test_size_and_ids(catalog):
    assert len(catalog) == N_LOCATIONS
    assert [loc.id for loc in catalog] == list(range(1, 48))


def test_literal_rows(catalog):
    assert catalog.by_id[1].raw == "HKEY_LOCAL_MACHINE\\SYSTEM\\ControlSet001\\Control\\Nls\\CustomLocale\\en-US"
    assert catalog.by_id[17].raw == "%Systemdrive%\\Users\\victim_user\\AppData\\"
    assert catalog.by_id[18].raw == "%Systemdrive%\\Windows\\System32"
    assert catalog.by_id[45].raw == "%systemdrive%\\Program Files\\Software_name\\"


def test_wildcards_in_patterns(catalog):
    assert catalog.by_id[17].pattern.segments == ("users", "%USER%", "appdata")
    assert catalog.by_id[45].pattern.segments == ("program files", "%NAME%")
    assert catalog.by_id[40].pattern.segments[0] == "%SID%"


def test_duplicates_resolve_to_lowest_id(catalog):
    dupes = {loc.id: catalog.duplicate_of(loc.id) for loc in catalog if catalog.duplicate_of(loc.id) != loc.id}
    assert dupes == {41: 23, 47: 44}


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("HKLM\\SYSTEM\\CurrentControlSet\\Control\\Nls\\CustomLocale\\en-US\\x", 1),
        ("HKLM\\SYSTEM\\ControlSet001\\Control\\Nls\\Sorting", 2),
        ("HKLM\\SYSTEM\\Setup", 5),
        ("C:\\Users\\mallory\\AppData\\Roaming\\evil.exe", 17),
        ("%APPDATA%\\evil.exe", 17),
        ("C:\\Windows\\System32\\drivers\\x.sys", 18),
        ("C:\\Program Files\\Chrome\\chrome.exe", 45),
        ("HKLM\\SOFTWARE\\Classes\\foo", 23),
        ("HKCR\\foo", 42),
        ("HKCR\\exefile\\shell\\open\\command", 28),
        # The bare system drive is itself a location, so any file path lands somewhere.
        ("C:\\temp\\x", 21),
        ("HKCC\\System", None),
    ],
)
def test_match_examples(catalog, raw, expected):
    assert catalog.match_event(parse_path(raw)) == expected


def test_every_location_matches_itself_modulo_duplicates(catalog):
    for loc in catalog:
        got = catalog.match_event(parse_path(example_path(loc)))
        assert got == catalog.duplicate_of(loc.id)


def test_trie_equals_naive_scan(catalog):
    for raw in random_event_paths(2000, seed=11):
        p = parse_path(raw)
        assert catalog.match_event(p) == naive_match(catalog, p), raw


@given(st.integers(0, 46), st.lists(st.sampled_from(WORDS), min_size=1, max_size=4))
def test_deeper_paths_never_match_shallower(idx, extra):
    # Extending a path can only keep or deepen its matching location.
    catalog = builtin_catalog()
    base = parse_path(example_path(catalog[idx], leaf=None))
    longer = parse_path(example_path(catalog[idx], leaf=None) + "\\" + "\\".join(extra))
    assert is_prefix_of(base, longer)
    a, b = catalog.match_event(base), catalog.match_event(longer)
    assert b is not None
    assert len(catalog.by_id[b].pattern) >= len(catalog.by_id[a].pattern)


def test_feature_vector(catalog):
    events = [parse_path(r) for r in ("C:\\Windows\\System32\\a", "C:\\Windows\\System32\\b", "HKLM\\SYSTEM")]
    ex = catalog.extract(events)
    assert ex.vector.set_ids() == [5, 18]
    assert ex.hits[18].raw == "C:\\Windows\\System32\\a"
    assert ex.unmatched == 0
    assert len(FeatureVector.zeros()) == 47
    assert catalog.build_feature_vector([]) == FeatureVector.zeros()


def test_custom_manifest():
    cat = Catalog.from_manifest("# test\nP1\tHKLM\\A\nP2\tHKLM\\A\\B\tdeeper\n", width=2)
    assert cat.match_event(parse_path("HKLM\\a\\b\\c")) == 2
    assert cat.by_id[2].note == "deeper"
    assert cat.version != builtin_catalog().version


@pytest.mark.parametrize(
    "text",
    ["", "# only comments\n", "P1\tHKLM\\a\nP1\tHKLM\\b\n", "P1\tHKLM\\a\nP3\tHKLM\\b\n",
     "X1\tHKLM\\a\n", "P1\tNOPE\\a\n", "P1 HKLM\\a\n", "P0\tHKLM\\a\n"],
)
def test_invalid_manifests(text):
    with pytest.raises(ManifestInvalid):
        parse_manifest(text)


def test_catalog_from_env(tmp_path, monkeypatch):
    f = tmp_path / "m.tsv"
    f.write_text("P1\tHKCU\\x\n", encoding="utf-8")
    monkeypatch.setenv("REGSCOPE_CATALOG", str(f))
    assert len(Catalog.from_env()) == 1
    monkeypatch.delenv("REGSCOPE_CATALOG")
    assert len(Catalog.from_env()) == 47
