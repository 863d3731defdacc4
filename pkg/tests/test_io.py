import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iftrkit.channel_lab import FrequencyGrid, synth_scenario
from iftrkit.io import (
    MAGIC,
    FormatError,
    RunManifest,
    config_digest,
    export_channel_set_text,
    file_digest,
    format_value,
    parse_value,
    read_channel_set,
    read_manifest,
    read_table,
    table_text,
    write_channel_set,
    write_manifest,
    write_table,
)


@pytest.fixture(scope="module")
def small_set():
    cs = synth_scenario("anechoic", 3, FrequencyGrid(n_points=16))
    cs.channels = cs.channels[:20]
    return cs


def test_channel_set_round_trip(tmp_path, small_set):
    path = write_channel_set(tmp_path / "a.chs", small_set)
    assert path.read_bytes()[:8] == MAGIC
    back = read_channel_set(path)
    assert back.scenario == small_set.scenario
    assert back.grid == small_set.grid
    assert len(back.channels) == len(small_set.channels)
    for a, b in zip(small_set.channels, back.channels):
        np.testing.assert_array_equal(a.h, b.h)
        assert a.meta == b.meta


def test_channel_set_bad_magic(tmp_path):
    path = tmp_path / "bad.chs"
    path.write_bytes(b"NOTACHS!" + b"\0" * 32)
    with pytest.raises(FormatError):
        read_channel_set(path)


def test_channel_set_truncated_payload(tmp_path, small_set):
    path = write_channel_set(tmp_path / "a.chs", small_set)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FormatError):
        read_channel_set(path)


def test_text_export(tmp_path, small_set):
    path = export_channel_set_text(tmp_path / "a.csv", small_set)
    cols, rows = read_table(path)
    assert cols == ["row", "col", "azimuth", "roll", "freq_hz", "re", "im"]
    assert len(rows) == 20 * 16
    assert rows[1][6] == small_set.channels[0].h[1].imag


cells = st.one_of(
    st.none(),
    st.integers(-10 ** 12, 10 ** 12),
    st.floats(allow_nan=False),
    st.text(alphabet="abcxyz_-", min_size=1).filter(lambda s: s not in ("inf", "nan")),
)


@given(st.lists(st.tuples(cells, cells, cells), max_size=8))
def test_table_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("t") / "t.csv"
    write_table(path, ("a", "b", "c"), rows)
    cols, back = read_table(path)
    assert cols == ["a", "b", "c"]
    assert [tuple(r) for r in back] == rows
    assert path.read_text() == table_text(("a", "b", "c"), rows)


def test_format_value_special_cases():
    assert format_value(1.0) == "1.0"
    assert format_value(True) == "1"
    assert format_value(np.int64(7)) == "7"
    assert math.isnan(parse_value(format_value(float("nan"))))
    assert parse_value(format_value(-float("inf"))) == -float("inf")
    x = 0.1 + 0.2
    assert parse_value(format_value(x)) == x
    assert isinstance(parse_value("3.0"), float)


def test_table_rejects_ragged_rows(tmp_path):
    with pytest.raises(FormatError):
        write_table(tmp_path / "t.csv", ("a", "b"), [(1,)])
    (tmp_path / "r.csv").write_text("a,b\n1\n")
    with pytest.raises(FormatError):
        read_table(tmp_path / "r.csv")


def test_manifest_round_trip(tmp_path):
    out = tmp_path / "run"
    data = write_table(out / "x.csv", ("a",), [(1,)])
    cfg = {"seed": 1, "model": "iftr"}
    m = RunManifest("merge-fit", 1, cfg, config_digest(cfg), "0.1.0")
    m.finish(out, [data])
    write_manifest(out, m)
    back = read_manifest(out)
    assert back == m
    assert back.outputs == {"x.csv": file_digest(data)}
    assert json.loads((out / "manifest.json").read_text())["command"] == "merge-fit"


def test_config_digest_is_canonical():
    assert config_digest({"a": 1, "b": 2}) == config_digest({"b": 2, "a": 1})
    assert config_digest({"a": 1}) != config_digest({"a": 2})
