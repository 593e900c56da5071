import json

import numpy as np
import pytest

from bayesarfima.data import (read_config, read_series, to_jsonable, write_json, write_records, write_samples,
                              write_series)
from bayesarfima.errors import ConfigError, DataError
from bayesarfima.samplers import SampleMatrix


def test_read_series_with_and_without_header(tmp_path):
    with_header = tmp_path / "a.csv"
    with_header.write_text("x\n1.5\n-2\n\n3e-1\n")
    np.testing.assert_array_equal(read_series(with_header), [1.5, -2.0, 0.3])
    bare = tmp_path / "b.csv"
    bare.write_text("0.25,ignored\n0.5\n")
    np.testing.assert_array_equal(read_series(bare), [0.25, 0.5])


@pytest.mark.parametrize("content", ["", "x\n", "x\n1.0\nNA\n", "1.0\nnan\n", "1.0\ninf\n"])
def test_read_series_rejects_bad_files(tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(DataError):
        read_series(path)


def test_read_series_missing_file(tmp_path):
    with pytest.raises(DataError):
        read_series(tmp_path / "nothing.csv")


def test_write_series_keeps_full_precision(tmp_path, rng):
    x = rng.standard_normal(50) / 3
    path = tmp_path / "x.csv"
    write_series(path, x)
    assert path.read_text().splitlines()[0] == "x"
    np.testing.assert_array_equal(read_series(path), x)
    write_series(path, [0.5, 2.0], header=False)
    assert path.read_text().split() == ["0.5", "2"]
    np.testing.assert_array_equal(read_series(path), [0.5, 2.0])


def test_write_samples_pads_with_empty_fields(tmp_path):
    values = [[0, 1, 0, 0.1, 0.5], [1, 0, 0, 0.2, np.nan]]
    path = tmp_path / "draws.csv"
    write_samples(path, SampleMatrix(["iter", "p", "q", "d", "varphi_1"], values))
    lines = path.read_text().splitlines()
    assert lines == ["iter,p,q,d,varphi_1", "0,1,0,0.1,0.5", "1,0,0,0.2,"]


def test_write_records_uses_union_of_keys(tmp_path):
    path = tmp_path / "records.csv"
    write_records(path, [{"index": 0, "d_mean": 0.1}, {"index": 1, "error": "ValueError: x"}])
    lines = path.read_text().splitlines()
    assert lines[0] == "index,d_mean,error"
    assert lines[2] == "1,,ValueError: x"


def test_json_output(tmp_path, capsys):
    payload = {"a": np.float64(0.5), "b": np.arange(3), "c": np.nan, 1: (np.int64(2),)}
    assert to_jsonable(payload) == {"a": 0.5, "b": [0, 1, 2], "c": None, "1": [2]}
    path = tmp_path / "out.json"
    write_json(path, payload)
    assert json.loads(path.read_text())["c"] is None
    write_json("-", {"x": 1})
    assert json.loads(capsys.readouterr().out) == {"x": 1}


def test_read_config(tmp_path):
    good = tmp_path / "good.json"
    good.write_text('{"iters": 100}')
    assert read_config(good) == {"iters": 100}
    for text in ("[1, 2]", "{broken"):
        bad = tmp_path / "bad.json"
        bad.write_text(text)
        with pytest.raises(ConfigError):
            read_config(bad)
    with pytest.raises(ConfigError):
        read_config(tmp_path / "absent.json")
