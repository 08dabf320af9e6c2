import io
import json
import logging
import warnings

import numpy as np
import pandas as pd
import pytest

from fixtures import *
from heislab.estimate import Estimate, Method, combine
from heislab.log import collect_warnings
from heislab.report import RunManifest, print_rows, report_paths, result_digest, write_report
from heislab.util import canonical_json, parallel_map, split_counts


ROWS = [{"a": 1, "b": 0.5}, {"a": 2, "b": np.float64(1.5)}]


def _square(x):
    return x * x


def test_digest_ignores_key_order():
    assert result_digest([{"b": 0.5, "a": 1}]) == result_digest([{"a": 1, "b": 0.5}])
    assert result_digest(ROWS) != result_digest(ROWS[:1])
    assert canonical_json({"x": np.arange(2)}) == '{"x":[0,1]}'


def test_write_report(tmp_path):
    m = RunManifest("dist", ["dist", "--point", "1,0,0"], result_digest(ROWS), True, seeds=[0])
    csv, js = write_report(str(tmp_path), "dist", ROWS, m)
    assert (csv, js) == report_paths(str(tmp_path), "dist")
    df = pd.read_csv(csv)
    assert list(df.columns) == ["a", "b"]
    np.testing.assert_allclose(df["b"], [0.5, 1.5])
    again = RunManifest.load(js)
    assert again == RunManifest.from_dict(m.to_dict())
    assert again.result_digest == result_digest(ROWS)


def test_manifest_schema():
    d = RunManifest("x", [], "0", True).to_dict()
    d["schema"] = 99
    with pytest.raises(ValueError):
        RunManifest.from_dict(d)


def test_print_rows():
    out = io.StringIO()
    print_rows(ROWS, "json", out)
    assert json.loads(out.getvalue())[1]["b"] == 1.5
    out = io.StringIO()
    print_rows(ROWS, "csv", out)
    assert out.getvalue().splitlines()[0] == "a,b"
    with pytest.raises(ValueError):
        print_rows(ROWS, "xml")


def test_estimate():
    e = Estimate(1.0, 0.1, 100, 0, Method.MCMC)
    assert e.agrees_with(1.25, k=3.0)
    assert not e.agrees_with(1.5, k=3.0)
    assert e.to_dict()["method"] == "mcmc"
    with pytest.raises(ValueError):
        Estimate(1.0, -0.1, 100, 0, Method.MCMC)
    c = combine([e, Estimate(2.0, 0.1, 300, 0, Method.MCMC)])
    assert c.value == pytest.approx(1.75)
    assert c.n_samples == 400
    assert c.stderr == pytest.approx(0.1 * np.sqrt(0.25 ** 2 + 0.75 ** 2))


def test_split_counts():
    assert split_counts(10, 4) == [3, 3, 2, 2]
    assert sum(split_counts(64, 8)) == 64


def test_parallel_map_keeps_order():
    assert parallel_map(_square, range(6), threads=1) == [0, 1, 4, 9, 16, 25]
    assert parallel_map(_square, range(6), threads=3) == [0, 1, 4, 9, 16, 25]


def test_collect_warnings():
    log = logging.getLogger("heislab.test")
    with collect_warnings() as seen:
        log.warning("tail is heavy")
        log.warning("tail is heavy")
        log.info("not a warning")
        logging.getLogger("elsewhere").warning("not ours")
    log.warning("after")
    assert seen == ["tail is heavy"]


def test_ragged_arrays_raise():
    import heislab
    category = getattr(np, "exceptions", np).VisibleDeprecationWarning
    assert any(f[0] == "error" and f[2] is category for f in warnings.filters)
    with pytest.raises(category):
        warnings.warn("ragged nested sequences", category)
