import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quarticsos.errors import ModelFormatError
from quarticsos.io import dumps_model, load_model, loads_model, model_from_dict, model_to_dict, save_model
from quarticsos.problems import make_ahmadi, make_euclidean_example, random_sensor
from quarticsos.io import sensor_to_dict

from reference import random_model


def _doc(**over):
    d = {"f0": 0.0, "g": [0.0, 0.0], "H": [[1.0, 0.0], [0.0, 1.0]], "sigma": 1.0, "T": []}
    d.update(over)
    return json.dumps(d)


class TestRoundTrip:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_exact_equality(self, n, seed):
        m = random_model(np.random.default_rng(seed), n)
        back = loads_model(dumps_model(m))
        assert back == m
        assert dumps_model(back) == dumps_model(m)

    def test_file_round_trip(self, tmp_path):
        m = make_euclidean_example(2.0)
        p = tmp_path / "m.json"
        save_model(m, p)
        assert load_model(p) == m

    def test_schnabel_round_trip(self):
        sch = make_ahmadi(4.0)
        back = model_from_dict(json.loads(json.dumps(model_to_dict(sch))))
        for name in ("g", "H", "a", "b", "sigmas"):
            np.testing.assert_array_equal(getattr(back, name), getattr(sch, name))
        assert back.f0 == sch.f0

    def test_tensor_entries_sorted_and_unique(self, rng):
        d = model_to_dict(random_model(rng, 3))
        keys = [(e["i"], e["j"], e["k"]) for e in d["T"]]
        assert keys == sorted(set(keys))
        assert all(i <= j <= k for i, j, k in keys)

    def test_sensor_document(self):
        d = sensor_to_dict(random_sensor(seed=3))
        assert d["kind"] == "sensor"
        assert len(d["x0"]) == 6 and len(d["d_ss"]) == 1 and len(d["d_sa"]) == 4


class TestRejection:
    def test_malformed_json(self):
        with pytest.raises(ModelFormatError):
            loads_model("{")

    def test_duplicate_triple(self):
        e = {"i": 0, "j": 0, "k": 1, "v": 1.0}
        with pytest.raises(ModelFormatError, match="duplicate"):
            loads_model(_doc(T=[e, e]))

    def test_unordered_triple(self):
        with pytest.raises(ModelFormatError, match="ordered"):
            loads_model(_doc(T=[{"i": 1, "j": 0, "k": 1, "v": 1.0}]))

    def test_out_of_range_index(self):
        with pytest.raises(ModelFormatError):
            loads_model(_doc(T=[{"i": 0, "j": 0, "k": 2, "v": 1.0}]))

    @pytest.mark.parametrize(
        "over",
        [{"sigma": -1.0}, {"sigma": "x"}, {"H": [[1.0, 2.0], [0.0, 1.0]]}, {"g": [0.0]}, {"f0": None}],
    )
    def test_invalid_fields(self, over):
        with pytest.raises(ModelFormatError):
            loads_model(_doc(**over))

    def test_missing_field(self):
        with pytest.raises(ModelFormatError, match="missing"):
            loads_model(json.dumps({"f0": 0.0, "g": [0.0]}))

    def test_unknown_kind(self):
        with pytest.raises(ModelFormatError):
            model_from_dict({"kind": "other"})
