import io
import json
from fractions import Fraction

import pytest

from selinf.errors import DatasetParseError
from selinf.generators import gen_classical, gen_ghz, gen_prbox
from selinf.experiment import make_design, validate_dataset
from selinf.io import dataset_from_json_dict, dump_dataset, load_dataset

F = Fraction

CHSH_DOC = {
    "inputs": [
        {"label": "axis1", "values": ["a1", "a2"]},
        {"label": "axis2", "values": ["b1", "b2"]},
    ],
    "outputs": [
        {"label": "spin1", "values": ["up", "down"]},
        {"label": "spin2", "values": ["up", "down"]},
    ],
    "treatments": [
        {"treatment": [1, 1], "probabilities": {"1,1": "1/2", "2,2": "0.5"}},
        {"treatment": [1, 2], "probabilities": {"1,1": "1/2", "2,2": "1/2"}},
        {"treatment": [2, 1], "counts": {"1,1": 30, "2,2": "30"}},
        {"treatment": [2, 2], "probabilities": {"1,2": "0.5", "2,1": "1/2"}},
    ],
}


def test_decimal_and_fraction_strings_parse_exactly():
    ds = dataset_from_json_dict(CHSH_DOC)
    assert ds.prob((1, 1), (2, 2)) == F(1, 2)
    assert ds.prob((2, 2), (1, 2)) == F(1, 2)
    assert validate_dataset(ds).valid


def test_counts_become_exact_frequencies():
    ds = dataset_from_json_dict(CHSH_DOC)
    assert ds.prob((2, 1), (1, 1)) == F(1, 2)


def test_roundtrip_preserves_exactness():
    for ds in (gen_prbox(), gen_ghz(), gen_classical(make_design((2, 2), (2, 3)), seed=3)[0]):
        buf = io.StringIO()
        dump_dataset(ds, buf)
        buf.seek(0)
        again = load_dataset(buf)
        # labels differ from generated ones only if we mangled them; full equality expected
        assert again == ds


def test_malformed_probability_string():
    doc = json.loads(json.dumps(CHSH_DOC))
    doc["treatments"][0]["probabilities"]["1,1"] = "one half"
    with pytest.raises(DatasetParseError, match="malformed probability"):
        dataset_from_json_dict(doc)


def test_float_probability_rejected():
    doc = json.loads(json.dumps(CHSH_DOC))
    doc["treatments"][0]["probabilities"]["1,1"] = 0.5
    with pytest.raises(DatasetParseError, match="float"):
        dataset_from_json_dict(doc)


def test_bad_outcome_key():
    doc = json.loads(json.dumps(CHSH_DOC))
    doc["treatments"][0]["probabilities"]["1"] = "1/2"
    with pytest.raises(DatasetParseError, match="coordinates"):
        dataset_from_json_dict(doc)


def test_json_error_carries_position():
    with pytest.raises(DatasetParseError, match="line 1"):
        load_dataset(io.StringIO("{not json"))


def test_both_probabilities_and_counts_rejected():
    doc = json.loads(json.dumps(CHSH_DOC))
    doc["treatments"][0]["counts"] = {"1,1": 1}
    with pytest.raises(DatasetParseError, match="exactly one"):
        dataset_from_json_dict(doc)


def test_inefficient_detector_shape_loads():
    # 2 inputs x 2 values with ternary outcomes (third outcome = no detection)
    doc = {
        "inputs": [{"label": "a", "values": ["1", "2"]}, {"label": "b", "values": ["1", "2"]}],
        "outputs": [{"label": "A", "values": ["u", "d", "none"]}, {"label": "B", "values": ["u", "d", "none"]}],
        "treatments": [
            {"treatment": [i, j], "probabilities": {"3,3": "1/2", "1,2": "1/4", "2,1": "1/4"}}
            for i in (1, 2)
            for j in (1, 2)
        ],
    }
    ds = dataset_from_json_dict(doc)
    assert validate_dataset(ds).valid
    assert ds.design.outcome_sizes == (3, 3)
