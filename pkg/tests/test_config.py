import json

import jsonschema
import numpy as np
import pytest

from summoment.cli import load_schema
from summoment.config import ProcessSpec, generate, parse_scalar
from summoment.errors import SpecValidationError
from summoment.processes import Markov1Kernel, kernel_to_cov


def test_white_zero_variance():
    (x,) = generate(ProcessSpec.from_dict({"kind": "white", "n": 3, "sigma2": 0}))
    assert x.tolist() == [0.0, 0.0, 0.0]


@pytest.mark.parametrize("doc", [
    {"kind": "white", "n": 5},
    {"kind": "markov1", "n": 5, "alpha": 0.3, "method": "exact"},
    {"kind": "markov2", "n": 5, "alpha": 0.3, "taps": 3},
    {"kind": "cov", "n": 2, "cov": [1, 0.5, 0.5, 1], "mean": [1, 2]},
    {"kind": "pair", "n": 4, "alpha": 0.5, "rho": 0.3, "base": "markov2"},
    {"kind": "shifted", "n": 50, "alpha": 0.3, "delay": 4, "noise_var": 0.1},
    {"kind": "pair", "blocks": {"n1": 1, "n2": 1, "c_x1": [1], "c_x2": [1], "c_x1x2": [0.2]}},
])
def test_roundtrip_and_schema(doc):
    spec = ProcessSpec.from_dict(doc)
    d = spec.to_dict()
    jsonschema.validate(d, load_schema("process_spec"))
    assert ProcessSpec.from_dict(json.loads(json.dumps(d))) == spec
    out = generate(spec)
    assert all(np.all(np.isfinite(s)) for s in out)
    expected_n = doc.get("n", 1)
    assert all(s.size == expected_n for s in out)


def test_generate_is_deterministic():
    spec = ProcessSpec.from_dict({"kind": "markov2", "n": 100, "alpha": 0.4, "seed": 9})
    a, b = generate(spec)[0], generate(spec)[0]
    assert np.array_equal(a, b)
    other = generate(ProcessSpec.from_dict({"kind": "markov2", "n": 100, "alpha": 0.4, "seed": 10}))[0]
    assert not np.array_equal(a, other)


def test_pair_blocks_from_base():
    spec = ProcessSpec.from_dict({"kind": "pair", "n": 3, "alpha": 0.5, "rho": 0.4})
    c1, c2, c12 = spec.pair_blocks()
    c = kernel_to_cov(Markov1Kernel(0.5, 1.0), 3).entries
    assert np.allclose(c1, c) and np.allclose(c2, c) and np.allclose(c12, 0.4 * c)


@pytest.mark.parametrize("doc, field", [
    ({"n": 3}, "kind"),
    ({"kind": "brown", "n": 3}, "kind"),
    ({"kind": "white", "n": 0}, "n"),
    ({"kind": "white", "n": 3, "colour": 1}, "colour"),
    ({"kind": "white", "n": 3, "sigma2": -1}, "sigma2"),
    ({"kind": "markov1", "n": 3}, "alpha"),
    ({"kind": "markov1", "n": 3, "alpha": 0}, "alpha"),
    ({"kind": "markov1", "n": 3, "alpha": 0.3, "sigma2": 0}, "sigma2"),
    ({"kind": "markov1", "n": 3, "alpha": 0.3, "method": "arma"}, "method"),
    ({"kind": "white", "n": 3, "method": "ar"}, "method"),
    ({"kind": "cov", "n": 2, "cov": [1, 0, 0]}, "cov"),
    ({"kind": "cov", "n": 2, "cov": [1, 0, 0, 1], "taps": 2}, "taps"),
    ({"kind": "pair", "n": 2, "alpha": 0.3, "rho": 1.5}, "rho"),
    ({"kind": "pair", "blocks": {"n1": 1, "n2": 1, "c_x1": [1], "c_x2": [1]}}, "blocks.c_x1x2"),
    ({"kind": "white", "n": 3, "seed": -1}, "seed"),
    ({"kind": "white", "n": 3, "schema_version": "v2"}, "schema_version"),
    ({"kind": "white", "n": True}, "n"),
])
def test_field_level_errors(doc, field):
    with pytest.raises(SpecValidationError) as exc:
        ProcessSpec.from_dict(doc)
    assert exc.value.field == field
    assert str(exc.value).startswith(field + ":")


def test_parse_scalar():
    assert parse_scalar("3") == 3
    assert parse_scalar("[0.1, 0.2]") == [0.1, 0.2]
    assert parse_scalar("abc") == "abc"
