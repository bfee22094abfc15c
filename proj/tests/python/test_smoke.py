import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import cdr

CONFIGS = Path(os.environ.get("CDR_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


def load(name):
    return (CONFIGS / name).read_text()


def test_version_and_hash():
    assert cdr.__version__ == "0.1.0"
    a = cdr.config_hash('{"preset": "rods", "model": {"w0": 2}}')
    b = cdr.config_hash('{ "model": {"w0": 2}, "preset": "rods" }')
    assert a == b and len(a) == 16


def test_cohomology_of_the_hole():
    s = cdr.Scenario(load("hole.json"))
    assert s.cohomology()[:2] == [1, 1]
    assert s.harmonic_basis(1).shape[1] == 1


def test_dd_is_zero():
    s = cdr.Scenario(load("square.json"))
    for k in range(s.max_degree):
        prod = s.total_derivative(k + 1) @ s.total_derivative(k)
        assert np.abs(prod).max(initial=0.0) == 0.0


def test_solve_manufactured_rods():
    s = cdr.Scenario(load("rods_manufactured.json"))
    out = s.solve()
    assert out["harmonic_dim"] == 1
    assert out["system_residual"] < 1e-10
    assert out["l2_error"] < 5e-2
    assert out["alpha"].shape == (s.size(0),)


def test_decomposition_is_orthogonal():
    s = cdr.Scenario(load("hole.json"))
    d = s.decompose(1, seed=5)
    m = s.mass_matrix(1)
    parts = [d["exact"], d["harmonic"], d["coexact"]]
    assert np.allclose(sum(parts), d["omega"], atol=1e-10)
    scale = d["omega"] @ m @ d["omega"]
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(parts[i] @ m @ parts[j]) <= 1e-10 * scale


def test_poincare_unit_interval():
    text = json.dumps({"mesh": {"dim": 1, "extents": [0, 1], "resolution": 64}, "cover": {"sets": ["all"]}})
    c0 = cdr.Scenario(text).poincare_constant(0)
    assert abs(c0 * math.pi - 1.0) < 0.02


def test_config_errors_raise_value_error():
    with pytest.raises(ValueError, match="epsilon"):
        cdr.Scenario('{"preset": "rods", "model": {"epsilon": 2}}')
    with pytest.raises(ValueError):
        cdr.Scenario("{not json")


def test_cli_in_process(tmp_path):
    code, out, _ = cdr.run(["cohomology", "--config", str(CONFIGS / "interval.json"), "--out", str(tmp_path)])
    assert code == 0
    assert json.loads(out)["k0"] == 1
    assert (tmp_path / "cohomology.csv").read_text().startswith("# cdr 0.1.0")
    code, _, err = cdr.run(["solve"])
    assert code == 1 and err


def test_example_configs_match_the_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads((CONFIGS.parent / "docs" / "config.schema.json").read_text())
    names = sorted(p.name for p in CONFIGS.glob("*.json"))
    assert names
    for name in names:
        jsonschema.validate(json.loads(load(name)), schema)
        cdr.Scenario(load(name))
