import json
import math

import jsonschema
import numpy as np

from phasekit.fock import make_coherent_state, make_fock_state
from phasekit.logseries import equivalence_report
from phasekit.report import (
    EQUIVALENCE_REPORT_SCHEMA,
    MOMENT_REPORT_SCHEMA,
    UNITARITY_REPORT_SCHEMA,
    json_text,
    operator_csv,
    read_operator_csv,
    rounded,
    sidecar_path,
)
from phasekit.turski import build_phase_operator_analytic, operator_expectation_moments, phase_moments_q, unitarity_defect
from phasekit.pegg_barnett import PBConfig, pb_moments


def test_rounding_to_twelve_digits():
    assert rounded(math.pi) == 3.14159265359
    assert rounded(-0.0) == 0.0
    assert rounded({"x": np.float64(1) / 3, "z": 1j, "bad": float("nan")}) == \
        {"x": 0.333333333333, "z": {"re": 0.0, "im": 1.0}, "bad": None}


def test_json_text_stable():
    data = {"b": [1, 2.5], "a": np.arange(3)}
    assert json_text(data) == json_text(data)
    assert json_text(data).endswith("}\n")
    assert json.loads(json_text(data))["a"] == [0, 1, 2]


def test_reports_match_schemas():
    state = make_coherent_state(1.0, 20)
    for rep in (phase_moments_q(state), operator_expectation_moments(state), pb_moments(state, PBConfig.aligned(31))):
        jsonschema.validate(json.loads(json_text(rep.to_dict())), MOMENT_REPORT_SCHEMA)
    jsonschema.validate(json.loads(json_text(unitarity_defect(6).to_dict())), UNITARITY_REPORT_SCHEMA)
    op = build_phase_operator_analytic(4)
    jsonschema.validate(json.loads(json_text(equivalence_report(op, op, 4).to_dict())), EQUIVALENCE_REPORT_SCHEMA)


def test_operator_csv_roundtrip(tmp_path):
    op = build_phase_operator_analytic(5)
    path = tmp_path / "op.csv"
    path.write_text(operator_csv(op))
    assert path.read_text().splitlines()[0] == "m,n,re,im"
    np.testing.assert_allclose(read_operator_csv(path), op.entries, rtol=1e-11)


def test_sidecar_path():
    assert str(sidecar_path("out/phi.csv", ".meta.json")) == "out/phi.meta.json"


def test_fock_moment_report_values():
    d = json.loads(json_text(phase_moments_q(make_fock_state(1, 4)).to_dict()))
    assert d["variance"] == 3.2898681337
    assert d["grid"] == {"n_radial": 128, "n_angular": 512, "theta0": 0.0}
