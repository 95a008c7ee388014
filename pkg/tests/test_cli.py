import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wienerchaos.cli import fourth_moment_rows, main
from wienerchaos.random_instances import random_kernel
from wienerchaos.specfile import KernelSpec, SpecError, dump_spec, parse_spec
from wienerchaos.tensor_core import contract_sym, inner

SQUARE = {"dim": 1, "components": [{"name": "F", "order": 2,
                                    "coeffs": [{"idx": [0, 0], "value": 1.0}]}]}


def write(tmp_path, doc, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def mixed_doc(rng):
    f, g = random_kernel(rng, 2, 1), random_kernel(rng, 2, 2)
    spec = KernelSpec(2, ("A", "B"), (f, g))
    return dump_spec(spec), inner(g, contract_sym(f, f, 0))


# kernel spec documents

@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_spec_round_trip(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(1, 4))
    kernels = tuple(random_kernel(rng, dim, int(q)) for q in rng.integers(1, 4, size=2))
    doc = dump_spec(KernelSpec(dim, ("a", "b"), kernels))
    again = dump_spec(parse_spec(json.loads(json.dumps(doc))))
    assert again == doc


@pytest.mark.parametrize("doc", [
    [],
    {"dim": 0, "components": []},
    {"dim": 1, "components": []},
    {"dim": 2, "components": [{"order": 2, "coeffs": [{"idx": [1, 0], "value": 1.0}]}]},
    {"dim": 2, "components": [{"order": 2, "coeffs": [{"idx": [0, 2], "value": 1.0}]}]},
    {"dim": 2, "components": [{"order": 2, "coeffs": [{"idx": [0], "value": 1.0}]}]},
    {"dim": 2, "components": [{"order": 1, "coeffs": [{"idx": [0], "value": 1.0},
                                                      {"idx": [0], "value": 2.0}]}]},
    {"dim": 2, "components": [{"order": 0, "coeffs": []}]},
    {"dim": 2, "components": [{"order": 1, "coeffs": [{"idx": [0], "value": "x"}]}]},
])
def test_malformed_specs_are_rejected(doc):
    with pytest.raises(SpecError):
        parse_spec(doc)


# exit codes

def test_cumulant_command_routes_agree(tmp_path, capsys):
    code, out, _ = run(capsys, "cumulant", "--spec", write(tmp_path, SQUARE), "--m", "3")
    report = json.loads(out)
    assert code == 0
    assert report["closed_form_averaged"] == report["gamma_averaged"] == report["oracle"] == 8.0
    assert "timings" in report
    code, out, _ = run(capsys, "cumulant", "--spec", write(tmp_path, SQUARE), "--m", "1")
    assert code == 0 and json.loads(out)["oracle"] == 0.0


def test_cumulant_command_mixed_orderings(tmp_path, capsys, rng):
    doc, c = mixed_doc(rng)
    code, out, _ = run(capsys, "cumulant", "--spec", write(tmp_path, doc), "--m", "2,1")
    report = json.loads(out)
    assert code == 0
    per = {tuple(row["ordering"]): row for row in report["per_ordering"]}
    for path, factor in [((1, 0, 0), 2), ((0, 1, 0), 4), ((0, 0, 1), 0)]:
        assert per[path]["closed_form"] == pytest.approx(factor * c, rel=1e-12, abs=1e-15)
        assert per[path]["gamma"] == pytest.approx(factor * c, rel=1e-12, abs=1e-15)
    assert report["closed_form_averaged"] == pytest.approx(2 * c, rel=1e-12)


def test_bad_input_exit_codes(tmp_path, capsys):
    assert run(capsys, "cumulant", "--spec", str(tmp_path / "missing.json"), "--m", "1")[0] == 64
    assert run(capsys, "cumulant", "--spec", write(tmp_path, "{not json"), "--m", "1")[0] == 64
    assert run(capsys, "cumulant", "--spec", write(tmp_path, SQUARE), "--m", "1,1")[0] == 64
    assert run(capsys, "cumulant", "--spec", write(tmp_path, SQUARE), "--m", "x")[0] == 64
    assert run(capsys, "cumulant", "--spec", write(tmp_path, SQUARE))[0] == 64
    assert run(capsys, "nonsense")[0] == 64
    assert run(capsys, "demo", "--n", "0,1")[0] == 64
    code, out, err = run(capsys, "verify", "--instances", "0")
    assert code == 64 and out == "" and "instances" in err


def test_cap_exit_code(tmp_path, capsys):
    doc = {"dim": 1, "components": [{"order": 9, "coeffs": [{"idx": [0] * 9, "value": 1.0}]}]}
    code, out, err = run(capsys, "cumulant", "--spec", write(tmp_path, doc), "--m", "4")
    assert code == 65 and out == "" and "cap" in err


def test_bounds_command(tmp_path, capsys):
    code, out, _ = run(capsys, "bounds", "--spec", write(tmp_path, SQUARE))
    report = json.loads(out)
    assert code == 0
    assert report["delta_C"] == pytest.approx(math.sqrt(8), rel=1e-14)
    assert report["psi"] == pytest.approx(2 * math.sqrt(48), rel=1e-14)
    assert report["d2_bound"] == pytest.approx(math.sqrt(2), rel=1e-14)
    assert report["delta_le_psi"] is True


def test_bounds_command_gaussian_and_singular(tmp_path, capsys):
    gauss = {"dim": 2, "components": [{"order": 1, "coeffs": [{"idx": [0], "value": 1.0}]}]}
    report = json.loads(run(capsys, "bounds", "--spec", write(tmp_path, gauss))[1])
    assert report["delta_C"] == report["psi"] == report["d2_bound"] == report["d1_bound"] == 0.0
    assert report["fourth_cumulants"] == [0.0]
    dup = {"dim": 1, "components": [SQUARE["components"][0], SQUARE["components"][0]]}
    code, out, _ = run(capsys, "bounds", "--spec", write(tmp_path, dup))
    assert code == 0 and json.loads(out)["d1_bound"] == "inf"


def test_demo_rows():
    rows = {row["n"]: row for row in fourth_moment_rows([1, 4])}
    assert rows[1]["chi4"] == 48.0
    assert rows[4]["chi4"] == 12.0
    assert rows[4]["delta_C"] == pytest.approx(math.sqrt(2), rel=1e-12)
    assert all(r["closed_forms_match"] and r["decreasing"] for r in rows.values())


def test_demo_csv_and_json(capsys):
    code, out, _ = run(capsys, "demo", "--no-timings")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("n,second_moment,chi4")
    assert [line.split(",")[0] for line in lines[1:]] == ["1", "2", "4", "8", "16", "32", "64"]
    code, out, _ = run(capsys, "demo", "--n", "1,2,1000", "--format", "json", "--no-timings")
    report = json.loads(out)
    assert code == 0 and report["all_ok"] and report["rows"][-1]["decreasing"]


def test_verify_command_and_negative_control(capsys):
    code, out, _ = run(capsys, "verify", "--instances", "3", "--seed", "1", "--no-timings")
    assert code == 0 and json.loads(out)["passed"] is True
    assert "timings" not in json.loads(out)
    code, out, _ = run(capsys, "verify", "--instances", "5", "--inject-fault", "--no-timings")
    report = json.loads(out)
    assert code == 2 and report["passed"] is False
    assert report["checks"]["closed_form_vs_oracle"]["failed"] > 0


def test_single_instance_verify_is_deterministic(capsys):
    first = run(capsys, "verify", "--instances", "1", "--seed", "5", "--no-timings")[1]
    second = run(capsys, "verify", "--instances", "1", "--seed", "5", "--no-timings")[1]
    assert first == second


def test_simulate_command(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--spec", write(tmp_path, SQUARE), "--m", "3",
                       "--samples", "200000", "--no-timings")
    report = json.loads(out)
    assert code == 0 and report["oracle"] == 8.0 and report["within_4_sigma"]
    assert abs(report["estimate"] - 8.0) <= 4 * report["stderr"]


def test_simulate_rejects_small_or_deep_requests(tmp_path, capsys):
    spec = write(tmp_path, SQUARE)
    assert run(capsys, "simulate", "--spec", spec, "--m", "2", "--samples", "10")[0] == 64
    assert run(capsys, "simulate", "--spec", spec, "--m", "7", "--samples", "100")[0] == 64


def test_module_entry_point(tmp_path):
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "wienerchaos", "bounds", "--spec",
                           write(tmp_path, SQUARE), "--no-timings"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["command"] == "bounds"
