import json
import subprocess
import sys

import pytest

from cli_cases import EXTRA_RUNS, FIXTURE_RUNS
from qlbridge import cli


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def run_json(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    return json.loads(out)


def test_ks_solve_mermin_peres(capsys):
    doc = run_json(["ks", "solve", "--mode", "mcp", "mermin_peres"], capsys)
    assert doc["status"] == "UNSAT"
    assert doc["audit"] == {"total": 512, "satisfying": 0}


def test_prob_q_eigenstate(capsys):
    doc = run_json(["prob", "q", "--state", "S0", "--property", "Ez", "qubit_model"], capsys)
    assert doc["probability"]["value"] == 1.0


def test_unknown_identifier_is_an_input_error(capsys):
    code, out, err = run(["eval", "E1(x) & E9(x)", "witness_model"], capsys)
    assert code == cli.EXIT_INPUT and out == ""
    assert "E9" in err


def test_exit_codes(capsys, tmp_path):
    assert run(["prob", "mean", "E[c1](x)", "S(x)", "tprime_violation"], capsys)[0] == \
        cli.EXIT_TPRIME
    assert run(["prob", "q", "--state", "S", "--property", "E", "tprime_violation"],
               capsys)[0] == cli.EXIT_TPRIME
    assert run(["--budget", "3", "ks", "solve", "mermin_peres"], capsys)[0] == cli.EXIT_BUDGET
    assert run(["ks", "report", "mermin_peres", "--budget", "3"], capsys)[0] == cli.EXIT_BUDGET
    assert run(["prob", "cond-q", "qubit_model", "--e", "Ex", "--f", "Ezp", "--state", "S0"],
               capsys)[0] == cli.EXIT_PRECONDITION
    assert run(["eval", "E1(x)", "no_such_fixture"], capsys)[0] == cli.EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text("{\"universe\": [")
    code, _, err = run(["eval", "E1(x)", str(bad)], capsys)
    assert code == cli.EXIT_INPUT and str(bad) in err and "line 1" in err


def test_flags_before_or_after_the_subcommand(capsys):
    a = run(["--format", "table", "prob", "compat", "compat_nontransitive"], capsys)
    b = run(["prob", "compat", "compat_nontransitive", "--format", "table"], capsys)
    assert a == b and a[0] == 0
    assert a[1].startswith("compatible:")


def test_fixture_listing(capsys):
    doc = run_json(["fixtures"], capsys)
    assert doc["fixtures"] == sorted(FIXTURE_RUNS)


@pytest.mark.parametrize("name", sorted(FIXTURE_RUNS))
def test_every_fixture_runs(name, capsys):
    code, out, err = run(FIXTURE_RUNS[name], capsys)
    assert code in (0, cli.EXIT_TPRIME), err
    json.loads(out)


def test_selected_outputs(capsys):
    doc = run_json(FIXTURE_RUNS["qubit_model"], capsys)
    assert doc["value"] == 0.5 and doc["bayes_gap"] == 0.5 and doc["meet"] == "O"
    doc = run_json(FIXTURE_RUNS["qubit_model"] + ["--collapse"], capsys)
    assert doc["bayes_gap"] == 0.0
    doc = run_json(FIXTURE_RUNS["demo_model"], capsys)
    assert doc["probability"]["exact"] == "1/2"
    doc = run_json(FIXTURE_RUNS["boolean8"], capsys)
    assert doc["diagnostics"]["boolean"] is True
    assert doc["isomorphism"]["isomorphic"] is False
    doc = run_json(["lattice-check", "c2_lattice", "--meet", "Z0", "Xp"], capsys)
    assert doc["meet"] == "O"


def test_synthesize_writes_a_model(capsys, tmp_path):
    target = tmp_path / "model.json"
    run_json(["prob", "synthesize", "qubit_system", "--resolution", "20",
              "--output", str(target)], capsys)
    doc = run_json(["prob", "q", str(target), "--state", "Sp", "--property", "Ex"], capsys)
    assert doc["probability"]["exact"] == "1"


def test_dispatch_reaches_every_operation():
    reached = {fn.__name__ for _, fns in cli.DISPATCH.values() for fn in fns}
    reached.add("main")
    operations = [
        "parse", "to_text", "fragment_of", "extension", "logical_preorder",
        "physical_preorder", "c_truth", "verifiable_wffs", "concrete_logic",
        "lattice_diagnostics", "order_isomorphic", "meet", "ortho", "born", "justify",
        "pragmatic_preorder", "quantum_fragment_structure", "cond_prob", "testable",
        "compatibility", "mean_cond_prob", "q_probability", "generalized_measure_check",
        "conditional_q_prob", "born_model_synthesize", "mean_probability_measurement",
        "check_law", "mcp_solve", "mgp_check", "contextuality_report", "main",
    ]
    assert [op for op in operations if op not in reached] == []
    keys = {k for k in cli.DISPATCH}
    for sub in ("cond", "mean", "q", "cond-q", "synthesize", "sample"):
        assert f"prob {sub}" in keys
    assert {"ks solve", "ks report"} <= keys


@pytest.mark.parametrize("argv", [FIXTURE_RUNS[k] for k in sorted(FIXTURE_RUNS)] + EXTRA_RUNS,
                         ids=lambda a: " ".join(a[:3]))
def test_byte_identical_runs(argv, capsys):
    first = run(argv, capsys)
    second = run(argv, capsys)
    assert first == second


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qlbridge.cli", "ks", "solve",
                           "spin1_triads_demo"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "SAT"
