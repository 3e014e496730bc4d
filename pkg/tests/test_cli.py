import json

import numpy as np
import pytest

from consonance import states, unitary
from consonance.cli import main
from consonance.coherence import nonlocal_sum
from consonance.measures import discord_werner, eof_from_concurrence
from consonance.qstate import (density_from_pure, save_state, state_from_json,
                               state_to_json)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# --- measure -------------------------------------------------------------


def test_measure_discord_werner(capsys):
    code, out, _ = run(capsys, "measure", "--measure", "discord",
                       "--family", "werner:0.5")
    assert code == 0
    assert float(out) == pytest.approx(discord_werner(0.5), abs=1e-15)


def test_measure_closed_form_consonance(capsys):
    code, out, _ = run(capsys, "measure", "--measure", "consonance_cf",
                       "--family", "two_param_2x3:alpha=0.1,gamma=0.3")
    assert code == 0
    beta = (1 - 0.2 - 0.3) / 3
    assert float(out) == pytest.approx(abs(beta - 0.3), abs=1e-12)


def test_measure_json_output(capsys):
    code, out, _ = run(capsys, "measure", "--measure", "concurrence",
                       "--family", "werner:0.8", "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["measure"] == "concurrence"
    assert obj["family"] == "werner"
    assert obj["params"] == {"a": 0.8}
    assert obj["value"] == pytest.approx(0.7, abs=1e-10)


def test_measure_optimizer_backend(capsys):
    code, out, _ = run(capsys, "measure", "--measure", "consonance",
                       "--family", "werner:0.5", "--restarts", "2",
                       "--max-evals", "2000", "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["value"] == pytest.approx(0.5, abs=1e-3)
    assert obj["feasible"] is True


def test_measure_eof_and_entropy_pair(capsys):
    code, out, _ = run(capsys, "measure", "--measure", "eof",
                       "--family", "bell_like:a2=0.8")
    assert code == 0
    assert float(out) == pytest.approx(eof_from_concurrence(0.8), abs=1e-12)


def test_measure_local_sums(capsys):
    code, out, _ = run(capsys, "measure", "--measure", "nonlocal_sum",
                       "--family", "werner:0.7")
    assert code == 0 and float(out) == pytest.approx(0.7, abs=1e-12)
    code, out, _ = run(capsys, "measure", "--measure", "local_coherence",
                       "--family", "ghz:3")
    assert code == 0 and float(out) == pytest.approx(0.0, abs=1e-12)


def test_measure_unknown_measure(capsys):
    code, _, err = run(capsys, "measure", "--measure", "sorcery",
                       "--family", "werner:0.5")
    assert code == 2
    assert "error" in err


def test_bad_family_parameter_is_invalid_state(capsys):
    code, _, err = run(capsys, "measure", "--measure", "consonance_cf",
                       "--family", "werner:1.5")
    assert code == 1
    assert "error" in err


def test_unknown_family_is_usage_error(capsys):
    code, _, err = run(capsys, "measure", "--measure", "consonance_cf",
                       "--family", "heisenberg:1")
    assert code == 2


def test_missing_source_is_argparse_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["measure", "--measure", "discord"])
    assert exc.value.code == 2


def test_measure_from_state_file(tmp_path, capsys):
    path = tmp_path / "w.json"
    save_state(states.werner(0.5), path)
    code, out, _ = run(capsys, "measure", "--measure", "nonlocal_sum",
                       "--state", str(path))
    assert code == 0
    assert float(out) == pytest.approx(0.5, abs=1e-12)


def test_state_flag_accepts_factory_specs(capsys):
    code, out, _ = run(capsys, "measure", "--measure", "nonlocal_sum",
                       "--state", "werner:0.25")
    assert code == 0
    assert float(out) == pytest.approx(0.25, abs=1e-12)


def test_missing_state_file(capsys):
    code, _, err = run(capsys, "measure", "--measure", "nonlocal_sum",
                       "--state", "no_such_state.json")
    assert code == 2


def test_no_validate_skips_physicality(tmp_path, capsys):
    obj = state_to_json(states.werner(0.5))
    # knock the trace off so strict loading rejects it
    obj["data"][0][0] = 0.01
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(obj))
    code, _, _ = run(capsys, "measure", "--measure", "nonlocal_sum",
                     "--state", str(path))
    assert code == 1
    code, out, _ = run(capsys, "measure", "--measure", "nonlocal_sum",
                       "--state", str(path), "--no-validate")
    assert code == 0


# --- schmidt -------------------------------------------------------------


def test_schmidt_csv(capsys):
    code, out, _ = run(capsys, "schmidt", "--state", "bell-like:a2=0.8")
    assert code == 0
    assert out.splitlines() == ["k,coefficient",
                                "0,0.894427191",
                                "1,0.447213595"]


def test_schmidt_json(capsys):
    code, out, _ = run(capsys, "schmidt", "--family", "bell:phi+", "--json")
    assert code == 0
    coeffs = json.loads(out)["coefficients"]
    assert coeffs == pytest.approx([2 ** -0.5, 2 ** -0.5], abs=1e-12)


def test_schmidt_rejects_density(capsys):
    code, _, err = run(capsys, "schmidt", "--family", "werner:0.5")
    assert code == 1


# --- classify ------------------------------------------------------------


def test_classify_bell_table(capsys):
    code, out, _ = run(capsys, "classify", "--family", "bell:phi+")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "row,col,row_parts,col_parts,class,modulus"
    rows = [l.split(",") for l in lines[1:]]
    assert len(rows) == 16
    classes = [r[4] for r in rows]
    assert classes.count("diagonal") == 4
    assert classes.count("local") == 8
    assert classes.count("nonlocal") == 4
    bright = [r for r in rows if float(r[5]) > 1e-12]
    assert sum(r[4] == "nonlocal" for r in bright) == 2
    assert sum(r[4] == "local" for r in bright) == 0
    assert sum(r[4] == "diagonal" for r in bright) == 2
    # multi-index rendering: composite index 3 is parties (1, 1)
    assert rows[3][:4] == ["0", "3", "0.0", "1.1"]


def test_classify_qutrit_pair_size(capsys):
    code, out, _ = run(capsys, "classify", "--family",
                       "two_param_2x3:alpha=0.1,gamma=0.3")
    assert code == 0
    assert len(out.splitlines()) == 1 + 36


# --- remap ---------------------------------------------------------------


def test_remap_werner_to_stdout(capsys):
    code, out, _ = run(capsys, "remap", "--state", "werner:0.2")
    assert code == 0
    rho = state_from_json(json.loads(out))
    assert rho.dims == (2, 2)
    assert np.allclose(np.diag(rho.entries), [0.2, 0.4, 0.2, 0.2], atol=1e-12)
    assert nonlocal_sum(rho) < 1e-12


def test_remap_to_file(tmp_path, capsys):
    path = tmp_path / "remapped.json"
    code, _, _ = run(capsys, "remap", "--family", "werner:0.9",
                     "--out", str(path))
    assert code == 0
    rho = state_from_json(json.loads(path.read_text()))
    assert np.diag(rho.entries)[1] == pytest.approx(0.925, abs=1e-12)


def test_remap_dimension_mismatch(capsys):
    code, _, err = run(capsys, "remap", "--family", "ghz:3")
    assert code == 2


def test_remap_unknown_relabeling(capsys):
    code, _, err = run(capsys, "remap", "--family", "werner:0.5",
                       "--relabeling", "nope")
    assert code == 2


# --- sweep ---------------------------------------------------------------


def test_sweep_fig3_small(capsys):
    code, out, _ = run(capsys, "sweep", "--recipe", "fig3", "--points", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# recipe = fig3"
    assert lines[1] == "# family = werner"
    assert any("dissonance" in l for l in lines if l.startswith("#"))
    assert "# seed = 0" in lines
    header = [l for l in lines if not l.startswith("#")][0]
    assert header == "a,c_minus_concurrence"
    data = [l.split(",") for l in lines[lines.index(header) + 1:]]
    got = {row[0]: float(row[1]) for row in data}
    assert got["0"] == pytest.approx(0.0, abs=1e-12)
    assert got["0.25"] == pytest.approx(0.25, abs=1e-12)
    assert got["0.5"] == pytest.approx(0.25, abs=1e-12)
    assert got["1"] == pytest.approx(0.0, abs=1e-12)


def test_sweep_is_byte_identical(capsys):
    code, first, _ = run(capsys, "sweep", "--recipe", "fig3", "--points", "7")
    code, second, _ = run(capsys, "sweep", "--recipe", "fig3", "--points", "7")
    assert first == second


def test_sweep_fig2_columns_and_closed_forms(capsys):
    code, out, _ = run(capsys, "sweep", "--recipe", "fig2", "--points", "3",
                       "--restarts", "2", "--max-evals", "2000")
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines[0] == ("a,consonance_cf,consonance_opt,consonance_opt_feasible,"
                        "discord,concurrence,eof")
    mid = lines[2].split(",")
    assert mid[0] == "0.5"
    assert mid[1] == "0.5"
    assert float(mid[2]) == pytest.approx(0.5, abs=1e-3)
    assert mid[3] == "true"
    assert mid[4] == "0.262483184"
    assert mid[5] == "0.25"
    assert mid[6] == "0.117618874"


def test_sweep_custom(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "werner", "--axis", "a",
                       "--start", "0", "--stop", "1", "--points", "3",
                       "--measures", "consonance_cf,negativity")
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines[0] == "a,consonance_cf,negativity"
    assert lines[1] == "0,0,0"
    assert lines[2] == "0.5,0.5,0.25"
    assert lines[3] == "1,1,1"


def test_sweep_weight_axis_reaches_closed_forms(capsys):
    # the a2 weight axis must feed the amplitude-based closed forms
    code, out, _ = run(capsys, "sweep", "--family", "bell_like",
                       "--axis", "a2", "--start", "0.2", "--stop", "0.8",
                       "--points", "3", "--measures", "discord,eof,consonance_cf")
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines[1] == "0.2,0.721928095,0.721928095,0.8"
    assert lines[2] == "0.5,1,1,1"


def test_sweep_fixed_parameters(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "two_param_2x3",
                       "--axis", "gamma", "--start", "0", "--stop", "0.2",
                       "--points", "2", "--fixed", "alpha=0.1",
                       "--measures", "negativity")
    assert code == 0
    assert "# fixed alpha = 0.1" in out.splitlines()


def test_sweep_custom_needs_all_axis_flags(capsys):
    code, _, err = run(capsys, "sweep", "--family", "werner", "--axis", "a",
                       "--start", "0", "--stop", "1")
    assert code == 2
    assert "--points" in err


def test_sweep_bad_fixed_entry(capsys):
    code, _, err = run(capsys, "sweep", "--family", "werner", "--axis", "a",
                       "--start", "0", "--stop", "1", "--points", "2",
                       "--fixed", "oops")
    assert code == 2


def test_sweep_writes_file(tmp_path, capsys):
    path = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--recipe", "fig3", "--points", "4",
                       "--out", str(path))
    assert code == 0
    assert out == ""
    assert path.read_text().startswith("# recipe = fig3")


def test_sweep_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CONSONANCE_SEED", "99")
    code, out, _ = run(capsys, "sweep", "--recipe", "fig3", "--points", "3")
    assert code == 0
    assert "# seed = 99" in out.splitlines()
    monkeypatch.setenv("CONSONANCE_SEED", "banana")
    code, _, err = run(capsys, "sweep", "--recipe", "fig3", "--points", "3")
    assert code == 2


# --- optimize ------------------------------------------------------------


def test_optimize_report_round_trip(tmp_path, capsys):
    path = tmp_path / "report.json"
    code, out, _ = run(capsys, "optimize", "--family", "werner:0.5",
                       "--restarts", "2", "--max-evals", "2000",
                       "--report", str(path))
    assert code == 0
    obj = json.loads(out)
    assert obj["config"]["restarts"] == 2
    assert obj["seed"] == 0
    assert obj["feasible"] is True
    assert obj["value"] == pytest.approx(0.5, abs=1e-3)
    assert json.loads(path.read_text()) == obj
    # replay the archived circuit through the public pipeline
    circuit = unitary.circuit_from_json(obj["circuit"])
    replayed = nonlocal_sum(unitary.apply(circuit, states.werner(0.5)))
    assert replayed == pytest.approx(obj["value"], abs=1e-9)


def test_optimize_with_warm_start_circuit(tmp_path, capsys):
    u_bell = np.column_stack([states.bell(k).amps
                              for k in ("phi+", "phi-", "psi+", "psi-")])
    cnot = np.zeros((4, 4), dtype=complex)
    cnot[0, 0] = cnot[1, 1] = cnot[2, 3] = cnot[3, 2] = 1.0
    circ = unitary.nonglobal_circuit((2, 2, 2))
    theta = np.concatenate([
        np.zeros(4),
        unitary.params_for_unitary(cnot).theta,
        unitary.params_for_unitary(u_bell.conj().T).theta,
    ])
    path = tmp_path / "witness.json"
    unitary.save_circuit(unitary.with_theta(circ, theta), path)
    code, out, _ = run(capsys, "optimize", "--family", "ghz:3",
                       "--preset", "nonglobal", "--restarts", "2",
                       "--max-evals", "2000", "--warm-start", str(path))
    assert code == 0
    obj = json.loads(out)
    assert obj["feasible"] is True
    assert obj["value"] <= 1e-4


def test_optimize_seed_flag_beats_environment(capsys, monkeypatch):
    monkeypatch.setenv("CONSONANCE_SEED", "5")
    code, out, _ = run(capsys, "optimize", "--family", "werner:0.3",
                       "--restarts", "2", "--max-evals", "2000",
                       "--seed", "17")
    assert code == 0
    assert json.loads(out)["seed"] == 17
