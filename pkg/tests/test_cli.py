"""End-to-end command line runs: exit codes, report bodies, determinism."""

import json
import subprocess
import sys
from fractions import Fraction

import pytest

from roundlab.cli import main
from roundlab.metric import FiniteMetricSpace
from roundlab.spaces import cycle_graph_space, write_space_csv


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    doc = json.loads(out) if out.strip() else None
    return code, doc, err


def strip_wall(text: str) -> str:
    return "\n".join(line for line in text.splitlines()
                     if '"wall_time_s"' not in line)


@pytest.fixture
def c4_csv(tmp_path):
    path = tmp_path / "c4.csv"
    write_space_csv(cycle_graph_space(4), str(path))
    return str(path)


@pytest.fixture
def broken_csv(tmp_path):
    rows = [[0, 1, 10], [1, 0, 1], [10, 1, 0]]
    space = FiniteMetricSpace.unchecked(rows)
    path = tmp_path / "broken.csv"
    write_space_csv(space, str(path))
    return str(path)


# ---------------------------------------------------------------------------
# validate and gr

def test_validate_ok(c4_csv, capsys):
    code, doc, _ = run(["validate", "--input", c4_csv], capsys)
    assert code == 0
    assert doc["results"]["ok"] is True
    assert doc["schema"] == 1
    assert doc["command"] == "validate"


def test_validate_violation(broken_csv, capsys):
    code, doc, _ = run(["validate", "--input", broken_csv], capsys)
    assert code == 2
    assert doc["results"]["ok"] is False
    assert doc["results"]["violations"]


def test_gr_estimate_cycle(c4_csv, capsys):
    code, doc, _ = run(["gr", "estimate", "--input", c4_csv], capsys)
    assert code == 0
    res = doc["results"]
    assert res["lower"] <= 1.0 <= res["upper"]
    assert res["upper"] - res["lower"] <= 1e-3
    assert res["certified"] is True
    assert doc["provenance"]["backend"] in ("compiled", "pure")
    assert "wall_time_s" in doc


def test_gr_estimate_deterministic(c4_csv, capsys):
    main(["gr", "estimate", "--input", c4_csv, "--search", "--seed", "5"])
    first = capsys.readouterr().out
    main(["gr", "estimate", "--input", c4_csv, "--search", "--seed", "5"])
    second = capsys.readouterr().out
    assert strip_wall(first) == strip_wall(second)


# ---------------------------------------------------------------------------
# simplex and counts

def test_simplex_build_stage_form(capsys):
    code, doc, err = run(["simplex", "build", "--n", "2", "--t", "0",
                          "--m", "1"], capsys)
    assert code == 0
    assert doc["results"]["verified"] is True
    assert doc["results"]["families"] == 2
    assert "stage form:" in err


def test_simplex_build_explicit(capsys):
    code, doc, _ = run(["simplex", "build", "--coords", "4", "--units", "8",
                        "--delta", "1", "--support", "2", "--size", "2"],
                       capsys)
    assert code == 0
    assert len(doc["results"]["xs"]) == 2
    assert len(doc["results"]["ys"]) == 2


def test_counts_pairs_648(capsys):
    code, doc, _ = run(["counts", "pairs", "--coords", "3", "--units", "6",
                        "--delta", "1", "--support", "1",
                        "--enumerate-budget", "1000"], capsys)
    assert code == 0
    assert doc["results"]["count"] == 648
    assert doc["results"]["enumerated"] == 648


def test_counts_pairs_budget_error(capsys):
    code, doc, err = run(["counts", "pairs", "--coords", "4", "--units", "8",
                          "--delta", "1", "--support", "2",
                          "--enumerate-budget", "100"], capsys)
    assert code == 1
    assert doc is None
    assert "budget exceeded" in err


def test_counts_incidences_frozen(capsys):
    code, doc, _ = run(["counts", "incidences", "--coords", "4", "--units",
                        "8", "--delta", "1", "--support", "2", "--size", "2"],
                       capsys)
    assert code == 0
    res = doc["results"]
    assert res["simplices"] == 49152
    assert res["simplices_per_edge_pair"] == 2
    assert res["simplices_per_conn_pair"] == 6
    assert res["ratio_identity_holds"] is True


# ---------------------------------------------------------------------------
# obstruction commands

@pytest.fixture
def growth_moduli(tmp_path):
    path = tmp_path / "moduli.json"
    samples = [[1, 1]] + [[2 ** k, k] for k in range(1, 9)]
    path.write_text(json.dumps({"samples": samples}))
    return str(path)


def test_obstruct_coarse_found(growth_moduli, capsys):
    code, doc, _ = run(["obstruct", "coarse", "--moduli", growth_moduli,
                        "--p", "1"], capsys)
    assert code == 2
    res = doc["results"]
    assert res["found"] is True
    assert res["n"] == 3
    assert res["alpha_exact"] == "3"


def test_obstruct_coarse_not_found(tmp_path, capsys):
    path = tmp_path / "flat.json"
    path.write_text(json.dumps([[1, 1], [2, 1], [4, 1]]))
    code, doc, _ = run(["obstruct", "coarse", "--moduli", str(path),
                        "--p", "1"], capsys)
    assert code == 0
    assert doc["results"]["found"] is False


def test_obstruct_uniform_workers_byte_identical(capsys):
    argv = ["obstruct", "uniform", "--map", "builtin:identity",
            "--n-ladder", "2", "--p", "2", "--samples", "1000",
            "--seed", "6"]
    code1 = main(argv + ["--workers", "1"])
    first = capsys.readouterr().out
    code2 = main(argv + ["--workers", "2"])
    second = capsys.readouterr().out
    assert code1 == code2 == 2
    assert strip_wall(first) == strip_wall(second)
    doc = json.loads(first)
    assert doc["results"]["obstruction_found"] is True


def test_obstruct_step_exit_codes(capsys):
    base = ["obstruct", "step", "--coords", "4", "--units", "8",
            "--delta", "1", "--support", "2", "--size", "2",
            "--p", "2", "--mode", "exact"]
    code, doc, _ = run(base + ["--map", "builtin:circle"], capsys)
    assert code == 0
    assert doc["results"]["margin"] == pytest.approx(0.5562869376523274)
    code2, doc2, _ = run(base + ["--map", "builtin:identity"], capsys)
    assert code2 == 2
    assert doc2["results"]["holds"] is False


def test_obstruct_chain_exit_codes(capsys):
    base = ["obstruct", "chain", "--coords", "8", "--units", "32",
            "--delta", "1", "--support", "4", "--size", "2",
            "--levels", "2", "--p", "2", "--mode", "mc",
            "--samples", "2000", "--seed", "3"]
    code, doc, _ = run(base + ["--map", "builtin:circle"], capsys)
    assert code == 0
    assert doc["results"]["cumulative_holds"] is True
    code2, doc2, _ = run(base + ["--map", "builtin:identity"], capsys)
    assert code2 == 2


# ---------------------------------------------------------------------------
# zspace commands

def test_zspace_validate_literal(capsys):
    code, doc, _ = run(["zspace", "validate", "--variant", "literal"], capsys)
    assert code == 2
    res = doc["results"]
    assert res["violation_count"] > 0
    first = res["violations"][0]
    assert first["lhs"] == "1048576"
    assert first["rhs"] == "69632"


def test_zspace_validate_corrected(capsys):
    code, doc, _ = run(["zspace", "validate", "--variant", "corrected",
                        "--block-bound", "12"], capsys)
    assert code == 0
    assert doc["results"]["violation_count"] == 0
    assert doc["results"]["certificate"]["ok"] is True
    assert doc["results"]["certificate"]["checked_cases"] == 1680


def test_zspace_ball(capsys):
    code, doc, _ = run(["zspace", "ball", "--block", "2", "--radius", "1/2"],
                       capsys)
    assert code == 0
    assert doc["results"]["total"] == 625
    assert doc["results"]["radius"] == "1/2"


# ---------------------------------------------------------------------------
# inject commands

def test_inject_build_and_verify(tmp_path, c4_csv, capsys):
    map_path = tmp_path / "map.json"
    code, doc, _ = run(["inject", "build", "--input", c4_csv, "--target",
                        "ell0", "--map-out", str(map_path)], capsys)
    assert code == 0
    assert doc["results"]["table"] is None  # written to the file instead
    assert doc["results"]["verification"]["ok"] is True
    assert doc["results"]["verification"]["worst_ratio"] == "3/8"

    code2, doc2, _ = run(["inject", "verify", "--map", str(map_path)], capsys)
    assert code2 == 0
    assert doc2["results"]["ok"] is True

    code3, doc3, _ = run(["inject", "verify", "--map", str(map_path),
                          "--input", c4_csv], capsys)
    assert code3 == 0


def test_inject_build_embeds_table_without_map_out(c4_csv, capsys):
    code, doc, _ = run(["inject", "build", "--input", c4_csv, "--target",
                        "ellp:2"], capsys)
    assert code == 0
    table = doc["results"]["table"]
    assert table is not None
    assert table["target"] == "ellp"
    assert "domain" in table


def test_inject_verify_needs_domain(tmp_path, capsys):
    bare = tmp_path / "bare.json"
    bare.write_text(json.dumps({"schema": 1, "target": "ballchain",
                                "labels": ["a", "b"], "images": ["1/2", "1/3"],
                                "warnings": []}))
    code, doc, err = run(["inject", "verify", "--map", str(bare)], capsys)
    assert code == 1
    assert "no embedded domain" in err


def test_inject_build_bad_target(c4_csv, capsys):
    code, _, err = run(["inject", "build", "--input", c4_csv, "--target",
                        "hilbert"], capsys)
    assert code == 1
    assert "unknown target" in err


# ---------------------------------------------------------------------------
# cayley commands

def test_cayley_verify_exit_codes(capsys):
    code, doc, _ = run(["cayley", "verify", "--n", "2"], capsys)
    assert code == 0
    assert doc["results"]["pairs_checked"] == 32640
    code2, doc2, _ = run(["cayley", "verify", "--n", "2", "--variant",
                          "literal"], capsys)
    assert code2 == 2
    assert doc2["results"]["mismatch_count"] == 4848


def test_cayley_verify_sampled_worker_byte_identical(capsys):
    argv = ["cayley", "verify", "--n", "4", "--mode", "sampled",
            "--budget", "2000", "--seed", "3"]
    code1 = main(argv + ["--workers", "1"])
    first = capsys.readouterr().out
    code2 = main(argv + ["--workers", "2"])
    second = capsys.readouterr().out
    assert code1 == code2 == 0
    assert strip_wall(first) == strip_wall(second)


def test_cayley_roundness_cli(capsys):
    code, doc, _ = run(["cayley", "roundness", "--dim", "2",
                        "--standard-basis", "--g", "1,0", "--h", "0,1"],
                       capsys)
    assert code == 0
    assert doc["results"]["critical_p"] == 1.0
    assert doc["results"]["gap_at_2"] == -4.0


def test_cayley_roundness_needs_generators(capsys):
    code, _, err = run(["cayley", "roundness", "--dim", "2",
                        "--g", "1,0", "--h", "0,1"], capsys)
    assert code == 1
    assert "--jump" in err


def test_cayley_projection_cli(capsys):
    code, doc, _ = run(["cayley", "projection"], capsys)
    assert code == 0
    assert doc["results"]["states_full"] == 15769
    assert doc["results"]["mismatch_count"] == 0


# ---------------------------------------------------------------------------
# plumbing

def test_usage_error_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["validate"])  # missing --input
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc2:
        main(["frobnicate"])
    assert exc2.value.code == 1


def test_missing_file_exits_1(capsys):
    code, _, err = run(["validate", "--input", "/nonexistent/x.csv"], capsys)
    assert code == 1
    assert err.startswith("error:")


def test_out_flag_writes_file(tmp_path, c4_csv, capsys):
    out = tmp_path / "report.json"
    code, doc, _ = run(["validate", "--input", c4_csv, "--out", str(out)],
                       capsys)
    assert code == 0
    assert doc is None  # nothing on stdout
    saved = json.loads(out.read_text())
    assert saved["command"] == "validate"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "roundlab.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip()


def test_console_script():
    proc = subprocess.run(["roundlab", "zspace", "ball", "--block", "2",
                           "--radius", "1/4"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["total"] == 81
