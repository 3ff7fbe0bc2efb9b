import json

import numpy as np
import pytest

from ripkit import cli, reporting
from ripkit.cli import ExperimentConfig, UsageError, main, parse_config
from ripkit.linalg import write_matrix
from ripkit.reporting import parse_strict_csv, payload_lines

from oracles import max_order_scan


@pytest.fixture
def matrices(tmp_path):
    paths = {}
    write_matrix(np.eye(6), tmp_path / "eye6.txt")
    paths["eye6"] = str(tmp_path / "eye6.txt")
    rng = np.random.default_rng(1)
    write_matrix(rng.normal(size=(6, 4)), tmp_path / "a64.txt")
    paths["a64"] = str(tmp_path / "a64.txt")
    write_matrix(np.random.default_rng(2).normal(size=(4, 8)) / 2.0, tmp_path / "phi48.txt")
    paths["phi48"] = str(tmp_path / "phi48.txt")
    write_matrix(np.eye(8), tmp_path / "b8.txt")
    paths["b8"] = str(tmp_path / "b8.txt")
    return paths


def test_parse_config_direct_mapping(matrices):
    config = parse_config(["ric", "--matrix", matrices["eye6"], "--order", "3", "--seed", "7"])
    assert config.command == "ric"
    assert config.parameters["order"] == 3
    assert config.seed == 7
    assert config.format == "csv"
    assert config.output_path == "-"


def test_parse_config_file_precedence(tmp_path, matrices):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"# experiment\nmatrix={matrices['eye6']}\norder=3\n")
    resolved = parse_config(["ric", "--config", str(cfg), "--order", "4"])
    assert resolved.parameters["order"] == 4
    assert resolved.parameters["matrix"] == matrices["eye6"]


def test_parse_config_missing_required():
    with pytest.raises(UsageError, match="--order"):
        parse_config(["ric", "--ensemble", "gaussian", "--rows", "4", "--cols", "6"])


def test_parse_config_missing_input_source():
    with pytest.raises(UsageError, match="--matrix or --ensemble"):
        parse_config(["ric", "--order", "2"])


def test_parse_config_unknown_key(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("order=2\nbananas=3\n")
    with pytest.raises(UsageError, match="bananas"):
        parse_config(["ric", "--config", str(cfg)])


def test_parse_config_malformed_line(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("order=2\nnot a pair\n")
    with pytest.raises(UsageError, match=":2"):
        parse_config(["ric", "--config", str(cfg)])


def test_parse_config_bad_type():
    with pytest.raises(UsageError, match="expects a int"):
        parse_config(["ric", "--order", "two"])


def test_ric_identity_delta_zero(matrices, tmp_path, capsys):
    out = tmp_path / "out.csv"
    code = main(["ric", "--matrix", matrices["eye6"], "--order", "2", "--output", str(out)])
    assert code == 0
    header, rows = parse_strict_csv(out.read_text())
    assert header[:2] == ["order", "delta"]
    assert rows[0][header.index("delta")] == "0.0"
    assert rows[0][header.index("supports_examined")] == "15"


def test_ric_estimate_mode(matrices, tmp_path):
    out = tmp_path / "est.csv"
    code = main(
        ["ric", "--ensemble", "gaussian", "--rows", "6", "--cols", "10", "--seed", "3",
         "--order", "2", "--trials", "40", "--output", str(out)]
    )
    assert code == 0
    header, rows = parse_strict_csv(out.read_text())
    assert header == ["order", "delta_lower_bound", "trials", "seed"]
    assert rows[0][2] == "40"


def test_dimension_max_order_matches_oracle(tmp_path):
    out = tmp_path / "dim.csv"
    code = main(["dimension", "--N", "1024", "--n", "256", "--c1", "0.5", "--output", str(out)])
    assert code == 0
    header, rows = parse_strict_csv(out.read_text())
    assert int(rows[0][header.index("max_order")]) == max_order_scan(256, 1024, 0.5)


def test_dimension_required_rows_mode(tmp_path):
    out = tmp_path / "dim2.csv"
    code = main(
        ["dimension", "--N", "1024", "--k", "8", "--delta", "0.3", "--t", "2", "--output", str(out)]
    )
    assert code == 0
    header, rows = parse_strict_csv(out.read_text())
    assert "rows" in header and "rows_unweighted_variant" in header


def test_dimension_mode_exclusivity():
    with pytest.raises(UsageError, match="exactly one"):
        parse_config(["dimension", "--N", "64"])
    with pytest.raises(UsageError, match="exactly one"):
        parse_config(["dimension", "--N", "64", "--n", "16", "--k", "4"])
    with pytest.raises(UsageError, match="--delta"):
        parse_config(["dimension", "--N", "64", "--k", "4"])


def test_recover_runs_deterministically(tmp_path):
    args = ["recover", "--rows", "6", "--cols", "12", "--sparsity", "1", "--trials", "3",
            "--seed", "5", "--format", "csv"]
    out1 = tmp_path / "r1.csv"
    out2 = tmp_path / "r2.csv"
    assert main(args + ["--output", str(out1)]) == 0
    assert main(args + ["--output", str(out2)]) == 0
    assert payload_lines(out1.read_text()) == payload_lines(out2.read_text())
    header, rows = parse_strict_csv(out1.read_text())
    assert header == ["trial", "success", "l2_error", "sigma_k", "iterations", "residual"]
    assert len(rows) == 3


def test_exit_code_usage_error(capsys):
    assert main(["ric"]) == 1
    assert "usage error" in capsys.readouterr().err


def test_exit_code_computation_error(matrices, capsys):
    # order larger than the column count is a module-level rejection
    assert main(["ric", "--matrix", matrices["eye6"], "--order", "9"]) == 2
    assert "ric:" in capsys.readouterr().err


def test_exit_code_io_error(tmp_path, capsys):
    missing = str(tmp_path / "nope.txt")
    assert main(["ric", "--matrix", missing, "--order", "2"]) == 3


def test_exit_code_unwritable_output(matrices, tmp_path):
    bad = str(tmp_path / "no" / "such" / "dir" / "out.csv")
    assert main(["ric", "--matrix", matrices["eye6"], "--order", "2", "--output", bad]) == 3


def test_transform_left_analysis_and_verify(matrices, tmp_path):
    out = tmp_path / "tl.csv"
    code = main(["transform-left", "--matrix", matrices["a64"], "--delta", "0.3",
                 "--order", "2", "--output", str(out)])
    assert code == 0
    header, rows = parse_strict_csv(out.read_text())
    assert "rip_valid" in header

    out2 = tmp_path / "tlv.csv"
    code = main(["transform-left", "--matrix", matrices["a64"], "--phi", matrices["phi48"],
                 "--order", "2", "--output", str(out2)])
    assert code == 0
    header2, rows2 = parse_strict_csv(out2.read_text())
    assert rows2[0][header2.index("passed")] == "true"


def test_transform_right_csv(matrices, tmp_path):
    out = tmp_path / "tr.csv"
    code = main(["transform-right", "--matrix", matrices["b8"], "--delta", "0.2",
                 "--order", "2", "--output", str(out)])
    assert code == 0
    header, rows = parse_strict_csv(out.read_text())
    assert rows[0][header.index("lambda_min")] == "1.0"


def test_dict_bound_with_union(tmp_path):
    out = tmp_path / "db.csv"
    code = main(["dict-bound", "--delta-b", "0.1", "--delta-phi", "0.2",
                 "--q", "10", "--k", "3", "--p", "0.9999", "--output", str(out)])
    assert code == 0
    header, rows = parse_strict_csv(out.read_text())
    assert float(rows[0][header.index("union_bound")]) == pytest.approx(0.988, abs=1e-12)
    with pytest.raises(UsageError, match="--q and --k"):
        parse_config(["dict-bound", "--delta-b", "0.1", "--delta-phi", "0.2", "--q", "10"])
    with pytest.raises(UsageError, match="--rows"):
        parse_config(["dict-bound", "--delta-b", "0.1", "--delta-phi", "0.2", "--q", "10", "--k", "2"])


def test_dict_experiment_cli(matrices, tmp_path):
    out = tmp_path / "de.csv"
    code = main(["dict-experiment", "--b-matrix", matrices["b8"], "--ensemble", "gaussian",
                 "--rows", "6", "--cols", "8", "--order", "2", "--trials", "3",
                 "--seed", "4", "--output", str(out)])
    assert code == 0
    header, rows = parse_strict_csv(out.read_text())
    assert len(rows) == 3
    assert rows[0][header.index("delta_b")] == "0.0"


def test_concentration_cli_with_plot_data(tmp_path):
    out = tmp_path / "conc.csv"
    plot = tmp_path / "plot.csv"
    code = main(["concentration", "--ensemble", "rademacher", "--rows", "16", "--cols", "1",
                 "--epsilon", "0.5", "--trials", "20", "--seed", "9",
                 "--output", str(out), "--plot-data", str(plot)])
    assert code == 0
    header, rows = parse_strict_csv(out.read_text())
    assert rows[0][header.index("failures")] == "0"
    plot_lines = plot.read_text().splitlines()
    assert plot_lines[0] == "series,x,y"
    assert len(plot_lines) == 3


def test_json_lines_format(matrices, tmp_path):
    out = tmp_path / "out.jsonl"
    code = main(["ric", "--matrix", matrices["eye6"], "--order", "2",
                 "--format", "json-lines", "--output", str(out)])
    assert code == 0
    lines = payload_lines(out.read_text())
    record = json.loads(lines[0])
    assert record["delta"] == 0.0
    assert record["witness_min"] == "0+1"


def test_text_format(matrices, tmp_path):
    out = tmp_path / "out.txt"
    code = main(["ric", "--matrix", matrices["eye6"], "--order", "2",
                 "--format", "text", "--output", str(out)])
    assert code == 0
    lines = payload_lines(out.read_text())
    assert "delta=0.0" in lines


def test_emit_plot_data(tmp_path):
    path = tmp_path / "series.csv"
    reporting.emit_plot_data({"a": [(2.0, 1.0), (1.0, 3.0)], "b": [(0.0, 0.5)]}, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "series,x,y"
    assert len(lines) == 4
    assert lines[1].startswith("a,1.0")  # sorted by (series, x)
    with pytest.raises(ValueError):
        reporting.emit_plot_data({}, str(path))


def test_strict_csv_round_trip_all_commands(matrices, tmp_path):
    commands = [
        ["ric", "--matrix", matrices["eye6"], "--order", "2"],
        ["concentration", "--ensemble", "gaussian", "--rows", "8", "--cols", "4",
         "--epsilon", "0.5", "--trials", "10", "--seed", "1"],
        ["transform-left", "--matrix", matrices["a64"], "--delta", "0.3", "--order", "2"],
        ["transform-right", "--matrix", matrices["b8"], "--delta", "0.2", "--order", "2"],
        ["dict-bound", "--delta-b", "0.1", "--delta-phi", "0.2"],
        ["dict-experiment", "--b-matrix", matrices["b8"], "--ensemble", "gaussian",
         "--rows", "6", "--cols", "8", "--order", "2", "--trials", "2", "--seed", "3"],
        ["recover", "--rows", "4", "--cols", "8", "--sparsity", "1", "--trials", "2", "--seed", "5"],
        ["dimension", "--N", "256", "--n", "64", "--c1", "0.5"],
    ]
    for i, args in enumerate(commands):
        out = tmp_path / f"cmd{i}.csv"
        assert main(args + ["--output", str(out)]) == 0
        header, rows = parse_strict_csv(out.read_text())
        assert header and rows


def test_experiment_config_fields(matrices):
    config = parse_config(["ric", "--matrix", matrices["eye6"], "--order", "2"])
    assert isinstance(config, ExperimentConfig)
    assert config.parameters["budget"] == 10_000_000
    assert config.parameters["workers"] == 1
