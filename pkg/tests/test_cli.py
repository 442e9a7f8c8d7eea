import asyncio
import json
from pathlib import Path

import pytest

from licnet.commands.documents import load_document
from licnet.commands.params import CommandOptions
from licnet.core.errors import CommandNotApplicableError
from licnet.main import build_parser, main, read_batch, run_batch, run_command, run_file
from licnet.models.results import CommandResult, flatten, rounded
from tests.helpers import use_settings


def test_params_json(samples_dir, capsys):
    assert main(["params", str(samples_dir / "example1.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["command"] == "params"
    assert out["kind"] == "p2p"
    assert out["alpha"] == 0.1
    assert out["values"]["sigma_sq"] == pytest.approx(0.32, abs=1e-12)


def test_params_csv_with_alpha(samples_dir, capsys):
    assert main(["params", str(samples_dir / "example1.json"), "--format", "csv", "--alpha", "0.25"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "quantity,value"
    assert "sigma_sq,0.125" in lines


def test_certificates(samples_dir, capsys):
    assert main(["params", str(samples_dir / "example1.json"), "--certificates"]) == 0
    values = json.loads(capsys.readouterr().out)["values"]
    assert len(values["certificates"]["vector"]) == 4


def test_missing_document_exits_2(tmp_path, capsys):
    assert main(["params", str(tmp_path / "absent.json")]) == 2
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "document_syntax"


def test_command_not_applicable_exits_2(samples_dir, capsys):
    assert main(["modes", str(samples_dir / "example1.json")]) == 2
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "command_not_applicable"


def test_solver_failure_exits_1(samples_dir, capsys):
    with use_settings(simplex_max_pivots=0):
        assert main(["sumcap", str(samples_dir / "example1.json")]) == 1
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "numerical_failure"


def test_document_or_batch_required():
    with pytest.raises(SystemExit) as info:
        main(["params"])
    assert info.value.code == 2


def test_batch_keeps_order_and_reports_failures(samples_dir, tmp_path, capsys):
    listing = tmp_path / "batch.txt"
    listing.write_text(
        "\n".join([
            "# documents to run",
            str(samples_dir / "example1.json"),
            "",
            str(tmp_path / "absent.json"),
            str(samples_dir / "example7_grid.json"),
        ]),
        encoding="utf-8",
    )
    assert main(["params", "--batch", str(listing)]) == 2
    captured = capsys.readouterr()
    results = json.loads(captured.out)
    assert [result["kind"] for result in results] == ["p2p", "layered"]
    assert "absent.json" in captured.err


def test_batch_csv_prefixes_rows(samples_dir, tmp_path, capsys):
    listing = tmp_path / "batch.txt"
    listing.write_text("example1.json\nexample2.json\n", encoding="utf-8")
    # relative entries resolve against the list's directory
    (tmp_path / "example1.json").write_text((samples_dir / "example1.json").read_text(encoding="utf-8"), encoding="utf-8")
    (tmp_path / "example2.json").write_text((samples_dir / "example2.json").read_text(encoding="utf-8"), encoding="utf-8")
    assert main(["sumcap", "--batch", str(listing), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "quantity,value"
    assert "0.sum_capacity,0.32" in lines
    assert any(line.startswith("1.sum_capacity,") for line in lines)


def test_read_batch_resolves_relative_paths(tmp_path):
    listing = tmp_path / "list.txt"
    listing.write_text("a.json\n# skipped\n\n/abs/b.json\n", encoding="utf-8")
    assert read_batch(listing) == [tmp_path / "a.json", Path("/abs/b.json")]


def test_run_batch_returns_errors_in_place(samples_dir, tmp_path):
    paths = [samples_dir / "example1.json", tmp_path / "absent.json"]
    outcomes = asyncio.run(run_batch("params", paths, CommandOptions()))
    assert isinstance(outcomes[0], CommandResult)
    assert outcomes[1].context["document"] == str(tmp_path / "absent.json")


def test_run_command_rejects_unknown_command(samples_dir):
    with pytest.raises(CommandNotApplicableError):
        run_command("plot", load_document(samples_dir / "example1.json"))


def test_run_file_layered_sum_capacity(samples_dir):
    result = run_file("sumcap", samples_dir / "example7_grid.json")
    assert result.values["mode"] == "M(s12,s21)"
    assert result.values["sum_capacity"] == pytest.approx(0.4)


def test_rounding_and_flattening():
    assert rounded({"a": [0.1234567890123456, 2]}, 4) == {"a": [0.1235, 2]}
    assert rounded(float("inf")) == "inf"
    assert flatten({"b": {"x": 1}, "a": [3, 4]}) == [("a.0", 3), ("a.1", 4), ("b.x", 1)]


def test_config_actions(capsys):
    assert main(["config", "template"]) == 0
    assert "LICNET_MINMAX_SEED=0" in capsys.readouterr().out
    assert main(["config", "validate"]) == 0
    assert json.loads(capsys.readouterr().out)["valid"]
    assert main(["config", "export"]) == 0
    assert json.loads(capsys.readouterr().out)["metadata"]["total_settings"] == 13


def test_config_validate_fails_on_bad_settings(capsys):
    with use_settings(output_digits=40):
        assert main(["config", "validate"]) == 1


def test_parser_lists_every_command():
    parser = build_parser()
    args = parser.parse_args(["repair", "doc.json", "--format", "csv"])
    assert (args.command, args.document, args.format) == ("repair", "doc.json", "csv")


@pytest.mark.parametrize("name", ["example6.json", "repair.json"])
def test_single_hop_feedback_agrees_with_sumcap(samples_dir, name):
    plain = run_file("sumcap", samples_dir / name).values["sum_capacity"]
    fed = run_file("feedback", samples_dir / name).values
    assert fed["sum_capacity"] == pytest.approx(plain, abs=1e-12)
    # one hop: feedback cannot beat the best link
    assert fed["feedback_sum_capacity"] == pytest.approx(plain, abs=1e-12)
    assert fed["improvement"] == pytest.approx(0.0, abs=1e-12)


def test_identical_layers_feedback_uses_modes(samples_dir):
    values = run_file("feedback", samples_dir / "example7_grid.json").values
    assert values["mode"] == "M(s12,s21)"
    assert values["feedback_sum_capacity"] > values["sum_capacity"]
