"""The command-line surface: happy paths, audited failures as exit codes,
and byte-stable reruns."""

import json

import pytest

from coarsekit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_ball_command(capsys, tmp_path):
    csv_path = tmp_path / "norms.csv"
    code, body = run_json(
        capsys, "ball", "--group", "zn:1", "--radius", "4",
        "--norm-csv", str(csv_path),
    )
    assert code == 0
    assert body["schema"] == "coarsekit/1"
    assert len(body["points"]) == 9
    lines = csv_path.read_text().strip().split("\n")
    assert lines[0] == "element,norm"
    assert lines[1] == "(0),0"  # one coordinate, no comma, no quoting needed


def test_ball_norm_csv_quotes_plane_points(capsys, tmp_path):
    csv_path = tmp_path / "norms.csv"
    code, _ = run_json(
        capsys, "ball", "--group", "zn:2", "--radius", "1",
        "--norm-csv", str(csv_path),
    )
    assert code == 0
    text = csv_path.read_text()
    assert '"(0,1)",1' in text  # comma inside the label forces quotes


def test_cover_ball_stats(capsys):
    code, body = run_json(
        capsys, "cover", "--method", "ball", "--group", "zn:1",
        "--radius", "8", "--lambda", "2",
    )
    assert code == 0
    assert body["stats"]["multiplicity"] == 5
    assert body["stats"]["lebesgue_pointwise"] >= 2


def test_cover_families(capsys):
    code, body = run_json(
        capsys, "cover", "--method", "families", "--group", "zn:1",
        "--radius", "8", "--lambda", "1",
    )
    assert code == 0
    assert body["stats"]["multiplicity"] <= 2


def test_cover_extension_happy_path(capsys):
    code, body = run_json(
        capsys, "cover", "--method", "extension", "--group", "zn:2",
        "--radius", "20", "--lambda", "2",
    )
    assert code == 0
    assert body["stats"]["multiplicity"] <= body["stats"]["multiplicity_bound"]
    assert body["stats"]["lebesgue_safe"] >= 2


def test_cover_extension_thin_kernel_exits_2(capsys):
    code, body = run_json(
        capsys, "cover", "--method", "extension", "--group", "zn:2",
        "--radius", "20", "--lambda", "2", "--kernel-lambda", "1",
    )
    assert code == 2
    assert body["type"] == "LebesgueTooSmall"
    assert body["needed"] == 42


def test_cover_extension_window_too_small(capsys):
    code, body = run_json(
        capsys, "cover", "--method", "extension", "--group", "zn:2",
        "--radius", "6", "--lambda", "7",
    )
    assert code == 2
    assert body["type"] == "WindowTooSmall"
    code, body = run_json(
        capsys, "cover", "--method", "extension", "--group", "zn:2",
        "--radius", "6", "--lambda", "7", "--allow-boundary",
    )
    assert code == 0
    assert body["warning"]["type"] == "WindowTooSmall"


def test_cover_wreath(capsys):
    code, body = run_json(
        capsys, "cover", "--method", "wreath", "--group", "lamplighter",
        "--radius", "5", "--lambda", "1",
    )
    assert code == 0
    assert body["stats"]["envelope"] == 26
    assert body["stats"]["multiplicity"] <= 26


def test_certify_a_tent_bounds(capsys):
    code, body = run_json(
        capsys, "certify-a", "--group", "zn:1", "--radius", "12",
        "--p", "inf", "--n", "2..4", "--K", "1",
    )
    assert code == 0
    assert body["audit"]["pass"]
    assert body["bounds"]["1"]["2"] == pytest.approx(0.5)
    assert body["bounds"]["1"]["4"] == pytest.approx(0.25)


def test_certify_a_cover_pipeline_with_conversion(capsys):
    code, body = run_json(
        capsys, "certify-a", "--group", "zn:1", "--radius", "20",
        "--p", "2", "--n", "2..3", "--K", "1,2", "--convert-to", "1",
    )
    assert code == 0
    assert body["p"] == 1
    assert body["audit"]["pass"]


def test_embed_command(capsys):
    code, body = run_json(
        capsys, "embed", "--group", "zn:1", "--radius", "30", "--p", "2",
        "--levels", "3,7,15", "--budget", "3",
    )
    assert code == 0
    assert body["audit"]["pass"]
    assert [e["level"] for e in body["selected"]] == [3, 7, 15]
    assert body["buckets"]
    for row in body["buckets"]:
        assert row["min"] >= row["rho_lower"] - 1e-9
        assert row["max"] <= row["rho_upper"] + 1e-9


def test_profile_emits_csv(capsys, tmp_path):
    csv_path = tmp_path / "profile.csv"
    out_path = tmp_path / "profile.json"
    code, out = run(
        capsys, "profile", "--group", "zn:1", "--lambda", "1..2",
        "--diam-policy", "0,4", "--radius", "6",
        "--csv", str(csv_path), "--out", str(out_path),
    )
    assert code == 0
    assert out.startswith("group,lambda,diam_budget,multiplicity,method")
    assert csv_path.read_text() == out
    stored = json.loads(out_path.read_text())
    assert stored["group"] == "zn:1"
    assert stored["rows"]


def test_gromov_command(capsys):
    code, out = run(
        capsys, "gromov", "--group", "zn:1", "--cap", "2",
        "--lambda", "1..3", "--radius", "10",
    )
    assert code == 0
    rows = out.strip().split("\n")[1:]
    assert len(rows) == 3


def test_distortion_command(capsys):
    code, body = run_json(capsys, "distortion", "--group", "heisenberg", "--radius", "8")
    assert code == 0
    assert body["pairs"]
    assert 0.3 < body["slope"] < 0.7
    code, body = run_json(capsys, "distortion", "--group", "zn:1", "--radius", "4")
    assert code == 2
    assert body["type"] == "PreconditionFailed"


def test_reruns_are_byte_identical(capsys):
    argv = [
        "certify-a", "--group", "zn:1", "--radius", "12",
        "--p", "inf", "--n", "2..4", "--K", "1,2",
    ]
    _, first = run(capsys, *argv)
    _, second = run(capsys, *argv)
    assert first == second


def test_schedule_validation(capsys):
    code, body = run_json(
        capsys, "profile", "--group", "zn:1", "--lambda", "2,1",
        "--diam-policy", "0,4", "--radius", "6",
    )
    assert code == 2
    assert body["type"] == "PreconditionFailed"
    code, body = run_json(
        capsys, "certify-a", "--group", "zn:1", "--radius", "8",
        "--p", "0.5", "--n", "2..3", "--K", "1",
    )
    assert code == 2


def test_unknown_flag_is_fatal(capsys):
    with pytest.raises(SystemExit):
        main(["ball", "--group", "zn:1", "--radius", "2", "--frobnicate"])


def test_ball_cap_exit_code(capsys):
    code, body = run_json(
        capsys, "ball", "--group", "free:2", "--radius", "12", "--ball-cap", "1000",
    )
    assert code == 3
    assert body["type"] == "BallTooLarge"
