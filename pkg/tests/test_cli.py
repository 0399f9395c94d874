import json

import pytest

from eonrsa import Instance, Request, load_instance, save_instance
from eonrsa.cli import (
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_UNCERTIFIED,
    EXIT_USAGE,
    RunRow,
    main,
    rows_from_csv,
    rows_to_csv,
    rows_to_markdown,
)


@pytest.fixture
def toy_instance_file(tmp_path, triangle):
    inst = Instance(
        topology=triangle,
        spectrum_slots=6,
        requests=(Request(0, "a", "b", 2), Request(1, "b", "c", 2)),
        name="toy",
    )
    path = tmp_path / "toy.json"
    path.write_bytes(save_instance(inst))
    return path


def test_generate_writes_instance(tmp_path):
    code = main(
        [
            "generate",
            "--topology",
            "spain21",
            "--load-tbps",
            "50",
            "--seed",
            "1",
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == EXIT_OK
    out = tmp_path / "spain21_50.json"
    assert out.exists()
    inst = load_instance(out.read_bytes())
    assert inst.total_demand_slots >= 2000  # 50 Tbps at 25 Gbps per slot


def test_solve_writes_all_outputs(tmp_path, toy_instance_file, capsys):
    code = main(
        [
            "solve",
            "--instance",
            str(toy_instance_file),
            "--gap",
            "0",
            "--out-dir",
            str(tmp_path),
            "--format",
            "csv",
        ]
    )
    assert code == EXIT_OK
    for name in ("report.csv", "report.md", "plan.json", "run.json"):
        assert (tmp_path / name).exists(), name
    plan = json.loads((tmp_path / "plan.json").read_text())
    assert plan["throughput_slots"] == 4
    assert {r["request_id"] for r in plan["requests"]} == {0, 1}
    for entry in plan["requests"]:
        assert entry["start_slot"] >= 1 and entry["width"] >= 1 and entry["path_nodes"]
    run = json.loads((tmp_path / "run.json").read_text())
    assert run["certified"] is True
    assert run["epsilon_tab"] == 0.0
    out = capsys.readouterr().out
    assert "toy" in out and "yes" in out


def test_solve_require_certified_passes_on_certified(tmp_path, toy_instance_file):
    code = main(
        [
            "solve",
            "--instance",
            str(toy_instance_file),
            "--gap",
            "0",
            "--require-certified",
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == EXIT_OK


def test_solve_require_certified_exits_2_when_uncertified(
    tmp_path, toy_instance_file, monkeypatch
):
    import eonrsa.cli as cli
    import eonrsa.solver as solver_mod

    real_solve = solver_mod.solve

    def uncertified(*args, **kwargs):
        report, plan = real_solve(*args, **kwargs)
        report.certified = False
        return report, plan

    monkeypatch.setattr(cli, "solve", uncertified)
    code = main(
        [
            "solve",
            "--instance",
            str(toy_instance_file),
            "--require-certified",
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == EXIT_UNCERTIFIED


def test_solve_deterministic_rows_match(tmp_path, capsys):
    args = [
        "solve",
        "--topology",
        "spain21",
        "--load-tbps",
        "0.5",
        "--seed",
        "7",
        "--spectrum",
        "40",
        "--gap",
        "0",
        "--deterministic",
        "--format",
        "csv",
    ]
    assert main(args + ["--out-dir", str(tmp_path / "r1")]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(args + ["--out-dir", str(tmp_path / "r2")]) == EXIT_OK
    second = capsys.readouterr().out
    strip = lambda text: [",".join(line.split(",")[:8]) for line in text.splitlines()]
    assert strip(first) == strip(second)  # identical modulo timing columns


def test_verify_prints_bound_sandwich(toy_instance_file, capsys):
    code = main(["verify", "--instance", str(toy_instance_file)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "z_ilp=" in out and "z_oracle=" in out and "z_lp_star=" in out


def test_verify_rejects_large_instances(tmp_path, capsys):
    code = main(
        [
            "generate",
            "--topology",
            "spain21",
            "--load-tbps",
            "1",
            "--seed",
            "2",
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == EXIT_OK
    code = main(["verify", "--instance", str(tmp_path / "spain21_1.json")])
    assert code == EXIT_FAILURE


def test_guardband_cap_refused_with_clear_error(tmp_path, capsys, two_node):
    reqs = tuple(Request(i, "a", "b", 1) for i in range(13))
    inst = Instance(topology=two_node, spectrum_slots=8, requests=reqs, name="toomany")
    path = tmp_path / "toomany.json"
    path.write_bytes(save_instance(inst))
    code = main(
        ["solve", "--instance", str(path), "--guardband", "--out-dir", str(tmp_path)]
    )
    assert code == EXIT_FAILURE
    assert "cap" in capsys.readouterr().err


def test_cross_process_determinism(tmp_path):
    import subprocess
    import sys

    args = [
        sys.executable,
        "-m",
        "eonrsa.cli",
        "solve",
        "--topology",
        "spain21",
        "--load-tbps",
        "0.3",
        "--seed",
        "9",
        "--spectrum",
        "30",
        "--gap",
        "0",
        "--deterministic",
    ]
    outputs = []
    for run, hash_seed in (("p1", "0"), ("p2", "12345")):
        out_dir = tmp_path / run
        env = {"PYTHONHASHSEED": hash_seed, "PATH": "/usr/bin:/bin"}
        proc = subprocess.run(
            args + ["--out-dir", str(out_dir)],
            capture_output=True,
            text=True,
            env=env,
            timeout=300,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(
            (
                (out_dir / "plan.json").read_text(),
                (out_dir / "report.csv").read_text().rsplit(",", 4)[0],
            )
        )
    assert outputs[0] == outputs[1]


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        main(["solve", "--no-such-flag"])
    assert err.value.code == EXIT_USAGE


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == EXIT_USAGE


def test_csv_round_trip():
    row = RunRow(
        instance="toy",
        spectrum_slots=40,
        num_requests=12,
        offered_load_tbps=0.5,
        z_lp_star_tbps=0.5,
        z_ilp_tbps=0.4,
        epsilon_pct=25.0,
        gos_pct=80.0,
        lp_sec=0.1,
        ilp_sec=0.0,
        total_sec=0.1,
        certified=True,
    )
    text = rows_to_csv([row])
    assert rows_from_csv(text) == [row]


def test_markdown_preserves_input_order():
    rows = [
        RunRow("a", 1, 1, 1.0, 1.0, 1.0, 0.0, 100.0, 0.0, 0.0, 0.0, True),
        RunRow("b", 2, 2, 2.0, 2.0, 2.0, 0.0, 100.0, 0.0, 0.0, 0.0, False),
    ]
    md = rows_to_markdown(rows)
    lines = md.strip().splitlines()
    assert len(lines) == 4  # header, rule, two rows
    assert lines[2].startswith("| a |") and lines[3].startswith("| b |")
