import json
import math

import pytest

from mubest.cli import (
    DEFAULT_Z_GRID,
    EXIT_IO,
    EXIT_OK,
    EXIT_TARGET,
    EXIT_VALIDATION,
    main,
    parse_angle,
    parse_angle_list,
)
from mubest.designs import optimize_design, save_design


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("MUBEST_OUTDIR", str(tmp_path))
    return tmp_path


@pytest.fixture(scope="module")
def small_design_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("designs") / "small.json"
    save_design(optimize_design(40, 4, 4, seed=1, max_iters=400), path)
    return str(path)


def test_parse_angle_tokens():
    assert parse_angle("pi") == pytest.approx(math.pi)
    assert parse_angle("pi/2") == pytest.approx(math.pi / 2)
    assert parse_angle("3pi/8") == pytest.approx(3 * math.pi / 8)
    assert parse_angle("-pi") == pytest.approx(-math.pi)
    assert parse_angle("0.5") == 0.5
    assert parse_angle("π/4") == pytest.approx(math.pi / 4)
    assert parse_angle(" 2pi ") == pytest.approx(2 * math.pi)


def test_parse_angle_list_forms():
    grid = parse_angle_list("0:pi:5")
    assert len(grid) == 5
    assert grid[0] == 0.0 and grid[-1] == pytest.approx(math.pi)
    pair = parse_angle_list("pi/2,0")
    assert pair == pytest.approx([math.pi / 2, 0.0])
    default = parse_angle_list(DEFAULT_Z_GRID)
    assert len(default) == 9
    assert default[1] == pytest.approx(math.pi / 8)


def test_groups_command(outdir, capsys):
    code = main(["groups", "--which", "pauli", "--out", "pauli.json"])
    assert code == EXIT_OK
    assert "order=16" in capsys.readouterr().out
    assert (outdir / "pauli.json").exists()
    assert (outdir / "pauli.json.manifest.json").exists()


def test_design_optimize_command(outdir, capsys):
    code = main(
        ["design", "optimize", "--K", "40", "--seed", "1", "--iters", "300",
         "--out", "d.json"]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "K=40" in out and "phi4=" in out
    assert (outdir / "d.json").exists()
    manifest = json.loads((outdir / "d.json.manifest.json").read_text())
    assert manifest["seed"] == 1
    assert manifest["manifest_hash"]


def test_design_optimize_target_miss(outdir, capsys):
    code = main(
        ["design", "optimize", "--K", "40", "--seed", "1", "--iters", "3",
         "--target", "1e-9"]
    )
    assert code == EXIT_TARGET
    assert "target" in capsys.readouterr().err


def test_design_infeasible(outdir, capsys):
    code = main(["design", "optimize", "--K", "10"])
    assert code == EXIT_TARGET
    assert "error" in capsys.readouterr().err


def test_fidelity_command_csv(outdir, capsys):
    code = main(
        ["fidelity", "--x", "pi/2", "--y-list", "pi/2", "--z-list", "pi/2",
         "--out", "scan.csv"]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "F=0.520573" in out
    lines = (outdir / "scan.csv").read_text().splitlines()
    assert lines[0].startswith("# manifest=")
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header == "x,y,z,F"
    row = lines[-1].split(",")
    assert float(row[3]) == pytest.approx((46 + 5 * math.sqrt(3)) / 105, abs=1e-9)


def test_fidelity_two_copy(outdir, capsys):
    code = main(
        ["fidelity", "--copies", "2", "--pair", "BC", "--y-list", "pi/2",
         "--z-list", "pi/2"]
    )
    assert code == EXIT_OK
    assert "F=0.46666" in capsys.readouterr().out


def test_fidelity_threads_same_output(outdir, capsys):
    args = ["fidelity", "--y-list", "pi/2,0", "--z-list", "0,pi/2"]
    main(args)
    serial = capsys.readouterr().out
    main(args + ["--threads", "4"])
    threaded = capsys.readouterr().out
    assert serial == threaded


def test_fidelity_missing_design_file(outdir, capsys):
    code = main(
        ["fidelity", "--mode", "empirical", "--design", "no_such_file.json",
         "--y-list", "pi/2", "--z-list", "pi/2"]
    )
    assert code == EXIT_IO
    assert "error" in capsys.readouterr().err


def test_simulate_command(outdir, capsys, small_design_file):
    code = main(
        ["simulate", "--design", small_design_file, "--seed", "3", "--M", "200",
         "--blocks", "2", "--out", "run.json"]
    )
    assert code == EXIT_OK
    assert "F = " in capsys.readouterr().out
    report = json.loads((outdir / "run.json").read_text())
    assert report["seed"] == 3
    assert len(report["per_block_fidelities"]) == 2
    assert (outdir / "run.json.blocks.csv").exists()
    assert (outdir / "run.json.manifest.json").exists()


def test_simulate_reproducible(outdir, capsys, small_design_file):
    args = ["simulate", "--design", small_design_file, "--seed", "3",
            "--M", "200", "--blocks", "2"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first


def test_simulate_invalid_blocks(outdir, capsys):
    code = main(["simulate", "--blocks", "0", "--M", "10"])
    assert code == EXIT_VALIDATION


def test_equivalence_phase_exact(outdir, capsys, small_design_file):
    code = main(
        ["equivalence", "--design", small_design_file, "--mode", "ideal",
         "--exact", "--phi-grid", "0:pi:3", "--out", "eq.csv"]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    values = [float(ln.split("exact=")[1]) for ln in out.splitlines()]
    assert max(values) - min(values) <= 1e-10
    assert (outdir / "eq.csv").exists()


def test_subsets_command(outdir, capsys, small_design_file):
    code = main(
        ["subsets", "--design", small_design_file, "--sizes", "10,20,40",
         "--M", "200", "--blocks", "2", "--trials", "20", "--out", "sub.csv"]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "K=10" in out and "K=40" in out
    rows = [ln for ln in (outdir / "sub.csv").read_text().splitlines()
            if not ln.startswith("#")][1:]
    stds = [float(r.split(",")[2]) for r in rows]
    assert stds[0] > stds[-1]


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_manifest_digest_stable(outdir):
    from mubest.cli import ManifestWriter

    a = ManifestWriter("fidelity", {"x": 1.0}, seed=2)
    b = ManifestWriter("fidelity", {"x": 1.0}, seed=2)
    c = ManifestWriter("fidelity", {"x": 1.5}, seed=2)
    assert a.digest == b.digest
    assert a.digest != c.digest
