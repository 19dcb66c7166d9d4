import subprocess
import sys

import pytest

from strichartz_lab import __version__
from strichartz_lab.cli import main, parse_config, UsageError
from strichartz_lab.experiments import config_hash

P = "n=3 1/r=1/4 1/rt=1/12 1/q=1/4 1/qt=3/4"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_valid(capsys):
    code, out, _ = run(capsys, "classify", P)
    assert code == 0
    assert out.startswith("Valid: Theorem 1 corner P")


def test_classify_invalid_names_condition(capsys):
    code, out, _ = run(capsys, "classify", "n=3 1/r=1/2 1/rt=0 1/q=1/2 1/qt=0")
    assert code == 1
    assert "fourth necessary condition" in out and "slack -1/2" in out


def test_classify_unknown(capsys):
    # all necessary conditions hold but no sufficient result is encoded
    code, out, _ = run(capsys, "classify", "n=3 1/r=1/2 1/rt=0 1/q=1/4 1/qt=1/2")
    assert code == 2 and out.startswith("Unknown")


def test_classify_parse_error(capsys):
    code, _, err = run(capsys, "classify", "n=3 1/r=banana")
    assert code == 64
    assert "position 8" in err


def test_classify_exponent_form_and_n_flag(capsys):
    code, out, _ = run(capsys, "classify", "r=4 rt=12 q=4 qt=4/3", "--n", "3")
    assert code == 0


def test_quiet(capsys):
    code, out, _ = run(capsys, "--quiet", "classify", P)
    assert code == 0 and out == ""


@pytest.mark.parametrize("n, row", [(3, "P,1/4,1/12"), (4, "P,1/3,1/6")])
def test_region(tmp_path, capsys, n, row):
    code, _, _ = run(capsys, "--out", str(tmp_path), "region", "--n", str(n))
    assert code == 0
    lines = (tmp_path / f"region_n{n}.csv").read_text().splitlines()
    assert lines[0] == "label,inv_r,inv_rt" and row in lines
    svg = (tmp_path / f"region_n{n}.svg").read_text()
    assert svg.startswith("<?xml") and "</svg>" in svg and "1/r" in svg
    assert "href" not in svg  # self-contained


def test_region_rejects_n2(tmp_path, capsys):
    code, _, err = run(capsys, "--out", str(tmp_path), "region", "--n", "2")
    assert code == 64 and "n >= 3" in err


def test_region_unwritable(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "--out", str(blocker / "sub"), "region", "--n", "3")
    assert code == 74 and "cannot write" in err


def test_env_out_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("STRICHARTZ_LAB_OUT", str(tmp_path))
    assert run(capsys, "region", "--n", "5")[0] == 0
    assert (tmp_path / "region_n5.svg").exists()


def test_bad_usage(capsys):
    assert run(capsys, "frobnicate")[0] == 64
    assert run(capsys)[0] == 64


def test_version_via_module():
    out = subprocess.run([sys.executable, "-m", "strichartz_lab", "--version"],
                         capture_output=True, text=True, check=True).stdout
    assert __version__ in out


# -- config -------------------------------------------------------------------


def test_config_lists_unknown_and_missing_together():
    with pytest.raises(UsageError) as info:
        parse_config("n=3\n1/r=1/2\n1/rr=0\nbogus=1\n", "counterexample")
    msg = str(info.value)
    assert "unknown keys: 1/rr, bogus" in msg
    assert "missing required keys: 1/rt, 1/q, 1/qt" in msg


def test_config_comments_and_defaults():
    cfg, raw = parse_config("# header\nseeds = 3  # few\n", "atoms-audit")
    assert cfg["seeds"] == 3 and cfg["n"] == 2 and raw == {"seeds": "3"}


def write_cfg(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_sweep_unknown_experiment(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "c.cfg", "n=3\n")
    assert run(capsys, "sweep", "nonsense", cfg)[0] == 64


def test_sweep_bad_config(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "c.cfg", "seeds=3\ncolour=blue\n")
    code, _, err = run(capsys, "--out", str(tmp_path), "sweep", "atoms-audit", cfg)
    assert code == 64 and "colour" in err


def test_sweep_missing_config_file(tmp_path, capsys):
    assert run(capsys, "sweep", "atoms-audit", str(tmp_path / "nope.cfg"))[0] == 64


def test_sweep_inadmissible_strichartz(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "s.cfg", "n=2\n1/q=1/2\n1/r=1/2\ntrials=1\n")
    code, _, err = run(capsys, "--out", str(tmp_path), "sweep", "strichartz", cfg)
    assert code == 64 and "n/r + 2/q" in err


def test_sweep_bilinear_flag_false(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "b.cfg", "n=3\n1/r=1/4\n1/rt=1/12\n1/q=1/2\n1/qt=3/4\n")
    code, _, err = run(capsys, "--out", str(tmp_path), "sweep", "bilinear", cfg)
    assert code == 64 and "1/qt'" in err


def test_atoms_audit_csv(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "a.cfg", "seeds=200\n")
    code, _, _ = run(capsys, "--out", str(tmp_path), "--seed", "4", "sweep", "atoms-audit", cfg)
    assert code == 0
    text = (tmp_path / "atoms-audit.csv").read_text()
    lines = text.splitlines()
    assert lines[0].startswith(f"# strichartz_lab {__version__} experiment=atoms-audit config_hash=")
    for key in ("max_C_a", "max_C_s", "max_C_c", "max_reconstruction"):
        assert any(line.startswith(f"# {key}=") for line in lines)
    data = [line for line in lines if not line.startswith("#")]
    assert data[0] == "field,p,C_a,C_s,C_c,reconstruction"
    assert len(data) == 1 + 200 * 4


def test_config_hash_in_header(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "d.cfg", "n=1\nsamples=5\n")
    assert run(capsys, "--out", str(tmp_path), "sweep", "dispersive", cfg)[0] == 0
    lines = (tmp_path / "dispersive.csv").read_text().splitlines()
    config = dict(line[2:].split("=", 1) for line in lines[1:] if line.startswith("# ")
                  and "=" in line and not line.startswith("# growth"))
    assert lines[0].endswith(f"config_hash={config_hash(config)}")


def test_threshold_breach_exit_3(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "a.cfg", "seeds=2\nmax_C_a=0.5\n")
    code, _, err = run(capsys, "--out", str(tmp_path), "sweep", "atoms-audit", cfg)
    assert code == 3 and "C_a" in err
    assert (tmp_path / "atoms-audit.csv").exists()


def test_counterexample_csv(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "c.cfg", "n=3\n1/r=1/2\n1/rt=0\n1/q=1/2\n1/qt=0\n"
                    "time_points=2\nshell_points=8\nplot=true\n")
    code, _, _ = run(capsys, "--out", str(tmp_path), "sweep", "counterexample", cfg)
    assert code == 0
    lines = (tmp_path / "counterexample.csv").read_text().splitlines()
    data = [line for line in lines if not line.startswith("#")]
    assert data[0] == "eps,lhs,rhs,rel_error,ratio"
    assert [float(row.split(",")[0]) for row in data[1:]] == [0.25, 0.125, 0.0625, 0.03125]
    fits = [line for line in lines if line.startswith("# fit ")]
    assert [f.split(":")[0] for f in fits] == ["# fit lhs", "# fit rhs", "# fit ratio"]
    assert "# predicted_ratio=-1/2" in lines
    assert (tmp_path / "counterexample.svg").read_text().startswith("<?xml")


def test_atomic_write_leaves_no_temp_files(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "a.cfg", "seeds=1\n")
    run(capsys, "--out", str(tmp_path / "o"), "sweep", "atoms-audit", cfg)
    assert sorted(p.name for p in (tmp_path / "o").iterdir()) == ["atoms-audit.csv"]
