import filecmp
from pathlib import Path

import numpy as np
import pytest

from palstomo import io
from palstomo.cli import (EXIT_CONFIG, EXIT_MAX_ITERS, EXIT_OK,
                          EXIT_STAGNATION, main)

TINY_CT = """
[model]
kind = "ct"
grid_n = 16
n_detectors = 8
angle_step_deg = 20.0

[phantom]
contrast_in = 2.5
contrast_out = 1.0

[[phantom.primitives]]
kind = "disc"
center = [0.1, -0.1]
radius = 0.45

[pals]
m0 = 6
beta0 = 2.0
center_box = [-0.6, 0.6, -0.6, 0.6]

[solver]
max_iters = {max_iters}
unknown_contrasts = true
contrast_init = [1.5, 0.5]

[noise]
percent = 5.0
seed = 11

[output]
directory = "{out}"
"""


def write_cfg(tmp_path, name="exp.toml", max_iters=60, out=None, extra=""):
    out = out or str(tmp_path / "out")
    p = tmp_path / name
    p.write_text(TINY_CT.format(max_iters=max_iters, out=out) + extra)
    return p


def test_phantom_writes_files(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["phantom", str(cfg)]) == EXIT_OK
    out = tmp_path / "out"
    assert (out / "truth.csv").exists()
    assert (out / "truth.pgm").exists()
    grid, vals = io.read_field_csv(out / "truth.csv")
    assert vals.shape == (16, 16)
    assert set(np.unique(vals)) == {1.0, 2.5}


def test_forward_writes_data_and_noise(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["forward", str(cfg)]) == EXIT_OK
    out = tmp_path / "out"
    clean = io.read_data_csv(out / "data_clean.csv")
    noisy = io.read_data_csv(out / "data_noisy.csv")
    meta = io.read_metrics(out / "noise.txt")
    assert clean.shape == noisy.shape
    assert float(meta["noise_norm"]) == pytest.approx(
        np.linalg.norm(noisy - clean))


def test_reconstruct_success_exit_code(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["reconstruct", str(cfg)]) == EXIT_OK
    out = tmp_path / "out"
    for f in ("truth.csv", "property.csv", "property.pgm", "phi.csv",
              "convergence.csv", "params_final.csv", "metrics.txt"):
        assert (out / f).exists(), f
    met = io.read_metrics(out / "metrics.txt")
    assert met["stop_reason"] == "discrepancy"
    # one parameter snapshot per logged iteration, 0 through the stop
    snaps = sorted((out / "params").glob("iter_*.csv"))
    assert len(snaps) == int(met["iterations"]) + 1


def test_reconstruct_zero_iters_hits_cap(tmp_path):
    cfg = write_cfg(tmp_path, max_iters=0)
    assert main(["reconstruct", str(cfg)]) == EXIT_MAX_ITERS


def test_reconstruct_stagnation_exit(tmp_path):
    # zero noise (unreachable discrepancy) and too few bumps for the shape:
    # the solver bottoms out
    cfg = tmp_path / "stag.toml"
    text = TINY_CT.format(max_iters=400, out=str(tmp_path / "o"))
    text = text.replace("percent = 5.0", "percent = 0.0")
    head, _, tail = text.partition("[pals]")
    head = head[:head.index("[phantom]")] + ('[phantom]\nkind = "ct_lobes"\n'
                                             "contrast_in = 2.5\n"
                                             "contrast_out = 1.0\n\n")
    cfg.write_text(head + "[pals]" + tail)
    assert main(["reconstruct", str(cfg)]) == EXIT_STAGNATION


def test_rerun_is_bit_identical(tmp_path):
    cfg = write_cfg(tmp_path, out=str(tmp_path / "o1"))
    cfg2 = write_cfg(tmp_path, name="exp2.toml", out=str(tmp_path / "o2"))
    assert main(["reconstruct", str(cfg)]) == EXIT_OK
    assert main(["reconstruct", str(cfg2)]) == EXIT_OK
    for f in ("property.csv", "convergence.csv", "params_final.csv"):
        assert filecmp.cmp(tmp_path / "o1" / f, tmp_path / "o2" / f,
                           shallow=False), f


def test_missing_config_file(tmp_path, capsys):
    assert main(["phantom", str(tmp_path / "nope.toml")]) == EXIT_CONFIG
    assert "not found" in capsys.readouterr().err


def test_missing_section_named(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text("[model]\nkind = 'ct'\n")
    assert main(["phantom", str(p)]) == EXIT_CONFIG
    assert "[phantom]" in capsys.readouterr().err


def test_h2_constraint_violation_cited(tmp_path, capsys):
    p = write_cfg(tmp_path, extra="")
    text = p.read_text().replace("[solver]", "[pals.ignore]\n[solver]")
    # rewrite with an H2-violating level
    text = text.replace("beta0 = 2.0", "beta0 = 2.0\nlevel = 0.05\nepsilon = 0.1")
    text = text.replace("[pals.ignore]\n", "")
    p.write_text(text)
    assert main(["phantom", str(p)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "epsilon" in err and "H2" in err


def test_seed_and_out_overrides(tmp_path):
    cfg = write_cfg(tmp_path)
    alt = tmp_path / "alt"
    assert main(["forward", str(cfg), "--seed", "99", "--out", str(alt)]) == EXIT_OK
    base = tmp_path / "out"
    assert not (base / "data_noisy.csv").exists()
    assert (alt / "data_noisy.csv").exists()
    # different seed, different noise
    assert main(["forward", str(cfg)]) == EXIT_OK
    a = io.read_data_csv(alt / "data_noisy.csv")
    b = io.read_data_csv(base / "data_noisy.csv")
    assert not np.array_equal(a, b)


def test_check_subcommand(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert main(["check", str(cfg)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "adjoint_identity_rel_err" in out
    meta = io.read_metrics(tmp_path / "out" / "check.txt")
    assert meta["adjoint_ok"] == "True"
    assert meta["directional_ok"] == "True"
