import numpy as np
import pytest

from onmf.cli import main
from onmf.imaging import save_image, save_labels, grid_anchors, load_image
from onmf.persistence import load_state
from onmf.synthetic import candle_noise_stack, correlated_ensemble, textured_image
from onmf.timeseries import read_metadata, write_series_csv


@pytest.fixture
def ts_csv(tmp_path):
    ens = correlated_ensemble(m=4, length=120, seed=1)
    values = ens.values.copy()
    values[2, 60:64] = np.nan
    path = tmp_path / "weather.csv"
    write_series_csv(path, values, names=["LA", "SD", "SF", "NYC"])
    return path


@pytest.fixture
def image_png(tmp_path):
    path = tmp_path / "tex.png"
    save_image(path, textured_image(60))
    return path


@pytest.fixture
def frame_dir(tmp_path):
    d = tmp_path / "frames"
    d.mkdir()
    stack = candle_noise_stack(32, 14, 16, 16, seed=0)
    for t in range(stack.shape[2]):
        save_image(d / f"f{t:03d}.png", stack[:, :, t])
    return d


def run(args):
    return main([str(a) for a in args])


# ---------------------------------------------------------------- commands


def test_ts_learn_outputs(ts_csv, tmp_path):
    out = tmp_path / "run"
    rc = run(["ts-learn", ts_csv, "--k", 6, "--N", 50, "--r", 8,
              "--lambda", 0.1, "--seed", 3, "--out", out])
    assert rc == 0
    state = load_state(str(out) + ".dict")
    assert state.W.shape == (24, 8)  # d = m*k
    meta = read_metadata(str(out) + ".meta")
    assert meta["k"] == "6" and meta["series"] == "LA,SD,SF,NYC"
    recon = (str(out) + "_recon.csv")
    header = open(recon).readline().strip()
    assert header == "time,LA,SD,SF,NYC"


def test_ts_inpaint_fills_missing(ts_csv, tmp_path):
    out = tmp_path / "fill"
    rc = run(["ts-inpaint", ts_csv, "--k", 6, "--N", 50, "--r", 8,
              "--lambda", 0.1, "--seed", 3, "--out", out])
    assert rc == 0
    meta = read_metadata(str(out) + ".meta")
    assert int(meta["filled_entries"]) == 4
    filled = open(str(out) + "_filled.csv").read()
    assert filled.count("\n") == 121  # header + 120 rows


def test_img_train_compress(image_png, tmp_path):
    dict_path = tmp_path / "tex.dict"
    rc = run(["img-train", image_png, "--p", 8, "--r", 12, "--batches", 4,
              "--batch-size", 120, "--seed", 1, "--out", dict_path])
    assert rc == 0
    assert load_state(dict_path).W.shape == (192, 12)

    out_png = tmp_path / "compressed.png"
    rc = run(["img-compress", image_png, "--dict", dict_path, "--p", 8,
              "--overlap", 4, "--out", out_png])
    assert rc == 0
    assert load_image(out_png).shape == (60, 60, 3)


def test_img_restore(image_png, tmp_path):
    dict_path = tmp_path / "tex.dict"
    run(["img-train", image_png, "--p", 10, "--r", 5, "--batches", 3,
         "--batch-size", 100, "--seed", 2, "--out", dict_path])
    gray_png = tmp_path / "gray.png"
    save_image(gray_png, load_image(image_png, gray=True))
    labels_csv = tmp_path / "labels.csv"
    anchors = grid_anchors(60, 60, 10, 5)
    save_labels(labels_csv, {a: 0 for a in anchors})
    out_png = tmp_path / "restored.png"
    rc = run(["img-restore", gray_png, "--labels", labels_csv,
              "--dict", f"0={dict_path}", "--p", 10, "--overlap", 5,
              "--out", out_png])
    assert rc == 0
    assert load_image(out_png).shape == (60, 60, 3)


def test_video_dict_snapshots(frame_dir, tmp_path):
    out_dir = tmp_path / "atoms"
    rc = run(["video-dict", frame_dir, "--r", 3, "--mode", "online",
              "--snapshots", "1,5,16", "--seed", 0, "--out-dir", out_dir])
    assert rc == 0
    assert (out_dir / "grid.png").exists()
    for snap in (1, 5, 16):
        sub = out_dir / f"snapshot_{snap:04d}"
        assert (sub / "grid.png").exists()
        assert len(list(sub.glob("atom_*.png"))) == 3


def test_video_changepoint_report(frame_dir, tmp_path):
    out_csv = tmp_path / "report.csv"
    rc = run(["video-changepoint", frame_dir, "--r", 3, "--iters", 200,
              "--seed", 0, "--out", out_csv])
    assert rc == 0
    lines = out_csv.read_text().strip().splitlines()
    assert lines[0] == "boundary,score"
    assert len(lines) == 32  # header + T-1 boundaries
    meta = read_metadata(str(out_csv) + ".meta")
    assert abs(int(meta["changepoint"]) - 15) <= 1


def test_render_dict_layouts(ts_csv, tmp_path):
    out = tmp_path / "run"
    run(["ts-learn", ts_csv, "--k", 6, "--N", 50, "--r", 8, "--seed", 0,
         "--out", out])
    png = tmp_path / "atoms.png"
    rc = run(["render-dict", "--dict", str(out) + ".dict", "--layout", "temporal",
              "--series", 4, "--window", 6, "--out", png])
    assert rc == 0
    assert png.exists()


# -------------------------------------------------------------- exit codes


def test_empty_csv_exits_2(tmp_path, capsys):
    bad = tmp_path / "empty.csv"
    bad.write_text("")
    rc = run(["ts-learn", bad, "--k", 2, "--N", 5, "--r", 2])
    assert rc == 2
    assert "line 1" in capsys.readouterr().err


def test_short_series_exits_3(tmp_path):
    path = tmp_path / "short.csv"
    write_series_csv(path, np.ones((2, 10)))
    rc = run(["ts-learn", path, "--k", 2, "--N", 50, "--r", 2])
    assert rc == 3


def test_dictionary_patch_mismatch_exits_4(image_png, tmp_path):
    dict_path = tmp_path / "d.dict"
    run(["img-train", image_png, "--p", 8, "--r", 4, "--batches", 2,
         "--batch-size", 50, "--seed", 0, "--out", dict_path])
    rc = run(["img-compress", image_png, "--dict", dict_path, "--p", 10,
              "--overlap", 5, "--out", tmp_path / "x.png"])
    assert rc == 4


def test_single_frame_dir_exits_3(tmp_path):
    d = tmp_path / "one"
    d.mkdir()
    save_image(d / "f0.png", np.zeros((8, 8)))
    rc = run(["video-changepoint", d, "--r", 1, "--out", tmp_path / "r.csv"])
    assert rc == 3


def test_inconsistent_frames_exit_4(tmp_path):
    d = tmp_path / "mixed"
    d.mkdir()
    save_image(d / "a.png", np.zeros((8, 8)))
    save_image(d / "b.png", np.zeros((9, 8)))
    rc = run(["video-changepoint", d, "--r", 1, "--out", tmp_path / "r.csv"])
    assert rc == 4


def test_render_dict_missing_dims_exits_4(ts_csv, tmp_path):
    out = tmp_path / "run"
    run(["ts-learn", ts_csv, "--k", 2, "--N", 50, "--r", 4, "--seed", 0,
         "--out", out])
    rc = run(["render-dict", "--dict", str(out) + ".dict", "--layout", "temporal",
              "--out", tmp_path / "x.png"])
    assert rc == 4


# ------------------------------------------------------------- determinism


def test_ts_learn_rerun_is_byte_identical(ts_csv, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(["ts-learn", ts_csv, "--k", 4, "--N", 30, "--r", 6,
                    "--seed", 11, "--out", out]) == 0
    for suffix in (".dict", "_recon.csv", ".meta"):
        assert (str(a) + suffix != str(b) + suffix)
        assert open(str(a) + suffix, "rb").read() == open(str(b) + suffix, "rb").read()


def test_img_train_rerun_is_byte_identical(image_png, tmp_path):
    a, b = tmp_path / "a.dict", tmp_path / "b.dict"
    for out in (a, b):
        assert run(["img-train", image_png, "--p", 6, "--r", 5, "--batches", 3,
                    "--batch-size", 60, "--seed", 4, "--out", out]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_video_changepoint_rerun_is_byte_identical(frame_dir, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run(["video-changepoint", frame_dir, "--r", 2, "--iters", 100,
                    "--seed", 7, "--out", out]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (str(a) + ".meta") != (str(b) + ".meta")
    assert open(str(a) + ".meta", "rb").read() == open(str(b) + ".meta", "rb").read()
