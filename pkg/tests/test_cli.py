"""Command-line surface: outputs, determinism, exit codes."""
import subprocess
import sys

import numpy as np
import pytest

import shiftsr as s
from shiftsr.cli import main


def run_cli(argv):
    return subprocess.run([sys.executable, "-m", "shiftsr.cli", *argv],
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def small_checkpoint(tmp_path_factory):
    path = str(tmp_path_factory.mktemp("ckpt") / "small.scn")
    model = s.build_model(s.ModelConfig(1, 16, 2), 0)
    s.write_checkpoint(model, path)
    return path


class TestCount:
    def test_frozen_value(self, capsys):
        assert main(["count", "--blocks", "32", "--dim", "128",
                     "--scale", "4"]) == 0
        out = capsys.readouterr().out
        assert "params: 1,079,996" in out
        assert "flops(256x256):" in out

    def test_flops_hw_flag(self, capsys):
        assert main(["count", "--blocks", "2", "--dim", "16", "--scale", "2",
                     "--flops-hw", "8", "8"]) == 0
        out = capsys.readouterr().out
        expected = s.count_flops(s.ModelConfig(2, 16, 2), 8, 8)
        assert f"flops(8x8): {expected:,}" in out

    def test_bad_config_exit_4(self, capsys):
        assert main(["count", "--blocks", "2", "--dim", "12",
                     "--scale", "2"]) == 4
        assert "error:" in capsys.readouterr().err


class TestSr:
    def test_one_pixel_png(self, small_checkpoint, tmp_path, capsys):
        inp = str(tmp_path / "in.png")
        outp = str(tmp_path / "out.png")
        s.save_image(np.full((3, 1, 1), 0.5, np.float32), inp)
        assert main(["sr", "--model", small_checkpoint,
                     "--input", inp, "--output", outp]) == 0
        img = s.load_image(outp)
        assert img.shape == (3, 2, 2)

    def test_impl_modes_byte_identical(self, small_checkpoint, tmp_path):
        inp = str(tmp_path / "in.ppm")
        rng = np.random.default_rng(0)
        s.save_image(rng.random((3, 12, 10), np.float32), inp)
        outs = []
        for impl in ("naive", "fused"):
            outp = tmp_path / f"{impl}.png"
            assert main(["sr", "--model", small_checkpoint, "--input", inp,
                         "--output", str(outp), "--impl", impl]) == 0
            outs.append(outp.read_bytes())
        assert outs[0] == outs[1]

    def test_missing_input_exit_3(self, small_checkpoint, tmp_path, capsys):
        assert main(["sr", "--model", small_checkpoint,
                     "--input", str(tmp_path / "nope.png"),
                     "--output", str(tmp_path / "o.png")]) == 3
        assert "error:" in capsys.readouterr().err

    def test_bad_checkpoint_exit_3(self, tmp_path, capsys):
        bad = tmp_path / "bad.scn"
        bad.write_bytes(b"JUNKJUNKJUNK")
        inp = str(tmp_path / "in.png")
        s.save_image(np.zeros((3, 2, 2), np.float32), inp)
        assert main(["sr", "--model", str(bad), "--input", inp,
                     "--output", str(tmp_path / "o.png")]) == 3


class TestEval:
    def test_csv_output(self, small_checkpoint, tmp_path, capsys):
        rng = np.random.default_rng(1)
        for name in ("b.png", "a.png"):
            s.save_image(rng.random((3, 32, 32), np.float32),
                         str(tmp_path / name))
        assert main(["eval", "--model", small_checkpoint,
                     "--hr-dir", str(tmp_path)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "filename,psnr_db,ssim"
        # sorted by filename, mean row last
        assert lines[1].startswith("a.png,")
        assert lines[2].startswith("b.png,")
        assert lines[3].startswith("mean,")
        psnr_val = float(lines[1].split(",")[1])
        ssim_val = float(lines[1].split(",")[2])
        assert 0.0 < psnr_val < 100.0
        assert -1.0 <= ssim_val <= 1.0

    def test_empty_dir_exit_3(self, small_checkpoint, tmp_path, capsys):
        assert main(["eval", "--model", small_checkpoint,
                     "--hr-dir", str(tmp_path)]) == 3


class TestTrain:
    def test_writes_checkpoint_and_loss_csv(self, tmp_path, capsys):
        rng = np.random.default_rng(2)
        s.save_image(rng.random((3, 48, 48), np.float32),
                     str(tmp_path / "t.png"))
        out = tmp_path / "trained.scn"
        assert main(["train", "--blocks", "1", "--dim", "16", "--scale", "2",
                     "--hr-dir", str(tmp_path), "--iters", "2", "--batch", "2",
                     "--patch", "8", "--out", str(out)]) == 0
        model = s.read_checkpoint(str(out))
        assert model.config.blocks == 1
        loss_lines = (tmp_path / "trained.scn.loss.csv").read_text().splitlines()
        assert loss_lines[0] == "iteration,loss"
        assert len(loss_lines) == 3


class TestBench:
    def test_csv_report(self, capsys):
        assert main(["bench", "--blocks", "1", "--dim", "16", "--scale", "2",
                     "--size", "16", "16", "--impl", "fused",
                     "--iters", "5", "--warmup", "1"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("config,input,impl,")
        fields = lines[1].split(",")
        assert fields[0] == "B1D16x2"
        assert fields[1] == "16x16"
        assert fields[2] == "fused"
        assert int(fields[3]) == 5
        median, p10, p90 = float(fields[5]), float(fields[6]), float(fields[7])
        assert p10 <= median <= p90


class TestArgErrors:
    def test_unknown_flag_exit_2(self):
        result = run_cli(["count", "--blocks", "1", "--dim", "16",
                          "--scale", "2", "--frobnicate"])
        assert result.returncode == 2
        assert "usage" in result.stderr.lower()

    def test_missing_subcommand_exit_2(self):
        assert run_cli([]).returncode == 2
