"""
Tests for the ctxc command-line tool.

Commands run in-process through ``main(argv)``; exit codes are 0 on success,
2 for argument errors, 3 for data errors and 4 for configuration errors.
"""

import json
import shutil
import tempfile
from pathlib import Path

import pytest
import torch

from bin.ctxc import EXIT_ARGUMENT, EXIT_CONFIG, EXIT_DATA, EXIT_OK, main, parse_size
from ctxcodec.config import CodecConfig
from ctxcodec.exceptions import ArgumentError
from ctxcodec.harness import RDRow, write_rd_csv
from ctxcodec.model import VideoModel
from ctxcodec.training import save_checkpoint, translating_clip
from ctxcodec.video.images import save_image_sequence
from ctxcodec.video.yuv import write_yuv420

SMALL_CODEC = {
    "context_dim": 16,
    "latent_channels": 16,
    "hidden_channels": 16,
    "hyper_channels": 8,
    "temporal_channels": 8,
    "mv_channels": 8,
}


class TestParseSize:
    """Test parse_size."""

    def test_valid(self):
        assert parse_size("352x288") == (352, 288)
        assert parse_size("64X32") == (64, 32)
        assert parse_size(None) is None

    @pytest.mark.parametrize("text", ["352", "ax288", "0x10", "1x2x3"])
    def test_invalid(self, text):
        with pytest.raises(ArgumentError):
            parse_size(text)


class TestCli:
    """Test the ctxc subcommands."""

    def setup_method(self):
        """Set up test fixtures."""
        self.tmp = Path(tempfile.mkdtemp(prefix="ctxc_cli_"))
        self.clip = translating_clip(3)
        save_image_sequence(self.clip, self.tmp / "frames")
        torch.manual_seed(0)
        self.checkpoint = str(save_checkpoint(self.tmp / "m.pt", VideoModel(CodecConfig(**SMALL_CODEC))))

    def teardown_method(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.tmp, ignore_errors=True)

    def rd_table(self, name, codec, scale):
        rows = [RDRow(codec, "clip", lam, scale * (i + 1), 30.0 + i) for i, lam in enumerate((256, 512, 1024, 2048))]
        path = self.tmp / name
        write_rd_csv(rows, path)
        return str(path)

    def test_no_command(self):
        assert main([]) == EXIT_ARGUMENT

    def test_demo_entropy(self, capsys):
        assert main(["demo-entropy", "--trials", "200"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "2.6556" in out and "2.0000" in out

    def test_bdrate(self, capsys):
        anchor = self.rd_table("anchor.csv", "x265", 0.06)
        test = self.rd_table("test.csv", "ours", 0.05)
        assert main(["bdrate", "--anchor", anchor, "--test", test]) == EXIT_OK
        assert "-16.67%" in capsys.readouterr().out

    def test_bdrate_without_shared_sequence(self):
        anchor = self.rd_table("anchor.csv", "x265", 0.06)
        other = self.tmp / "other.csv"
        write_rd_csv([RDRow("ours", "elsewhere", lam, 0.01 * lam, 30.0 + lam / 256) for lam in (1, 2, 3, 4)], other)
        assert main(["bdrate", "--anchor", anchor, "--test", str(other)]) == EXIT_ARGUMENT

    def test_bdrate_malformed_table(self):
        bad = self.tmp / "bad.csv"
        bad.write_text("codec,bpp\nours,0.1\n")
        assert main(["bdrate", "--anchor", str(bad), "--test", str(bad)]) == EXIT_DATA

    def test_eval(self):
        report = self.tmp / "eval.json"
        argv = ["eval", "--recon", str(self.tmp / "frames"), "--ref", str(self.tmp / "frames"), "--report", str(report)]
        assert main(argv) == EXIT_OK
        result = json.loads(report.read_text())
        assert result["frames"] == 3
        assert result["psnr"] == 100.0
        assert result["msssim"] is None

    def test_eval_bad_size(self):
        write_yuv420(self.clip, self.tmp / "clip.yuv")
        yuv = str(self.tmp / "clip.yuv")
        assert main(["eval", "--recon", yuv, "--ref", yuv, "--size", "64by64"]) == EXIT_ARGUMENT

    def test_eval_truncated_yuv(self):
        path = self.tmp / "short.yuv"
        path.write_bytes(b"\x00" * 100)
        assert main(["eval", "--recon", str(path), "--ref", str(path), "--size", "64x64"]) == EXIT_DATA

    def test_encode_decode(self):
        container = self.tmp / "clip.dcv"
        report = self.tmp / "rates.jsonl"
        argv = [
            "encode",
            "--input", str(self.tmp / "frames"),
            "--checkpoint", self.checkpoint,
            "--gop", "3",
            "--report", str(report),
            "--out", str(container),
        ]
        assert main(argv) == EXIT_OK
        assert container.stat().st_size > 0
        assert len(report.read_text().splitlines()) == 3

        out = self.tmp / "decoded"
        assert main(["decode", "--in", str(container), "--checkpoint", self.checkpoint, "--out", str(out)]) == EXIT_OK
        assert len(list(out.glob("*.png"))) == 3

        yuv = self.tmp / "decoded.yuv"
        assert main(["decode", "--in", str(container), "--checkpoint", self.checkpoint, "--out", str(yuv)]) == EXIT_OK
        assert yuv.stat().st_size == 3 * 64 * 64 * 3 // 2

    def test_encode_mode_mismatch(self):
        argv = [
            "encode",
            "--input", str(self.tmp / "frames"),
            "--checkpoint", self.checkpoint,
            "--entropy-mode", "hyper_only",
            "--out", str(self.tmp / "clip.dcv"),
        ]
        assert main(argv) == EXIT_CONFIG

    def test_encode_yuv_needs_size(self):
        write_yuv420(self.clip, self.tmp / "clip.yuv")
        argv = ["encode", "--input", str(self.tmp / "clip.yuv"), "--checkpoint", self.checkpoint,
                "--out", str(self.tmp / "clip.dcv")]
        assert main(argv) == EXIT_ARGUMENT

    def test_missing_checkpoint(self):
        argv = ["decode", "--in", str(self.tmp / "x.dcv"), "--checkpoint", str(self.tmp / "none.pt"),
                "--out", str(self.tmp / "out")]
        assert main(argv) == EXIT_ARGUMENT

    def test_corrupt_container(self):
        bad = self.tmp / "bad.dcv"
        bad.write_bytes(b"DCV1\x01" + b"\x00" * 10)
        argv = ["decode", "--in", str(bad), "--checkpoint", self.checkpoint, "--out", str(self.tmp / "out")]
        assert main(argv) == EXIT_DATA

    def test_unknown_intra(self):
        argv = ["encode", "--input", str(self.tmp / "frames"), "--checkpoint", self.checkpoint,
                "--intra", "jpeg", "--out", str(self.tmp / "clip.dcv")]
        assert main(argv) == EXIT_ARGUMENT

    def test_train(self):
        job = {
            "codec": SMALL_CODEC,
            "schedule": {"stage_steps": [1, 1, 1, 1], "crop_size": 64, "batch_size": 1},
            "data": {"synthetic": {"frames": 3}},
        }
        config = self.tmp / "job.json"
        config.write_text(json.dumps(job))
        out = self.tmp / "run"
        assert main(["train", "--config", str(config), "--stage", "3", "--out", str(out)]) == EXIT_OK
        assert sorted(p.name for p in out.glob("*.pt")) == ["final.pt", "stage3.pt"]

    def test_train_resume(self):
        job = {
            "codec": SMALL_CODEC,
            "schedule": {"stage_steps": [1, 1, 1, 1], "lr_drop_step": 3, "crop_size": 64, "batch_size": 1},
            "data": {"synthetic": {"frames": 3}},
        }
        config = self.tmp / "job.json"
        config.write_text(json.dumps(job))
        first = self.tmp / "run3"
        assert main(["train", "--config", str(config), "--stage", "3", "--out", str(first)]) == EXIT_OK
        second = self.tmp / "run4"
        argv = ["train", "--config", str(config), "--stage", "4", "--resume", str(first / "final.pt"), "--out", str(second)]
        assert main(argv) == EXIT_OK
        (entry,) = [json.loads(line) for line in (second / "train_log.jsonl").read_text().splitlines()]
        assert entry["stage"] == 4 and entry["step"] == 3
        assert entry["lr"] == 1e-5

    def test_train_bad_config(self):
        config = self.tmp / "job.json"
        config.write_text(json.dumps({"codec": {"context_dim": 5}, "data": {"synthetic": {}}}))
        assert main(["train", "--config", str(config), "--out", str(self.tmp / "run")]) == EXIT_CONFIG

    def test_benchmark(self):
        manifest = self.tmp / "manifest.json"
        manifest.write_text(json.dumps([{"name": "clip", "path": "frames", "format": "images", "gop": 3}]))
        runs = self.tmp / "runs.json"
        runs.write_text(json.dumps({"ours": {"256": self.checkpoint}}))
        out = self.tmp / "bench"
        assert main(["benchmark", "--manifest", str(manifest), "--runs", str(runs), "--out", str(out)]) == EXIT_OK
        assert (out / "rd.csv").exists() and (out / "report.json").exists()
