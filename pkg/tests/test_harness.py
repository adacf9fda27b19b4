"""
Tests for the evaluation harness.

Tests for PSNR, MS-SSIM, BD-rate, the entropy demonstrator and benchmark
orchestration.
"""

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np
import pytest
import torch
from scipy.integrate import trapezoid

from ctxcodec.codec import ContextualVideoCodec
from ctxcodec.config import CodecConfig
from ctxcodec.exceptions import ArgumentError, ConfigurationError, MalformedInputError, OverlapError
from ctxcodec.harness import (
    BenchmarkReport,
    JointPmf,
    RDCurve,
    RDRow,
    bd_rate,
    curves_from_csv,
    entropy_demo,
    entropy_gap,
    evaluate_reconstruction,
    load_rd_csv,
    ms_ssim,
    psnr,
    run_benchmark,
    sequence_psnr,
    write_rd_csv,
)
from ctxcodec.model import VideoModel
from ctxcodec.training import save_checkpoint, translating_clip
from ctxcodec.video.frames import FrameSequence
from ctxcodec.video.images import save_image_sequence
from ctxcodec.video.manifest import ManifestEntry


class TestPsnr:
    """Test psnr and sequence_psnr."""

    def test_one_code_value(self):
        a = torch.zeros(3, 8, 8)
        assert psnr(a, a + 1.0 / 255.0) == pytest.approx(48.1308, abs=1e-3)

    def test_identical_is_capped(self):
        a = torch.rand(3, 8, 8)
        assert psnr(a, a) == 100.0

    def test_known_mse(self):
        a = torch.zeros(3, 8, 8)
        assert psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            psnr(torch.zeros(3, 8, 8), torch.zeros(3, 8, 9))

    def test_sequence_average(self):
        a = torch.zeros(3, 8, 8)
        value = sequence_psnr([a, a], [a + 0.1, a + 0.01])
        assert value == pytest.approx(30.0, abs=1e-6)


class TestMsSsim:
    """Test ms_ssim."""

    def setup_method(self):
        torch.manual_seed(0)
        self.a = torch.rand(3, 160, 176)

    def test_identical(self):
        assert ms_ssim(self.a, self.a) == pytest.approx(1.0, abs=1e-9)

    def test_inverted(self):
        assert ms_ssim(self.a, 1.0 - self.a) < 0.5

    def test_noise_lowers_score(self):
        noisy = (self.a + 0.05 * torch.randn_like(self.a)).clamp(0, 1)
        assert 0.5 < ms_ssim(self.a, noisy) < 1.0

    def test_too_small(self):
        a = torch.rand(3, 159, 200)
        with pytest.raises(ArgumentError):
            ms_ssim(a, a)

    def test_frame_lists(self):
        assert ms_ssim([self.a, self.a], [self.a, self.a]) == pytest.approx(1.0, abs=1e-9)


def assert_rows_close(actual, expected):
    assert len(actual) == len(expected)
    for a, b in zip(actual, expected):
        assert (a.codec, a.sequence) == (b.codec, b.sequence)
        assert a.lam == pytest.approx(b.lam)
        assert a.bpp == pytest.approx(b.bpp)
        assert a.psnr == pytest.approx(b.psnr)
        if b.msssim is None:
            assert a.msssim is None
        else:
            assert a.msssim == pytest.approx(b.msssim)


def linear_curve(qualities, slope=0.1, offset=-3.0):
    return RDCurve.from_pairs([(math.exp(slope * q + offset), q) for q in qualities])


class TestBdRate:
    """Test bd_rate."""

    def setup_method(self):
        self.anchor = linear_curve([30.0, 32.0, 35.0, 38.0, 40.0])

    def test_identical(self):
        assert bd_rate(self.anchor, self.anchor) == pytest.approx(0.0, abs=1e-9)

    def test_double_rate(self):
        doubled = RDCurve.from_pairs([(2 * p.bpp, p.quality) for p in self.anchor.points])
        assert bd_rate(self.anchor, doubled) == pytest.approx(100.0, abs=1e-6)

    def test_matches_numerical_integration(self):
        # log rate of the test curve grows more slowly than the anchor's
        test = linear_curve([31.0, 33.0, 36.0, 39.0, 41.0], slope=0.08, offset=-2.2)
        grid = np.linspace(31.0, 40.0, 20001)
        gap = (0.08 * grid - 2.2) - (0.1 * grid - 3.0)
        expected = (math.exp(trapezoid(gap, grid) / (grid[-1] - grid[0])) - 1.0) * 100.0
        assert bd_rate(self.anchor, test) == pytest.approx(expected, rel=1e-3)

    def test_no_overlap(self):
        with pytest.raises(OverlapError):
            bd_rate(self.anchor, linear_curve([50.0, 51.0, 52.0, 53.0]))

    def test_too_few_points(self):
        with pytest.raises(ArgumentError):
            bd_rate(self.anchor, linear_curve([30.0, 32.0, 35.0]))

    def test_repeated_rates(self):
        with pytest.raises(ArgumentError):
            RDCurve.from_pairs([(0.1, 30.0), (0.1, 31.0)])


class TestEntropyDemo:
    """Test entropy_gap and entropy_demo."""

    def test_deterministic_prediction(self):
        joint = JointPmf(np.eye(4) / 4)
        assert entropy_gap(joint) == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_independent_uniform(self):
        uniform = np.full(4, 0.25)
        h_res, h_cond = entropy_gap(JointPmf.independent(uniform, uniform))
        assert h_cond == pytest.approx(2.0, abs=1e-12)
        assert h_res == pytest.approx(2.6556, abs=1e-4)

    def test_flipped_prediction_costs_one_bit(self):
        # x = 1 - x_pred: known given the prediction, but the residue is +1 or -1
        joint = JointPmf(np.array([[0.0, 0.5], [0.5, 0.0]]))
        assert entropy_gap(joint) == pytest.approx((1.0, 0.0), abs=1e-12)

    def test_independent_binary(self):
        uniform = np.full(2, 0.5)
        h_res, h_cond = entropy_gap(JointPmf.independent(uniform, uniform))
        assert (h_res, h_cond) == pytest.approx((1.5, 1.0), abs=1e-12)

    def test_invalid_pmf(self):
        with pytest.raises(ArgumentError):
            JointPmf(np.full((2, 2), 0.3))

    def test_random_trials(self):
        report = entropy_demo(alphabet=4, trials=1000, seed=0)
        assert report.violations == 0
        assert report.min_gap >= -1e-12
        assert report.uniform_residue > report.uniform_conditional

    def test_invalid_arguments(self):
        with pytest.raises(ArgumentError):
            entropy_demo(alphabet=0)


class TestRdTable:
    """Test RD rows, curves and CSV files."""

    def rows(self):
        rows = []
        for i, lam in enumerate((256.0, 512.0, 1024.0, 2048.0)):
            rows.append(RDRow("ours", "clip", lam, 0.05 * (i + 1), 30.0 + i, None))
            rows.append(RDRow("anchor", "clip", lam, 0.06 * (i + 1), 30.0 + i, 0.9 + 0.01 * i))
        return rows

    def test_curves(self):
        report = BenchmarkReport(self.rows())
        curves = report.curves("psnr")
        assert set(curves) == {("ours", "clip"), ("anchor", "clip")}
        assert len(report.curves("msssim")) == 1
        with pytest.raises(ArgumentError):
            report.curves("vmaf")

    def test_csv_round_trip(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "rd.csv")
            write_rd_csv(self.rows(), path)
            loaded = load_rd_csv(path)
            curves = curves_from_csv(path)
        assert_rows_close(loaded, self.rows())
        gain = bd_rate(curves[("anchor", "clip")], curves[("ours", "clip")])
        assert gain == pytest.approx(100.0 * (0.05 / 0.06 - 1.0), abs=1e-6)

    def test_missing_column(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "rd.csv")
            Path(path).write_text("codec,bpp\nours,0.1\n")
            with pytest.raises(MalformedInputError):
                load_rd_csv(path)


class TestBenchmark:
    """Test evaluate_reconstruction and run_benchmark."""

    def setup_method(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.root = Path(self.tmpdir.name)
        save_image_sequence(translating_clip(3), self.root / "clip")
        self.entry = ManifestEntry(name="clip", path=self.root / "clip", format="images", gop=3)
        torch.manual_seed(0)
        config = CodecConfig(context_dim=16, latent_channels=16, hidden_channels=16, hyper_channels=8, mv_channels=8)
        self.checkpoint = save_checkpoint(self.root / "m.pt", VideoModel(config))

    def teardown_method(self):
        self.tmpdir.cleanup()

    def test_evaluate_small_frames(self):
        seq = translating_clip(2)
        result = evaluate_reconstruction(seq, seq)
        assert result == {"psnr": 100.0, "msssim": None}

    def test_evaluate_mismatch(self):
        with pytest.raises(ArgumentError):
            evaluate_reconstruction(translating_clip(2), translating_clip(3))
        with pytest.raises(ArgumentError):
            evaluate_reconstruction(translating_clip(2), translating_clip(2), metrics=["vmaf"])

    def test_rate_accounting(self):
        report = run_benchmark([self.entry], {"ours": {256.0: self.checkpoint}}, output_dir=self.root / "out")
        (row,) = report.rows
        seq = self.entry.load()
        codec = ContextualVideoCodec.from_checkpoint(self.checkpoint)
        container, _ = codec.encode_sequence(seq, 3)
        assert row.bpp == pytest.approx(8 * len(container.to_bytes()) / (3 * 64 * 64))
        assert row.msssim is None
        decoded = codec.decode_sequence(container)
        assert row.psnr == pytest.approx(sequence_psnr(decoded.frames, seq.frames))

        assert_rows_close(load_rd_csv(self.root / "out" / "rd.csv"), report.rows)
        saved = json.loads((self.root / "out" / "report.json").read_text())
        assert saved["rows"][0]["codec"] == "ours"

    def test_missing_checkpoint(self):
        with pytest.raises(ConfigurationError, match="512"):
            run_benchmark([self.entry], {"ours": {256.0: self.checkpoint, 512.0: self.root / "none.pt"}})

    def test_decoded_frames_are_sequences(self):
        codec = ContextualVideoCodec.from_checkpoint(self.checkpoint)
        container, recon = codec.encode_sequence(self.entry.load(), 3)
        decoded = codec.decode_sequence(container)
        assert isinstance(decoded, FrameSequence)
        assert all(torch.equal(a, b) for a, b in zip(decoded, recon))
