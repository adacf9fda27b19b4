"""
Tests for video I/O.

Tests for frame containers, raw YUV 4:2:0 files, image sequences, GOP
segmentation and dataset manifests.
"""

import json
import tempfile
from pathlib import Path

import numpy as np
import pytest
import torch
from PIL import Image

from ctxcodec.exceptions import ArgumentError, ConfigurationError, EmptyInputError, MalformedInputError
from ctxcodec.video import (
    FrameRole,
    FrameSequence,
    load_image_sequence,
    load_manifest,
    load_yuv420,
    rgb_to_yuv,
    save_image_sequence,
    segment_gops,
    write_yuv420,
    yuv_to_rgb,
)
from ctxcodec.video.frames import crop, pad_to_multiple, padded_size


def gradient_frame(height=32, width=48):
    ys = torch.linspace(0, 1, height).view(height, 1).expand(height, width)
    xs = torch.linspace(0, 1, width).view(1, width).expand(height, width)
    return torch.stack([xs, ys, (xs + ys) / 2])


class TestFrameSequence:
    """Test FrameSequence and the padding helpers."""

    def test_rejects_empty(self):
        with pytest.raises(EmptyInputError):
            FrameSequence([])

    def test_rejects_mixed_sizes(self):
        with pytest.raises(MalformedInputError):
            FrameSequence([torch.zeros(3, 16, 16), torch.zeros(3, 16, 32)])

    def test_rejects_out_of_range_values(self):
        with pytest.raises(ArgumentError):
            FrameSequence([torch.full((3, 8, 8), 1.5)])

    def test_pad_and_crop(self):
        frame = gradient_frame(50, 70)
        assert padded_size(50, 70) == (64, 128)
        padded = pad_to_multiple(frame)
        assert padded.shape == (3, 64, 128)
        assert torch.equal(crop(padded, 50, 70), frame)

    def test_pad_reflects_bottom_and_right(self):
        frame = gradient_frame(50, 70)
        padded = pad_to_multiple(frame)
        assert torch.equal(padded[:, 50], frame[:, 48])
        assert torch.equal(padded[:, :50, 71], frame[:, :, 67])

    def test_pad_replicates_when_too_small_to_reflect(self):
        frame = gradient_frame(20, 64)
        padded = pad_to_multiple(frame)
        assert padded.shape == (3, 64, 64)
        assert torch.equal(padded[:, 63], frame[:, 19])

    def test_pad_is_noop_on_aligned_input(self):
        frame = torch.rand(3, 64, 64)
        assert pad_to_multiple(frame) is frame


class TestYuv:
    """Test raw YUV 4:2:0 reading and writing."""

    def test_chroma_neutral_black(self):
        """768 bytes at 16x16 hold two constant black frames."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "black.yuv"
            frame = np.concatenate([np.zeros(256, np.uint8), np.full(128, 128, np.uint8)])
            path.write_bytes(np.concatenate([frame, frame]).tobytes())

            seq = load_yuv420(path, 16, 16)
            assert len(seq) == 2
            for f in seq:
                assert torch.all(f == f[0, 0, 0])
                assert float(f.max()) == 0.0

    def test_truncated_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "bad.yuv"
            path.write_bytes(bytes(769))
            with pytest.raises(MalformedInputError):
                load_yuv420(path, 16, 16)

    def test_empty_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "empty.yuv"
            path.write_bytes(b"")
            with pytest.raises(EmptyInputError):
                load_yuv420(path, 16, 16)

    def test_max_frames(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "three.yuv"
            path.write_bytes(bytes(384 * 3))
            assert len(load_yuv420(path, 16, 16, max_frames=2)) == 2
            assert len(load_yuv420(path, 16, 16, max_frames=10)) == 3

    def test_odd_size_rejected(self):
        with pytest.raises(ArgumentError):
            load_yuv420("unused.yuv", 15, 16)

    def test_color_round_trip(self):
        """RGB to 8-bit YUV and back stays within 2/255."""
        frame = gradient_frame()
        back = yuv_to_rgb(rgb_to_yuv(frame))
        assert float((back - frame).abs().max()) <= 2.0 / 255.0 + 1e-6

    def test_random_round_trip(self):
        gen = torch.Generator().manual_seed(3)
        frame = torch.rand(3, 16, 16, generator=gen)
        back = yuv_to_rgb(rgb_to_yuv(frame))
        assert float((back - frame).abs().max()) <= 2.0 / 255.0 + 1e-6

    def test_write_then_read(self):
        seq = FrameSequence([torch.full((3, 16, 16), 0.5), torch.full((3, 16, 16), 0.25)])
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "out.yuv"
            assert write_yuv420(seq, path) == 2 * 384
            back = load_yuv420(path, 16, 16)
            assert len(back) == 2
            assert float((back[0] - 0.5).abs().max()) <= 2.0 / 255.0 + 1e-6


class TestImages:
    """Test PNG sequence I/O."""

    def test_three_pngs(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            for i in range(3):
                Image.new("RGB", (64, 64), (i, i, i)).save(Path(tmpdir) / f"im{i}.png")
            seq = load_image_sequence(tmpdir)
            assert len(seq) == 3
            assert (seq.height, seq.width) == (64, 64)

    def test_white_png(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            Image.new("RGB", (8, 8), (255, 255, 255)).save(Path(tmpdir) / "white.png")
            seq = load_image_sequence(tmpdir)
            assert torch.all(seq[0] == 1.0)

    def test_size_mismatch(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            Image.new("RGB", (8, 8)).save(Path(tmpdir) / "a.png")
            Image.new("RGB", (8, 16)).save(Path(tmpdir) / "b.png")
            with pytest.raises(MalformedInputError):
                load_image_sequence(tmpdir)

    def test_no_match(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(EmptyInputError):
                load_image_sequence(tmpdir)

    def test_save_then_load_is_exact_on_8bit_values(self):
        frame = torch.round(torch.rand(3, 8, 8) * 255) / 255
        with tempfile.TemporaryDirectory() as tmpdir:
            paths = save_image_sequence(FrameSequence([frame]), tmpdir)
            assert paths[0].name == "frame_00000.png"
            assert torch.allclose(load_image_sequence(tmpdir)[0], frame, atol=1e-6)


class TestGop:
    """Test GOP segmentation."""

    def _seq(self, n):
        return FrameSequence([torch.zeros(3, 4, 4)] * n)

    def test_hundred_frames_gop_ten(self):
        gops = segment_gops(self._seq(100), 10)
        assert len(gops.gops()) == 10
        assert gops.intra_count == 10
        assert gops.frame_roles[:10] == (FrameRole.I,) + (FrameRole.P,) * 9

    def test_single_gop(self):
        assert segment_gops(self._seq(12), 12).gops() == [(0, 12)]

    def test_short_last_gop(self):
        assert [n for _, n in segment_gops(self._seq(25), 10).gops()] == [10, 10, 5]

    def test_invalid_gop(self):
        with pytest.raises(ArgumentError):
            segment_gops(self._seq(3), 0)


class TestManifest:
    """Test manifest parsing."""

    def test_relative_paths_and_defaults(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            manifest = Path(tmpdir) / "m.json"
            manifest.write_text(
                json.dumps(
                    [
                        {"name": "a", "path": "a.yuv", "width": 16, "height": 16},
                        {"name": "b", "path": "frames", "format": "images"},
                    ]
                )
            )
            entries = load_manifest(manifest)
            assert entries[0].path == Path(tmpdir) / "a.yuv"
            assert entries[0].gop == 10
            assert entries[1].gop == 12

    def test_yuv_needs_size(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            manifest = Path(tmpdir) / "m.json"
            manifest.write_text(json.dumps([{"name": "a", "path": "a.yuv"}]))
            with pytest.raises(ConfigurationError):
                load_manifest(manifest)

    def test_unreadable(self):
        with pytest.raises(ConfigurationError):
            load_manifest("/nonexistent/manifest.json")
