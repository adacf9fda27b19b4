"""
Tests for the bitstream layer.

Tests for CDF construction, the range coder, latent coding, the container
format, the intra plugs and frame/sequence coding.
"""

import json
import os
import tempfile

import numpy as np
import pytest
import torch

from ctxcodec.bitstream.cdf import TOTAL_FREQUENCY, build_cdf
from ctxcodec.bitstream.container import (
    HEADER,
    BitstreamContainer,
    ContainerHeader,
    FrameBitstream,
    FrameType,
)
from ctxcodec.bitstream.frame_coder import decode_frame_p, encode_frame_p
from ctxcodec.bitstream.intra.lossless import LosslessDeflateIntra
from ctxcodec.bitstream.intra.registry import IntraRegistry, default_registry
from ctxcodec.bitstream.intra.toy_hyperprior import ToyHyperpriorIntra
from ctxcodec.bitstream.latent_coder import decode_hyper, decode_latents, encode_hyper, encode_latents
from ctxcodec.bitstream.range_coder import range_decode, range_encode
from ctxcodec.bitstream.sequence import (
    decode_sequence,
    encode_sequence,
    encode_sequence_with_reconstruction,
    mean_bpp,
    rate_records,
    write_rate_report,
)
from ctxcodec.config import CodecConfig, ConditionMode, EntropyMode, MotionMode
from ctxcodec.entropy import EntropyModel, EntropyParams, estimate_rate
from ctxcodec.exceptions import (
    ArgumentError,
    ConfigurationError,
    ContractError,
    CorruptionError,
    MalformedInputError,
    UnsupportedCodecError,
)
from ctxcodec.layers.quantization import quantize
from ctxcodec.model import VideoModel
from ctxcodec.training.synthetic import translating_clip
from ctxcodec.video.gop import segment_gops


def small_config(**changes) -> CodecConfig:
    base = dict(
        context_dim=16,
        latent_channels=16,
        hidden_channels=16,
        hyper_channels=8,
        temporal_channels=8,
        mv_channels=8,
    )
    base.update(changes)
    return CodecConfig(**base)


def small_model(seed: int = 0, **changes) -> VideoModel:
    torch.manual_seed(seed)
    return VideoModel(small_config(**changes)).eval()


class TestCdf:
    """Test quantized CDF tables."""

    def test_uniform_four(self):
        table = build_cdf(np.full((1, 4), 0.25))
        assert table.cdf[0].tolist() == [0, 16384, 32768, 49152, 65536]

    def test_laplace_zero_frequency(self):
        params = EntropyParams(torch.zeros(1, dtype=torch.float64), torch.ones(1, dtype=torch.float64))
        table = build_cdf(params, r=32)
        column = int(table.columns_of(np.array([0]))[0])
        freq = int(table.cdf[0, column + 1] - table.cdf[0, column])
        # 65536 * (1 - exp(-0.5)) = 25786.3
        assert abs(freq - 25786) <= 1

    def test_strictly_monotone(self):
        masses = np.zeros((1, 70))
        masses[0, 0] = 1.0
        table = build_cdf(masses)
        assert int(table.cdf[0, -1]) == TOTAL_FREQUENCY
        assert bool((np.diff(table.cdf[0]) >= 1).all())


class TestRangeCoder:
    """Test range_encode and range_decode."""

    def setup_method(self):
        self.rng = np.random.default_rng(0)

    def test_round_trip(self):
        masses = self.rng.dirichlet(np.ones(9), size=500)
        table = build_cdf(masses)
        symbols = np.array([self.rng.choice(9, p=row) for row in masses])
        data = range_encode(symbols, table)
        assert np.array_equal(range_decode(data, table), symbols)

    def test_fair_coin_size(self):
        table = build_cdf(np.full((1000, 2), 0.5))
        data = range_encode(self.rng.integers(0, 2, 1000), table)
        assert 125 <= len(data) <= 133

    def test_empty_stream(self):
        table = build_cdf(np.zeros((0, 2)))
        data = range_encode([], table)
        assert len(data) <= 8
        assert range_decode(data, table).size == 0

    def test_truncation(self):
        table = build_cdf(np.full((1000, 2), 0.5))
        data = range_encode(self.rng.integers(0, 2, 1000), table)
        with pytest.raises(CorruptionError):
            range_decode(data[: len(data) // 2], table)


class TestLatentCoder:
    """Test latent and hyper-latent entropy coding across entropy modes."""

    def setup_method(self):
        torch.manual_seed(0)
        self.y_hat = torch.randint(-4, 5, (1, 16, 4, 4)).float()
        self.condition = torch.randn(1, 8, 64, 64)

    def priors(self, mode):
        torch.manual_seed(1)
        model = EntropyModel(16, 8, mode, condition_channels=8, temporal_channels=8).eval()
        with torch.no_grad():
            z_hat = quantize(model.hyper_encode(self.y_hat), "round")
            hyper = model.hyper_decode(z_hat)
            temporal = model.temporal_prior(self.condition) if model.temporal is not None else None
        return model, z_hat, hyper, temporal

    @pytest.mark.parametrize("mode", list(EntropyMode))
    def test_round_trip(self, mode):
        model, _, hyper, temporal = self.priors(mode)
        with torch.no_grad():
            data = encode_latents(self.y_hat, hyper, temporal, model)
            decoded = decode_latents(data, tuple(self.y_hat.shape), hyper, temporal, model)
        assert torch.equal(decoded, self.y_hat)

    def test_permuted_order(self):
        model, _, hyper, temporal = self.priors(EntropyMode.HYPER_TEMPORAL)
        order = np.random.default_rng(3).permutation(self.y_hat.numel())
        with torch.no_grad():
            data = encode_latents(self.y_hat, hyper, temporal, model, order)
            decoded = decode_latents(data, tuple(self.y_hat.shape), hyper, temporal, model, order)
        assert torch.equal(decoded, self.y_hat)

    def test_order_rejected_for_spatial_modes(self):
        model, _, hyper, temporal = self.priors(EntropyMode.HYPER_SPATIAL)
        order = np.arange(self.y_hat.numel())[::-1].copy()
        with pytest.raises(ConfigurationError):
            encode_latents(self.y_hat, hyper, temporal, model, order)

    def test_coded_size_near_ideal(self):
        model, _, hyper, temporal = self.priors(EntropyMode.HYPER_ONLY)
        with torch.no_grad():
            data = encode_latents(self.y_hat, hyper, temporal, model)
            ideal = float(estimate_rate(self.y_hat, model.params_parallel(hyper, None)))
        assert 8 * len(data) <= 1.01 * ideal + 96

    def test_hyper_round_trip(self):
        model, z_hat, _, _ = self.priors(EntropyMode.HYPER_ONLY)
        data = encode_hyper(z_hat, model.factorized)
        assert torch.equal(decode_hyper(data, tuple(z_hat.shape), model.factorized), z_hat)

    def test_hyper_needs_integers(self):
        model, z_hat, _, _ = self.priors(EntropyMode.HYPER_ONLY)
        with pytest.raises(ContractError):
            encode_hyper(z_hat + 0.5, model.factorized)


class TestContainer:
    """Test the container header and frame records."""

    def header(self, frame_count=2) -> ContainerHeader:
        return ContainerHeader(
            width=1920,
            height=1080,
            padded_width=1920,
            padded_height=1088,
            gop_size=10,
            entropy_mode=EntropyMode.HYPER_SPATIAL_TEMPORAL,
            condition_mode=ConditionMode.CONTEXT_FEATURE,
            motion_mode=MotionMode.MEMC,
            context_dim=64,
            intra_id=0,
            frame_count=frame_count,
        )

    def container(self) -> BitstreamContainer:
        return BitstreamContainer(
            header=self.header(),
            records=[
                FrameBitstream(FrameType.I, intra_id=0, payload=b"abc"),
                FrameBitstream(FrameType.P, substreams=[b"", b"s", b"yy", b"zzz"]),
            ],
        )

    def test_golden_header(self):
        packed = self.header().pack()
        assert len(packed) == HEADER.size == 33
        assert packed.hex() == (
            "44435631" "01" "00000780" "00000438" "00000780" "00000440" "000a" "00" "00" "00" "0040" "00" "00000002"
        )

    def test_round_trip(self):
        data = self.container().to_bytes()
        back = BitstreamContainer.from_bytes(data)
        assert back.header == self.header()
        assert back.records[0].payload == b"abc"
        assert back.records[1].substreams == [b"", b"s", b"yy", b"zzz"]

    def test_p_record_bits(self):
        record = self.container().records[1]
        assert record.total_bits == 128 + 8 * 6
        assert record.substream_bits() == {"g": 0, "s": 8, "y": 16, "z": 24}

    def test_bad_magic(self):
        data = b"XXXX" + self.container().to_bytes()[4:]
        with pytest.raises(MalformedInputError):
            BitstreamContainer.from_bytes(data)

    def test_trailing_bytes(self):
        with pytest.raises(CorruptionError):
            BitstreamContainer.from_bytes(self.container().to_bytes() + b"\x00")

    def test_truncated_substream_index(self):
        data = self.container().to_bytes()
        with pytest.raises(CorruptionError) as info:
            BitstreamContainer.from_bytes(data[:-2])
        assert info.value.substream == 3

    def test_frame_count_mismatch(self):
        container = BitstreamContainer(header=self.header(frame_count=3), records=self.container().records)
        with pytest.raises(ArgumentError):
            container.to_bytes()

    def test_p_record_needs_four_substreams(self):
        with pytest.raises(ArgumentError):
            FrameBitstream(FrameType.P, substreams=[b"a"])

    def test_write_and_read(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "clip.dcv")
            size = self.container().write(path)
            assert size == os.path.getsize(path)
            assert BitstreamContainer.read(path).header.frame_count == 2


class TestIntra:
    """Test the intra plugs and their registry."""

    def setup_method(self):
        self.frame = translating_clip(1, (64, 96))[0]

    def test_lossless_round_trip(self):
        codec = LosslessDeflateIntra()
        decoded = codec.decode(codec.encode(self.frame))
        assert torch.equal(decoded, torch.round(self.frame * 255) / 255)

    def test_lossless_rejects_garbage(self):
        with pytest.raises(CorruptionError):
            LosslessDeflateIntra().decode(b"\x00\x00\x00\x40\x00\x00\x00\x40garbage")

    def test_toy_round_trip(self):
        torch.manual_seed(0)
        codec = ToyHyperpriorIntra(16, 16, 8).eval()
        payload, recon = codec.encode_with_reconstruction(self.frame)
        assert recon.shape == self.frame.shape
        assert torch.equal(codec.decode(payload), recon)

    def test_registry(self):
        registry = default_registry(ToyHyperpriorIntra(16, 16, 8))
        assert registry.ids() == [0, 1]
        assert registry.by_name("lossless-deflate").codec_id == 0
        with pytest.raises(UnsupportedCodecError):
            registry.get(7)
        with pytest.raises(ArgumentError):
            registry.register(LosslessDeflateIntra())


class TestFrameCoder:
    """Test P-frame encoding and decoding."""

    @pytest.mark.parametrize("size", [(64, 64), (128, 128)])
    def test_decoder_matches_encoder(self, size):
        model = small_model()
        clip = translating_clip(2, size)
        bits, recon = encode_frame_p(clip[1], clip[0], model)
        decoded = decode_frame_p(bits, clip[0], model)
        assert torch.equal(decoded, recon)
        assert len(bits.substreams) == 4
        assert bits.total_bits == 128 + 8 * sum(len(s) for s in bits.substreams)

    @pytest.mark.parametrize("mode", list(EntropyMode))
    def test_entropy_modes(self, mode):
        model = small_model(entropy_mode=mode)
        clip = translating_clip(2)
        bits, recon = encode_frame_p(clip[1], clip[0], model)
        assert torch.equal(decode_frame_p(bits, clip[0], model), recon)

    def test_no_motion_has_empty_mv_substreams(self):
        model = small_model(motion_mode=MotionMode.NONE, condition_mode=ConditionMode.RESIDUE)
        clip = translating_clip(2)
        bits, recon = encode_frame_p(clip[1], clip[0], model)
        assert bits.substreams[0] == b"" and bits.substreams[1] == b""
        assert torch.equal(decode_frame_p(bits, clip[0], model), recon)

    def test_unpadded_frame(self):
        model = small_model()
        frame = torch.rand(3, 60, 64)
        with pytest.raises(ArgumentError):
            encode_frame_p(frame, frame, model)

    def test_corrupt_substream_is_named(self):
        model = small_model()
        clip = translating_clip(2)
        bits, _ = encode_frame_p(clip[1], clip[0], model)
        broken = list(bits.substreams)
        broken[2] = broken[2][:1]
        with pytest.raises(CorruptionError) as info:
            decode_frame_p(FrameBitstream(FrameType.P, substreams=broken), clip[0], model)
        assert info.value.substream == 2


class TestSequence:
    """Test sequence encoding, decoding and rate accounting."""

    def setup_method(self):
        self.model = small_model()
        self.clip = translating_clip(10, (60, 64))
        self.gops = segment_gops(self.clip, 10)
        self.registry = default_registry()
        self.intra = self.registry.get(0)

    def test_one_gop(self):
        container, recon = encode_sequence_with_reconstruction(self.clip, self.gops, self.model, self.intra)
        types = [r.frame_type for r in container.records]
        assert types == [FrameType.I] + [FrameType.P] * 9
        assert container.header.padded_height == 64
        assert recon.height == 60 and len(recon) == 10

        decoded = decode_sequence(BitstreamContainer.from_bytes(container.to_bytes()), self.model, self.registry)
        assert all(torch.equal(a, b) for a, b in zip(decoded, recon))

    def test_deterministic(self):
        first = encode_sequence(self.clip, self.gops, self.model, self.intra).to_bytes()
        second = encode_sequence(self.clip, self.gops, self.model, self.intra).to_bytes()
        assert first == second

    def test_concurrent_gops_match(self):
        gops = segment_gops(self.clip, 5)
        serial = encode_sequence(self.clip, gops, self.model, self.intra, workers=1).to_bytes()
        parallel = encode_sequence(self.clip, gops, self.model, self.intra, workers=2).to_bytes()
        assert serial == parallel

    def test_header_mismatch(self):
        container = encode_sequence(self.clip, self.gops, self.model, self.intra)
        other = small_model(entropy_mode=EntropyMode.HYPER_ONLY)
        with pytest.raises(ConfigurationError):
            decode_sequence(container, other, self.registry)

    def test_unknown_intra_id(self):
        container = encode_sequence(self.clip, self.gops, self.model, self.intra)
        with pytest.raises(UnsupportedCodecError):
            decode_sequence(container, self.model, IntraRegistry())

    def test_rate_records(self):
        container = encode_sequence(self.clip, self.gops, self.model, self.intra)
        records = rate_records(container)
        assert [r.type for r in records] == ["I"] + ["P"] * 9
        pixels = 60 * 64
        for record, frame in zip(records, container.records):
            assert record.bpp == pytest.approx(frame.total_bits / pixels)
        assert records[0].bits_intra == 8 * len(container.records[0].payload)
        assert mean_bpp(records, "P") > 0

        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "rates.jsonl")
            write_rate_report(records, path)
            with open(path) as f:
                lines = [json.loads(line) for line in f]
        assert len(lines) == 10
        assert set(lines[1]) == {"frame", "type", "bits_g", "bits_s", "bits_y", "bits_z", "bits_intra", "bpp"}

    def test_mean_bpp_of_missing_type(self):
        records = rate_records(encode_sequence(self.clip, segment_gops(self.clip, 1), self.model, self.intra))
        with pytest.raises(ArgumentError):
            mean_bpp(records, "P")
