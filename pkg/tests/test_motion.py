"""
Tests for the motion module.

Tests for backward warping, the pyramid flow estimator and MV compression.
"""

import pytest
import torch
import torch.nn.functional as F

from ctxcodec.exceptions import ArgumentError, ConfigurationError, ContractError
from ctxcodec.motion import MvCodec, MvLatentBlock, PyramidFlowNet, estimate_flow, mv_decode, mv_encode, warp_bilinear
from ctxcodec.training.synthetic import translating_clip


class TestWarp:
    """Test warp_bilinear."""

    def setup_method(self):
        torch.manual_seed(0)
        self.source = torch.rand(3, 8, 10)

    def test_zero_flow_is_identity(self):
        out = warp_bilinear(self.source, torch.zeros(2, 8, 10))
        assert torch.equal(out, self.source)

    def test_integer_shift(self):
        flow = torch.zeros(2, 8, 10)
        flow[0] = 1.0
        out = warp_bilinear(self.source, flow)
        assert torch.equal(out[:, :, :-1], self.source[:, :, 1:])
        assert torch.equal(out[:, :, -1], self.source[:, :, -1])

    def test_half_pixel_shift(self):
        source = torch.tensor([[[0.0, 1.0]]])
        flow = torch.zeros(2, 1, 2)
        flow[0] = 0.5
        out = warp_bilinear(source, flow)
        assert float(out[0, 0, 0]) == pytest.approx(0.5)

    def test_vertical_shift(self):
        flow = torch.zeros(2, 8, 10)
        flow[1] = -1.0
        out = warp_bilinear(self.source, flow)
        assert torch.equal(out[:, 1:], self.source[:, :-1])
        assert torch.equal(out[:, 0], self.source[:, 0])

    def test_linear_in_source(self):
        other = torch.rand(3, 8, 10)
        flow = torch.randn(2, 8, 10) * 2
        mixed = warp_bilinear(2.0 * self.source - 0.5 * other, flow)
        expected = 2.0 * warp_bilinear(self.source, flow) - 0.5 * warp_bilinear(other, flow)
        assert torch.allclose(mixed, expected, atol=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            warp_bilinear(self.source, torch.zeros(2, 8, 9))

    def test_gradcheck(self):
        source = torch.rand(1, 2, 5, 5, dtype=torch.float64, requires_grad=True)
        # Keep samples off integer positions and inside the frame.
        flow = (torch.rand(1, 2, 5, 5, dtype=torch.float64) * 0.6 + 0.2).requires_grad_()
        assert torch.autograd.gradcheck(warp_bilinear, (source, flow), eps=1e-4, atol=1e-6, rtol=1e-3)


class TestFlow:
    """Test the pyramid flow estimator."""

    def setup_method(self):
        torch.manual_seed(0)
        self.net = PyramidFlowNet(levels=4).eval()

    def test_output_shape(self):
        ref, cur = torch.rand(3, 64, 64), torch.rand(3, 64, 64)
        with torch.no_grad():
            assert estimate_flow(ref, cur, self.net).shape == (2, 64, 64)

    def test_deterministic(self):
        ref, cur = torch.rand(1, 3, 32, 32), torch.rand(1, 3, 32, 32)
        with torch.no_grad():
            assert torch.equal(self.net(ref, cur), self.net(ref, cur))

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            estimate_flow(torch.rand(3, 64, 64), torch.rand(3, 64, 32), self.net)

    def test_not_divisible_by_pyramid(self):
        with pytest.raises(ArgumentError):
            estimate_flow(torch.rand(3, 40, 40), torch.rand(3, 40, 40), self.net)

    def test_invalid_levels(self):
        with pytest.raises(ConfigurationError):
            PyramidFlowNet(levels=0)

    def test_load_external(self):
        state = {"ext.w": torch.ones_like(self.net.stages[0].body[0].weight)}
        name = "stages.0.body.0.weight"
        assert self.net.load_external(state, {"ext.w": name}) == 1
        assert torch.equal(self.net.state_dict()[name], state["ext.w"])
        with pytest.raises(ConfigurationError):
            self.net.load_external(state, {"missing": name})

    @pytest.mark.slow
    def test_overfit_recovers_translation(self):
        torch.manual_seed(0)
        clip = translating_clip(frames=2, size=(64, 64), shift=(2.0, 0.0))
        ref, cur = clip[0].unsqueeze(0), clip[1].unsqueeze(0)
        net = PyramidFlowNet(levels=4)
        optimizer = torch.optim.Adam(net.parameters(), lr=1e-3)
        for _ in range(600):
            flow = net(ref, cur)
            loss = F.mse_loss(warp_bilinear(ref, flow), cur)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        with torch.no_grad():
            flow = net(ref, cur)[0, :, 8:-8, 8:-8]
        assert abs(float(flow[0].mean()) - 2.0) < 0.5
        assert abs(float(flow[1].mean())) < 0.5


class TestMvCodec:
    """Test MV compression."""

    def setup_method(self):
        torch.manual_seed(0)
        self.codec = MvCodec(channels=64).eval()

    def test_latent_shapes(self):
        with torch.no_grad():
            block = mv_encode(torch.randn(2, 64, 64), self.codec)
        assert block.g_hat.shape == (64, 4, 4)
        assert block.s_hat.shape == (64, 1, 1)

    def test_decode_is_deterministic(self):
        with torch.no_grad():
            block = mv_encode(torch.randn(2, 64, 128), self.codec)
            first = mv_decode(block, self.codec)
            second = mv_decode(block, self.codec)
        assert first.shape == (2, 64, 128)
        assert torch.equal(first, second)

    def test_rejects_unpadded_field(self):
        with pytest.raises(ArgumentError):
            mv_encode(torch.zeros(2, 48, 64), self.codec)

    def test_block_requires_integers(self):
        with pytest.raises(ContractError):
            MvLatentBlock(g_hat=torch.full((64, 4, 4), 0.5), s_hat=torch.zeros(64, 1, 1))

    def test_training_forward_reports_rates(self):
        self.codec.train()
        out = self.codec(torch.randn(1, 2, 64, 64))
        assert out.m_hat.shape == (1, 2, 64, 64)
        assert float(out.bits_g) > 0 and float(out.bits_s) > 0
        out.m_hat.sum().backward()
