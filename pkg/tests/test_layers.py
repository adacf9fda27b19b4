"""
Tests for shared network layers.

Tests for GDN/IGDN, quantization and the raster-masked convolution.
"""

import pytest
import torch

from ctxcodec.exceptions import ParameterError
from ctxcodec.layers import GDN, MaskedConv2d, gdn, is_integral, quantize, raster_mask, round_half_away


class TestGdn:
    """Test the functional and module GDN."""

    def test_identity(self):
        x = torch.randn(1, 4, 5, 5)
        out = gdn(x, torch.ones(4), torch.zeros(4, 4))
        assert torch.allclose(out, x)

    def test_scalar_closed_form(self):
        x = torch.full((1, 1, 1, 1), 2.0)
        out = gdn(x, torch.ones(1), torch.full((1, 1), 3.0))
        assert float(out) == pytest.approx(2.0 / 13**0.5, abs=1e-6)
        assert float(out) == pytest.approx(0.5547, abs=1e-4)

    def test_inverse_multiplies(self):
        x = torch.full((1, 1, 1, 1), 2.0)
        out = gdn(x, torch.ones(1), torch.full((1, 1), 3.0), inverse=True)
        assert float(out) == pytest.approx(2.0 * 13**0.5, abs=1e-5)

    def test_three_dim_input(self):
        x = torch.randn(3, 4, 4)
        assert gdn(x, torch.ones(3), torch.zeros(3, 3)).shape == (3, 4, 4)

    def test_negative_gamma_rejected(self):
        with pytest.raises(ParameterError):
            gdn(torch.randn(1, 2, 2, 2), torch.ones(2), -torch.eye(2))

    def test_beta_below_minimum_rejected(self):
        with pytest.raises(ParameterError):
            gdn(torch.randn(1, 2, 2, 2), torch.zeros(2), torch.zeros(2, 2))

    def test_gradcheck(self):
        torch.manual_seed(0)
        x = torch.randn(1, 3, 2, 2, dtype=torch.float64, requires_grad=True)
        beta = (torch.rand(3, dtype=torch.float64) + 0.5).requires_grad_()
        gamma = (torch.rand(3, 3, dtype=torch.float64) * 0.2).requires_grad_()
        assert torch.autograd.gradcheck(lambda a, b, g: gdn(a, b, g), (x, beta, gamma), eps=1e-4, atol=1e-6, rtol=1e-3)

    def test_module_stays_admissible_after_bad_update(self):
        layer = GDN(4)
        with torch.no_grad():
            layer.beta.fill_(-5.0)
            layer.gamma.fill_(-5.0)
        beta, gamma = layer.effective_params()
        assert bool((beta >= layer.beta_min).all())
        assert bool((gamma >= 0).all())
        assert torch.isfinite(layer(torch.randn(1, 4, 3, 3))).all()

    def test_module_init_is_close_to_identity_scale(self):
        layer = GDN(2)
        x = torch.randn(1, 2, 4, 4) * 0.1
        out = layer(x)
        assert torch.allclose(out, x, rtol=0.05, atol=1e-3)


class TestQuantize:
    """Test rounding and the noise relaxation."""

    def test_tie_rule(self):
        x = torch.tensor([0.49, -1.5, 1.5, 2.5, -0.5])
        assert quantize(x).tolist() == [0.0, -2.0, 2.0, 3.0, -1.0]

    def test_idempotent(self):
        x = torch.randn(100) * 10
        once = quantize(x)
        assert torch.equal(quantize(once), once)
        assert is_integral(once)

    def test_noise_bound(self):
        x = torch.randn(1000)
        out = quantize(x, "noise", generator=torch.Generator().manual_seed(1))
        assert float((out - x).abs().max()) <= 0.5

    def test_straight_through_gradient(self):
        x = torch.randn(10, requires_grad=True)
        quantize(x, "ste").sum().backward()
        assert torch.equal(x.grad, torch.ones(10))

    def test_round_half_away_matches_quantize(self):
        x = torch.arange(-5, 5, 0.25)
        assert torch.equal(round_half_away(x), quantize(x))

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            quantize(torch.zeros(1), "floor")


class TestMaskedConv:
    """Test raster causality of the masked convolution."""

    def test_mask_layout(self):
        mask = raster_mask(5)
        assert mask.sum() == 12
        assert mask[2, 2] == 0
        assert mask[2, 1] == 1
        assert mask[3].sum() == 0

    def test_causality_under_random_perturbations(self):
        """Changing element j never changes outputs at positions before or at j."""
        torch.manual_seed(0)
        layer = MaskedConv2d(3, 4, 5)
        x = torch.randn(1, 3, 6, 6)
        with torch.no_grad():
            base = layer(x)
            gen = torch.Generator().manual_seed(7)
            violations = 0
            for _ in range(1000):
                c = int(torch.randint(0, 3, (1,), generator=gen))
                i = int(torch.randint(0, 6, (1,), generator=gen))
                j = int(torch.randint(0, 6, (1,), generator=gen))
                perturbed = x.clone()
                perturbed[0, c, i, j] += 1.0
                diff = (layer(perturbed) - base).abs().sum(dim=1)[0].flatten()
                violations += int((diff[: i * 6 + j + 1] > 0).sum())
        assert violations == 0

    def test_patch_matches_full_convolution(self):
        torch.manual_seed(1)
        layer = MaskedConv2d(2, 3, 5)
        x = torch.randn(1, 2, 7, 7)
        padded = torch.nn.functional.pad(x, (2, 2, 2, 2))
        with torch.no_grad():
            full = layer(x)
            patch = layer.forward_patch(padded[:, :, 3:8, 4:9])
        assert torch.allclose(full[:, :, 3:4, 4:5], patch, atol=1e-6)
