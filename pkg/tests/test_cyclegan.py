import numpy as np
import pytest
import torch

from haze_restore.cyclegan import (
    CycleGANState,
    Discriminator,
    DiscriminatorConfig,
    DiscriminatorLosses,
    LossConfig,
    cycle_consistency_loss,
    discriminator_step_losses,
    gan_loss,
    generator_step_losses,
)
from haze_restore.errors import ConfigurationError, InputError
from haze_restore.ffa import zero_weights

from oracles import to_np


def seeded(shape, seed=0):
    gen = torch.Generator().manual_seed(seed)
    return torch.rand(shape, generator=gen)


def zero_state(tiny_ffa_cfg, tiny_disc_cfg):
    state = CycleGANState(tiny_ffa_cfg, tiny_disc_cfg, seed=0)
    for net in (state.generator_xy, state.generator_yx,
                state.discriminator_x, state.discriminator_y):
        zero_weights(net)
    return state


class TestConfigs:
    def test_lambda_must_be_nonnegative(self):
        with pytest.raises(ConfigurationError):
            LossConfig(lambda_cycle=-1.0)

    def test_only_least_squares_mode(self):
        with pytest.raises(ConfigurationError):
            LossConfig(gan_loss_mode="wasserstein")

    def test_discriminator_needs_two_layers(self):
        with pytest.raises(ConfigurationError):
            DiscriminatorConfig(num_layers=1)

    def test_leaky_slope_range(self):
        with pytest.raises(ConfigurationError):
            DiscriminatorConfig(leaky_slope=1.5)


class TestGanLoss:
    def test_perfect_real_scores(self):
        assert gan_loss(torch.ones(1, 1, 4, 4), True).item() == 0.0

    def test_zero_scores_against_real_target(self):
        assert gan_loss(torch.zeros(1, 1, 4, 4), True).item() == 1.0

    def test_half_scores_against_fake_target(self):
        assert gan_loss(torch.full((1, 1, 3, 3), 0.5), False).item() == pytest.approx(0.25)


class TestCycleLoss:
    def test_identical_tensors(self):
        x = seeded((1, 3, 16, 16))
        assert cycle_consistency_loss(x, x, LossConfig()).item() == 0.0

    def test_uniform_difference_closed_form(self):
        a = torch.zeros(1, 3, 8, 8)
        b = torch.full((1, 3, 8, 8), 0.1)
        loss = cycle_consistency_loss(a, b, LossConfig(lambda_cycle=10.0))
        assert loss.item() == pytest.approx(1.0, abs=1e-6)

    def test_matches_elementwise_loop(self):
        a, b = seeded((1, 3, 9, 7), 1), seeded((1, 3, 9, 7), 2)
        acc = 0.0
        for x, y in zip(to_np(a).ravel(), to_np(b).ravel()):
            acc += abs(x - y)
        expected = 10.0 * acc / a.numel()
        assert abs(cycle_consistency_loss(a, b, LossConfig()).item() - expected) < 1e-6

    def test_scales_linearly_in_lambda(self):
        a, b = seeded((1, 3, 8, 8), 3), seeded((1, 3, 8, 8), 4)
        base = cycle_consistency_loss(a, b, LossConfig(lambda_cycle=1.0)).item()
        for lam in (0.0, 2.5, 10.0):
            scaled = cycle_consistency_loss(a, b, LossConfig(lambda_cycle=lam)).item()
            assert scaled == pytest.approx(lam * base, rel=1e-6, abs=1e-12)

    def test_shape_mismatch_raises(self):
        with pytest.raises(InputError):
            cycle_consistency_loss(torch.zeros(1, 3, 8, 8), torch.zeros(1, 3, 8, 9), LossConfig())


def conv_out(size, kernel=4, stride=2, pad=1):
    return (size + 2 * pad - kernel) // stride + 1


class TestDiscriminator:
    def test_patch_map_shape_matches_conv_arithmetic(self):
        d = Discriminator(DiscriminatorConfig(num_layers=4), seed=0)
        x = seeded((1, 3, 256, 256))
        h = 256
        for _ in range(4):
            h = conv_out(h)  # stride-2 body: 128, 64, 32, 16
        assert h == 16
        head = conv_out(h, stride=1)  # stride-1 projection: 15
        assert d(x).shape == (1, 1, head, head) == (1, 1, 15, 15)

    def test_small_config_shape(self, tiny_disc_cfg):
        d = Discriminator(tiny_disc_cfg, seed=1)
        out = d(seeded((2, 3, 64, 48)))
        h, w = 64, 48
        for _ in range(tiny_disc_cfg.num_layers):
            h, w = conv_out(h), conv_out(w)
        assert out.shape == (2, 1, conv_out(h, stride=1), conv_out(w, stride=1))

    def test_zero_weights_score_zero(self, tiny_disc_cfg):
        d = zero_weights(Discriminator(tiny_disc_cfg))
        assert d(seeded((1, 3, 32, 32))).abs().max().item() == 0.0

    def test_batchnorm_couples_unequal_entries(self, tiny_disc_cfg):
        d = Discriminator(tiny_disc_cfg, seed=2).train()
        a, b = seeded((1, 3, 32, 32), 1), seeded((1, 3, 32, 32), 2)
        unequal = d(torch.cat([a, b]))
        assert not torch.allclose(unequal[0], unequal[1])
        identical = d(torch.cat([a, a]))
        assert torch.allclose(identical[0], identical[1])

    def test_input_too_small_raises(self):
        d = Discriminator(DiscriminatorConfig(num_layers=4))
        with pytest.raises(InputError):
            d(seeded((1, 3, 8, 8)))


class TestGeneratorStepLosses:
    def test_zero_weight_closed_form(self, tiny_ffa_cfg, tiny_disc_cfg):
        state = zero_state(tiny_ffa_cfg, tiny_disc_cfg)
        losses = generator_step_losses(state, seeded((1, 3, 32, 32), 1), seeded((1, 3, 32, 32), 2),
                                       LossConfig())
        assert losses.adv_xy.item() == pytest.approx(1.0, abs=1e-6)
        assert losses.adv_yx.item() == pytest.approx(1.0, abs=1e-6)
        assert losses.cyc_forward.item() == pytest.approx(0.0, abs=1e-6)
        assert losses.cyc_backward.item() == pytest.approx(0.0, abs=1e-6)
        assert losses.total.item() == pytest.approx(2.0, abs=1e-6)

    def test_lambda_zero_leaves_adversarial_terms_only(self, tiny_ffa_cfg, tiny_disc_cfg):
        state = CycleGANState(tiny_ffa_cfg, tiny_disc_cfg, seed=3)
        hazy, clean = seeded((1, 3, 32, 32), 3), seeded((1, 3, 32, 32), 4)
        losses = generator_step_losses(state, hazy, clean, LossConfig(lambda_cycle=0.0))
        assert losses.total.item() == pytest.approx(
            losses.adv_xy.item() + losses.adv_yx.item(), rel=1e-6
        )

    def test_matches_child_op_recomposition(self, tiny_ffa_cfg, tiny_disc_cfg):
        state = CycleGANState(tiny_ffa_cfg, tiny_disc_cfg, seed=5)
        hazy, clean = seeded((1, 3, 32, 32), 5), seeded((1, 3, 32, 32), 6)
        cfg = LossConfig()
        losses = generator_step_losses(state, hazy, clean, cfg)
        with torch.no_grad():
            fake_clean = state.generator_xy(hazy)
            fake_hazy = state.generator_yx(clean)
            expected = (
                gan_loss(state.discriminator_y(fake_clean), True)
                + gan_loss(state.discriminator_x(fake_hazy), True)
                + cycle_consistency_loss(hazy, state.generator_yx(fake_clean), cfg)
                + cycle_consistency_loss(clean, state.generator_xy(fake_hazy), cfg)
            )
        assert losses.total.item() == pytest.approx(expected.item(), abs=1e-6)

    def test_all_components_nonnegative(self, tiny_ffa_cfg, tiny_disc_cfg):
        state = CycleGANState(tiny_ffa_cfg, tiny_disc_cfg, seed=7)
        losses = generator_step_losses(state, seeded((2, 3, 32, 32), 7), seeded((2, 3, 32, 32), 8),
                                       LossConfig())
        for part in (losses.adv_xy, losses.adv_yx, losses.cyc_forward, losses.cyc_backward, losses.total):
            assert part.item() >= 0.0

    def test_discriminators_receive_no_gradients(self, tiny_ffa_cfg, tiny_disc_cfg):
        state = CycleGANState(tiny_ffa_cfg, tiny_disc_cfg, seed=9)
        losses = generator_step_losses(state, seeded((1, 3, 32, 32), 9), seeded((1, 3, 32, 32), 10),
                                       LossConfig())
        losses.total.backward()
        for p in state.discriminator_parameters():
            assert p.grad is None or p.grad.abs().max().item() == 0.0
        assert all(p.requires_grad for p in state.discriminator_parameters())
        assert any(p.grad is not None and p.grad.abs().max() > 0 for p in state.generator_parameters())

    def test_one_adam_step_decreases_loss(self, tiny_ffa_cfg, tiny_disc_cfg):
        state = CycleGANState(tiny_ffa_cfg, tiny_disc_cfg, seed=11)
        hazy, clean = seeded((1, 3, 32, 32), 11), seeded((1, 3, 32, 32), 12)
        opt = torch.optim.Adam(state.generator_parameters(), lr=1e-4)
        before = generator_step_losses(state, hazy, clean, LossConfig())
        opt.zero_grad()
        before.total.backward()
        opt.step()
        after = generator_step_losses(state, hazy, clean, LossConfig())
        assert after.total.item() < before.total.item()


class TestDiscriminatorStepLosses:
    def test_zero_weight_closed_form(self, tiny_ffa_cfg, tiny_disc_cfg):
        state = zero_state(tiny_ffa_cfg, tiny_disc_cfg)
        hazy, clean = seeded((1, 3, 32, 32), 1), seeded((1, 3, 32, 32), 2)
        gen = generator_step_losses(state, hazy, clean, LossConfig())
        losses = discriminator_step_losses(state, hazy, clean, gen.fake_hazy, gen.fake_clean)
        assert losses.loss_x.item() == pytest.approx(0.5, abs=1e-6)
        assert losses.loss_y.item() == pytest.approx(0.5, abs=1e-6)

    def test_perfect_discriminator_scores(self):
        class Oracle(torch.nn.Module):
            def forward(self, x):
                # real batches in this test are < 0.5 everywhere, fakes > 0.5
                return torch.zeros(x.size(0), 1, 4, 4) if x.mean() > 0.5 else torch.ones(x.size(0), 1, 4, 4)

        class Stub:
            discriminator_x = Oracle()
            discriminator_y = Oracle()

        real = torch.full((1, 3, 16, 16), 0.2)
        fake = torch.full((1, 3, 16, 16), 0.8)
        losses = discriminator_step_losses(Stub(), real, real, fake, fake)
        assert losses.total.item() == 0.0

    def test_matches_recomposition(self, tiny_ffa_cfg, tiny_disc_cfg):
        state = CycleGANState(tiny_ffa_cfg, tiny_disc_cfg, seed=13)
        state.eval()  # freeze batch statistics so the two passes agree
        hazy, clean = seeded((1, 3, 32, 32), 13), seeded((1, 3, 32, 32), 14)
        fake_hazy, fake_clean = seeded((1, 3, 32, 32), 15), seeded((1, 3, 32, 32), 16)
        losses = discriminator_step_losses(state, hazy, clean, fake_hazy, fake_clean)
        with torch.no_grad():
            expected_x = 0.5 * (
                gan_loss(state.discriminator_x(hazy), True)
                + gan_loss(state.discriminator_x(fake_hazy), False)
            )
            expected_y = 0.5 * (
                gan_loss(state.discriminator_y(clean), True)
                + gan_loss(state.discriminator_y(fake_clean), False)
            )
        assert losses.loss_x.item() == pytest.approx(expected_x.item(), abs=1e-6)
        assert losses.loss_y.item() == pytest.approx(expected_y.item(), abs=1e-6)

    def test_generators_receive_no_gradients(self, tiny_ffa_cfg, tiny_disc_cfg):
        state = CycleGANState(tiny_ffa_cfg, tiny_disc_cfg, seed=17)
        hazy, clean = seeded((1, 3, 32, 32), 17), seeded((1, 3, 32, 32), 18)
        gen = generator_step_losses(state, hazy, clean, LossConfig())
        losses = discriminator_step_losses(state, hazy, clean, gen.fake_hazy, gen.fake_clean)
        for p in state.generator_parameters():
            p.grad = None
        losses.total.backward()
        for p in state.generator_parameters():
            assert p.grad is None or p.grad.abs().max().item() == 0.0
        assert any(p.grad is not None and p.grad.abs().max() > 0 for p in state.discriminator_parameters())
