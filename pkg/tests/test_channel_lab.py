import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from iftrkit.channel_lab import (PRESETS, SPEED_OF_LIGHT, TAGS, URA_SIZE, ChannelError, ChannelMeta,
                                 ChannelResponse, ChannelSelector, FrequencyGrid, MergedConfig, RaySpec,
                                 _all_position_pairs, all_selectors, channel_from_rays, cir, cir_peaks,
                                 cosine_power_gain, element_position, empirical_pdf, kde_pdf, merge,
                                 merge_config, pair_distance, phase_diff_pdf, sample_configs, synth_scenario)
from iftrkit.fading import rayleigh_pdf

GRID = FrequencyGrid()


@pytest.fixture(scope="module")
def anechoic():
    return synth_scenario("anechoic", 7)


@pytest.fixture(scope="module")
def reverberation():
    return synth_scenario("reverberation", 7)


def _generic(h):
    return ChannelResponse(GRID, h, ChannelMeta("synthetic", None, None))


def _moment_k(amp):
    """Rician K from the second and fourth moments of the amplitude."""
    p2, p4 = np.mean(amp ** 2), np.mean(amp ** 4)
    root = math.sqrt(max(0.0, 2.0 - p4 / p2 ** 2))
    return root / (1.0 - root) if root < 1 else np.inf


class TestGeometry:
    def test_grid_defaults(self):
        assert (GRID.f_start, GRID.f_step, GRID.n_points) == (24.25e9, 5e6, 651)
        assert GRID.f_stop == pytest.approx(27.5e9)

    def test_array_in_xz_plane(self):
        p = element_position(np.arange(URA_SIZE), np.arange(URA_SIZE))
        assert np.all(p[:, 1] == 0.0)
        assert np.allclose(np.diff(p[:, 0]), 0.04) and np.allclose(np.diff(p[:, 2]), -0.04)

    def test_gain_pattern(self):
        assert cosine_power_gain(0.0) == 1.0
        assert 20 * math.log10(float(cosine_power_gain(math.radians(30)))) == pytest.approx(-20.0)
        assert cosine_power_gain(math.radians(100)) == 0.0

    def test_selectors(self):
        sels = all_selectors()
        assert len(sels) == 1089 and len(set(sels)) == 1089

    def test_meta_validation(self):
        with pytest.raises(ValueError):
            ChannelMeta("x", (11, 0), (0, 0))
        with pytest.raises(ValueError):
            ChannelMeta("x", (0, 0), (2, 0))
        with pytest.raises(ValueError):
            RaySpec(1.0, -1.0)


class TestSynthesis:
    def test_shape(self, anechoic):
        assert len(anechoic) == 1089
        assert all(c.h.shape == (651,) for c in anechoic)
        sel = ChannelSelector(3, 4, -1, 1)
        assert anechoic.get(sel).meta.rx == (3, 4) and anechoic.get(sel).meta.tx == (-1, 1)

    def test_anechoic_flat(self, anechoic):
        cv = [np.std(np.abs(c.h)) / np.mean(np.abs(c.h)) for c in anechoic]
        assert max(cv) <= 0.05

    def test_anechoic_delay(self, anechoic):
        ch = anechoic.get(ChannelSelector(5, 5, 0, 0))
        prof = cir(ch)
        expected = 1.6 / SPEED_OF_LIGHT / prof.resolution
        assert abs(int(np.argmax(prof.magnitude)) - expected) <= 1

    def test_reverberation_low_k(self, reverberation):
        ks = [_moment_k(np.abs(c.h)) for c in reverberation]
        assert 10 * math.log10(np.median(ks)) <= 5.0

    @pytest.mark.parametrize("kind", sorted(PRESETS))
    def test_power_budget(self, kind, anechoic, reverberation):
        cs = {"anechoic": anechoic, "reverberation": reverberation}.get(kind) or synth_scenario(kind, 7)
        power = np.mean([np.mean(np.abs(c.h) ** 2) for c in cs])
        assert abs(10 * math.log10(power / PRESETS[kind].total_power)) <= 1.0

    def test_deterministic(self, anechoic):
        again = synth_scenario("anechoic", 7)
        assert np.array_equal(again.matrix(), anechoic.matrix())
        assert not np.array_equal(synth_scenario("anechoic", 8).matrix(), anechoic.matrix())

    def test_unknown(self):
        with pytest.raises(ValueError):
            synth_scenario("outdoor", 0)


class TestMerge:
    def test_identity_and_coherent_sum(self, anechoic):
        a = anechoic.get(ChannelSelector(0, 0, 0, 0))
        zero = ChannelResponse(GRID, np.zeros(651), ChannelMeta("anechoic", (0, 1), (0, 0)))
        assert np.array_equal(merge(a, zero).h, a.h)
        twice = merge(a, a)
        assert np.array_equal(twice.h, 2 * a.h)
        gain = np.mean(np.abs(twice.h) ** 2) / np.mean(np.abs(a.h) ** 2)
        assert 10 * math.log10(gain) == pytest.approx(6.0206, abs=1e-3)

    def test_parents_recorded(self, anechoic):
        a = anechoic.get(ChannelSelector(0, 0, 1, 1))
        b = anechoic.get(ChannelSelector(4, 2, 1, 1))
        m = merge(a, b)
        assert m.meta.parents == (a.meta, b.meta)
        assert m.meta.tx == (1, 1) and m.meta.rx is None

    def test_constraint(self, anechoic):
        with pytest.raises(ChannelError):
            merge(anechoic.get(ChannelSelector(0, 0, 1, 1)), anechoic.get(ChannelSelector(0, 1, 0, 1)))

    def test_grid_mismatch(self):
        a = _generic(np.ones(651))
        b = ChannelResponse(FrequencyGrid(n_points=10), np.ones(10), ChannelMeta("synthetic", None, None))
        with pytest.raises(ChannelError):
            merge(a, b)

    def test_two_tone_period(self):
        t1, t2 = 20e-9, 26e-9
        h1 = channel_from_rays([RaySpec(1.0, t1)], GRID)
        h2 = channel_from_rays([RaySpec(0.7, t2)], GRID)
        mag2 = np.abs(merge(h1, h2).h) ** 2
        spec = np.abs(np.fft.rfft(mag2 - mag2.mean()))
        freq = np.fft.rfftfreq(651, d=GRID.f_step)
        # |H|^2 oscillates at the delay difference; resolution is one DFT bin
        assert abs(freq[int(np.argmax(spec))] - (t2 - t1)) <= 1.0 / (651 * GRID.f_step)

    @given(st.integers(0, 2 ** 32 - 1))
    def test_commutative_associative(self, seed):
        rng = np.random.default_rng(seed)
        hs = [_generic(rng.standard_normal(651) + 1j * rng.standard_normal(651)) for _ in range(3)]
        assert np.array_equal(merge(hs[0], hs[1]).h, merge(hs[1], hs[0]).h)
        lhs, rhs = merge(merge(hs[0], hs[1]), hs[2]).h, merge(hs[0], merge(hs[1], hs[2])).h
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))

    def test_anechoic_envelope_support(self, anechoic):
        for cfg in sample_configs(142, 3)[:20]:
            if cfg.pair_kind != "shared-tx":
                continue
            h1, h2 = anechoic.get(cfg.first), anechoic.get(cfg.second)
            # the preset puts the diffuse power 30 dB below the specular power
            a1 = math.sqrt(np.mean(np.abs(h1.h) ** 2) / (1 + 1e-3))
            a2 = math.sqrt(np.mean(np.abs(h2.h) ** 2) / (1 + 1e-3))
            sigma = math.sqrt(0.5 * 1e-3 * (a1 ** 2 + a2 ** 2))
            r = np.abs(merge_config(anechoic, cfg).h)
            inside = (r >= abs(a1 - a2) - 4 * sigma) & (r <= a1 + a2 + 4 * sigma)
            assert inside.mean() >= 0.99


class TestConfigs:
    def test_split(self):
        cfgs = sample_configs()
        assert len(cfgs) == 142
        kinds = [c.pair_kind for c in cfgs]
        assert kinds.count("shared-tx") == 131 and kinds.count("shared-rx") == 11
        assert len({c.id for c in cfgs}) == 142 and cfgs[0].id == "A" and cfgs[26].id == "AA"

    def test_constraints(self):
        for c in sample_configs(142, 5):
            if c.pair_kind == "shared-tx":
                assert c.first.tx == c.second.tx and c.first.rx != c.second.rx
            else:
                assert c.first.rx == c.second.rx and c.first.tx != c.second.tx

    def test_change_types(self):
        changes = {c.orientation_change for c in sample_configs(142, 0) if c.pair_kind == "shared-rx"}
        assert changes == {"pointing", "polarization", "both"}

    def test_invalid_config(self):
        a, b = ChannelSelector(0, 0, 0, 0), ChannelSelector(0, 1, 1, 0)
        with pytest.raises(ChannelError):
            MergedConfig("A", "shared-tx", a, b)
        with pytest.raises(ChannelError):
            MergedConfig("A", "shared-rx", a, b)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_distance_distribution(self, seed):
        _, all_dist = _all_position_pairs()
        d = [pair_distance(c.first, c.second) for c in sample_configs(142, seed) if c.pair_kind == "shared-tx"]
        assert stats.ks_2samp(d, all_dist).statistic <= 0.05

    def test_deterministic(self):
        assert sample_configs(142, 9) == sample_configs(142, 9)
        assert sample_configs(142, 9) != sample_configs(142, 10)


class TestEstimators:
    def test_constant_amplitude(self):
        pdf = empirical_pdf(_generic(0.3 * np.exp(1j * np.linspace(0, 40, 651))))
        step = pdf.grid[1] - pdf.grid[0]
        assert abs(pdf.grid[np.argmax(pdf.density)] - 0.3) <= step

    def test_rayleigh(self):
        rng = np.random.default_rng(4)
        x = np.abs(rng.standard_normal(20000) + 1j * rng.standard_normal(20000)) / math.sqrt(2)
        pdf = kde_pdf(x)
        ref = rayleigh_pdf(1.0, pdf.grid)
        assert pdf.grid.size == 100
        assert math.sqrt(np.mean((pdf.density - ref) ** 2)) <= 0.05 * ref.max()
        assert pdf.is_normalized()
        assert pdf.second_moment() == pytest.approx(np.mean(x * x))

    def test_too_few(self):
        with pytest.raises(ValueError):
            kde_pdf(np.ones(29))
        with pytest.raises(ValueError):
            kde_pdf(np.ones(100), n_points=5)

    def test_phase_constant_offset(self):
        rng = np.random.default_rng(1)
        h1 = rng.standard_normal(651) + 1j * rng.standard_normal(651)
        theta = 1.0
        pdf = phase_diff_pdf(_generic(h1), _generic(h1 * np.exp(1j * theta)))
        k = int(np.searchsorted(pdf.edges, theta) - 1)
        assert pdf.density[k] * pdf.widths[k] == pytest.approx(1.0)
        assert pdf.integral() == pytest.approx(1.0, abs=1e-9)

    def test_phase_uniform(self):
        rng = np.random.default_rng(2)
        n = 651
        a = _generic(np.exp(1j * rng.uniform(-np.pi, np.pi, n)))
        b = _generic(np.exp(1j * rng.uniform(-np.pi, np.pi, n)))
        pdf = phase_diff_pdf(a, b, 12)
        counts = pdf.density * pdf.widths * n
        p = 1 / 12
        assert np.all(np.abs(counts - n * p) <= 3 * math.sqrt(n * p * (1 - p)))

    def test_cir_single_and_two_rays(self):
        single = channel_from_rays([RaySpec(1.0, 37.3e-9)], GRID)
        prof = cir(single)
        assert abs(int(np.argmax(prof.magnitude)) - 37.3e-9 / prof.resolution) <= 1
        two = channel_from_rays([RaySpec(1.0, 13e-9), RaySpec(1.0, 22.8e-9)], GRID)
        prof = cir(two)
        peaks = cir_peaks(prof, 2)
        assert list(peaks) == [round(13e-9 / prof.resolution), round(22.8e-9 / prof.resolution)]
        db = 20 * np.log10(prof.magnitude[peaks])
        assert abs(db[0] - db[1]) <= 1.0

    def test_parseval(self, reverberation):
        h = reverberation.channels[17]
        prof = cir(h, window=None)
        lhs, rhs = np.sum(prof.magnitude ** 2), np.sum(np.abs(h.h) ** 2) / 651
        assert lhs == pytest.approx(rhs, rel=1e-9)
        assert prof.delay[-1] < 1 / GRID.f_step

    def test_tags(self):
        assert TAGS == (-1, 0, 1)
