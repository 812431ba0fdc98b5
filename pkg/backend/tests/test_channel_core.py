"""
Testes do modelo de canal e das medidas de informação
"""

import itertools

import numpy as np
import pytest
from scipy.special import xlogy

from app.schemas import AuxiliaryPolicy, JointDistribution
from app.services.channel import channel_summary, load_channel, validate_channel
from app.services.information import (
    blahut_arimoto, build_joint, conditional_mutual_information, entropy,
    mi_pair, mutual_information, oblivious_baseline
)
from app.utils.errors import (
    ChannelParseError, ConvergenceFailureError, DimensionMismatchError, NegativeEntryError,
    NonStochasticError, NotADistributionError, SizeOutOfRangeError
)
from tests.conftest import mod_additive_raw, random_channel


def _raw(**overrides):
    raw = {
        "x_size": 2, "s_size": 2, "y_size": 2,
        "q_s": [0.5, 0.5],
        "w": [[[0.9, 0.1], [0.2, 0.8]], [[0.3, 0.7], [0.5, 0.5]]],
    }
    raw.update(overrides)
    return raw


def _random_policy(rng, v_size, u_size, s_size, x_size):
    return AuxiliaryPolicy(
        v_size=v_size,
        u_size=u_size,
        q_v=rng.dirichlet(np.ones(v_size)),
        q_u_given_sv=rng.dirichlet(np.ones(u_size), size=(v_size, s_size)),
        phi=rng.integers(0, x_size, size=(v_size, u_size)),
    )


def _naive_cmi(p, a_axis, b_axis):
    """I(A;B|V) por laço direto sobre a lei (v, u, s, x, y)"""
    p_vab = np.zeros((p.shape[0], p.shape[a_axis], p.shape[b_axis]))
    for idx in itertools.product(*(range(d) for d in p.shape)):
        p_vab[idx[0], idx[a_axis], idx[b_axis]] += p[idx]
    total = 0.0
    for v, a, b in itertools.product(*(range(d) for d in p_vab.shape)):
        pab = p_vab[v, a, b]
        if pab <= 0:
            continue
        pv = p_vab[v].sum()
        pa = p_vab[v, a, :].sum()
        pb = p_vab[v, :, b].sum()
        total += pab * np.log2(pab * pv / (pa * pb))
    return total


class TestValidateChannel:
    """Testes de validate_channel"""

    def test_accepts_well_formed(self):
        ch = validate_channel(_raw())
        assert ch.x_size == 2 and ch.s_size == 2 and ch.y_size == 2
        np.testing.assert_allclose(ch.w.sum(axis=2), 1.0)
        assert not ch.q_s.flags.writeable

    def test_q_s_not_normalized(self):
        with pytest.raises(NonStochasticError) as exc:
            validate_channel(_raw(q_s=[0.6, 0.6]))
        assert exc.value.field == "q_s"

    def test_negative_entry(self):
        raw = _raw(y_size=3, w=[[[1.0, -0.0001, 0.0001]] * 2] * 2)
        with pytest.raises(NegativeEntryError):
            validate_channel(raw)

    def test_row_not_normalized(self):
        raw = _raw(w=[[[0.9, 0.2], [0.2, 0.8]], [[0.3, 0.7], [0.5, 0.5]]])
        with pytest.raises(NonStochasticError) as exc:
            validate_channel(raw)
        assert "x=0, s=0" in str(exc.value)

    def test_size_out_of_range(self):
        with pytest.raises(SizeOutOfRangeError):
            validate_channel(_raw(x_size=17))
        with pytest.raises(SizeOutOfRangeError):
            validate_channel(_raw(s_size=0))

    def test_missing_field(self):
        raw = _raw()
        del raw["w"]
        with pytest.raises(ChannelParseError) as exc:
            validate_channel(raw)
        assert exc.value.field == "w"

    def test_shape_mismatch(self):
        with pytest.raises(ChannelParseError):
            validate_channel(_raw(q_s=[1.0]))

    def test_renormalizes_within_tolerance(self):
        ch = validate_channel(_raw(q_s=[0.5 + 4e-13, 0.5]))
        assert abs(ch.q_s.sum() - 1.0) < 1e-15


class TestChannelFiles:
    """Arquivos de canal distribuídos com o repositório"""

    @pytest.mark.parametrize("name", ["mod2_additive.json", "useless.json", "asymmetric_2x2x2.json"])
    def test_example_files_load(self, data_dir, name):
        ch = load_channel(data_dir / name)
        assert ch.name == name

    def test_missing_file(self, tmp_path):
        with pytest.raises(ChannelParseError):
            load_channel(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ChannelParseError):
            load_channel(path)

    def test_summary_detects_cases(self, data_dir):
        summary = channel_summary(load_channel(data_dir / "mod2_additive.json"))
        assert summary["cases"] == ["mod_additive"]
        assert summary["h_s"] == pytest.approx(1.0)
        assert channel_summary(load_channel(data_dir / "useless.json"))["cases"] == ["useless"]


class TestEntropy:
    """Testes de entropy"""

    def test_values(self):
        assert entropy([0.5, 0.5]) == pytest.approx(1.0)
        assert entropy([1.0, 0.0]) == 0.0
        assert entropy([0.11, 0.89]) == pytest.approx(0.499916, abs=1e-6)

    def test_bounds(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            p = rng.dirichlet(np.ones(5))
            assert 0.0 <= entropy(p) <= np.log2(5)

    def test_not_a_distribution(self):
        with pytest.raises(NotADistributionError):
            entropy([0.5, 0.6])
        with pytest.raises(NotADistributionError):
            entropy([])

    def test_mutual_information_helpers(self):
        assert mutual_information(np.diag([0.5, 0.5])) == pytest.approx(1.0)
        assert mutual_information(np.full((2, 2), 0.25)) == pytest.approx(0.0, abs=1e-15)
        p = np.zeros((2, 2, 2))
        p[0] = np.diag([0.25, 0.25])
        p[1] = np.full((2, 2), 0.125)
        assert conditional_mutual_information(p) == pytest.approx(0.5)


class TestJointAndMiPair:
    """Testes de build_joint e mi_pair"""

    def setup_method(self):
        self.rng = np.random.default_rng(42)

    def test_singleton_auxiliaries(self, asymmetric_channel):
        pol = AuxiliaryPolicy(v_size=1, u_size=1, q_v=[1.0], q_u_given_sv=[[[1.0], [1.0]]], phi=[[1]])
        j = build_joint(asymmetric_channel, pol)
        expected = asymmetric_channel.q_s[:, None] * asymmetric_channel.w[1]
        np.testing.assert_allclose(j.p[0, 0, :, 1, :], expected)
        assert j.p[0, 0, :, 0, :].sum() == 0.0

    def test_copy_of_state(self, asymmetric_channel):
        pol = AuxiliaryPolicy(v_size=1, u_size=2, q_v=[1.0], q_u_given_sv=[np.eye(2)], phi=[[0, 1]])
        j = build_joint(asymmetric_channel, pol)
        assert j.p[0, 0, 1].sum() == 0.0
        assert j.p[0, 1, 0].sum() == 0.0
        assert abs(j.p.sum() - 1.0) < 1e-10

    def test_dimension_mismatch(self, asymmetric_channel):
        pol = AuxiliaryPolicy(v_size=1, u_size=1, q_v=[1.0], q_u_given_sv=[[[1.0]] * 3], phi=[[0]])
        with pytest.raises(DimensionMismatchError):
            build_joint(asymmetric_channel, pol)
        pol = AuxiliaryPolicy(v_size=1, u_size=1, q_v=[1.0], q_u_given_sv=[[[1.0], [1.0]]], phi=[[2]])
        with pytest.raises(DimensionMismatchError):
            build_joint(asymmetric_channel, pol)

    def test_independent_auxiliary(self, asymmetric_channel):
        pol = AuxiliaryPolicy(
            v_size=1, u_size=2, q_v=[1.0], q_u_given_sv=[[[0.3, 0.7], [0.3, 0.7]]], phi=[[0, 0]]
        )
        pair = mi_pair(build_joint(asymmetric_channel, pol))
        assert pair.i_uy_given_v == pytest.approx(0.0, abs=1e-12)
        assert pair.i_us_given_v == pytest.approx(0.0, abs=1e-12)

    def test_perfect_correlation(self):
        ch = validate_channel({
            "x_size": 2, "s_size": 2, "y_size": 2, "q_s": [0.5, 0.5],
            "w": [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]],
        })
        pol = AuxiliaryPolicy(v_size=1, u_size=2, q_v=[1.0], q_u_given_sv=[np.eye(2)], phi=[[0, 0]])
        pair = mi_pair(build_joint(ch, pol))
        assert pair.i_uy_given_v == pytest.approx(1.0)
        assert pair.i_us_given_v == pytest.approx(1.0)

    def test_mod2_uniform_input(self, mod2_biased_channel):
        pol = AuxiliaryPolicy(
            v_size=1, u_size=2, q_v=[1.0], q_u_given_sv=[[[0.5, 0.5], [0.5, 0.5]]], phi=[[0, 1]]
        )
        pair = mi_pair(build_joint(mod2_biased_channel, pol))
        assert pair.i_uy_given_v == pytest.approx(1.0 - entropy([0.89, 0.11]), abs=1e-9)
        assert pair.i_us_given_v == pytest.approx(0.0, abs=1e-12)

    def test_random_properties(self):
        for seed in range(20):
            ch = random_channel(seed)
            pol = _random_policy(self.rng, v_size=2, u_size=2, s_size=2, x_size=2)
            j = build_joint(ch, pol)
            pair = mi_pair(j)
            assert pair.i_uy_given_v >= -1e-12
            assert pair.i_us_given_v <= min(entropy(ch.q_s), 1.0) + 1e-12
            assert pair.i_uy_given_v <= 1.0 + 1e-12
            p_vs = j.p.sum(axis=(1, 3, 4))
            np.testing.assert_allclose(p_vs, np.outer(pol.q_v, ch.q_s), atol=1e-10)

    def test_matches_naive_definition(self):
        for seed in range(5):
            ch = random_channel(100 + seed)
            pol = _random_policy(self.rng, v_size=2, u_size=2, s_size=2, x_size=2)
            j = build_joint(ch, pol)
            pair = mi_pair(j)
            assert pair.i_uy_given_v == pytest.approx(_naive_cmi(j.p, 1, 4), abs=1e-10)
            assert pair.i_us_given_v == pytest.approx(_naive_cmi(j.p, 1, 2), abs=1e-10)

    def test_joint_rejects_off_support_mass(self):
        p = np.zeros((1, 1, 1, 2, 1))
        p[0, 0, 0, 1, 0] = 1.0
        with pytest.raises(ValueError):
            JointDistribution(p=p, phi=[[0]])


class TestBlahutArimoto:
    """Capacidade por estado e linha de base oblívia"""

    def test_bsc(self):
        p = 0.11
        value, r = blahut_arimoto(np.array([[1 - p, p], [p, 1 - p]]))
        h = -xlogy(p, p) / np.log(2) - xlogy(1 - p, 1 - p) / np.log(2)
        assert value == pytest.approx(1.0 - h, abs=1e-9)
        np.testing.assert_allclose(r, [0.5, 0.5], atol=1e-6)

    def test_noiseless_baseline(self):
        ch = validate_channel({
            "x_size": 2, "s_size": 2, "y_size": 2, "q_s": [0.3, 0.7],
            "w": [[[1.0, 0.0], [1.0, 0.0]], [[0.0, 1.0], [0.0, 1.0]]],
        })
        assert oblivious_baseline(ch) == pytest.approx(1.0, abs=1e-9)

    def test_useless_baseline(self, useless_channel):
        assert oblivious_baseline(useless_channel) == pytest.approx(0.0, abs=1e-9)

    def test_mod2_baseline(self):
        ch = validate_channel(mod_additive_raw([0.89, 0.11]))
        assert oblivious_baseline(ch) == pytest.approx(1.0, abs=1e-9)

    def test_nearly_identical_rows(self):
        w = np.array([[0.4752, 0.5248], [0.4678, 0.5322]])
        value, r = blahut_arimoto(w)

        t = np.linspace(0.0, 1.0, 200001)[:, None]
        q_y = t * w[0] + (1.0 - t) * w[1]
        d0 = (xlogy(w[0], w[0]) - xlogy(w[0], q_y)).sum(axis=1)
        d1 = (xlogy(w[1], w[1]) - xlogy(w[1], q_y)).sum(axis=1)
        grid_max = float(np.max(t[:, 0] * d0 + (1.0 - t[:, 0]) * d1) / np.log(2))

        assert value == pytest.approx(grid_max, abs=2e-9)
        assert r.sum() == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", [2, 5])
    def test_random_channels_converge(self, seed):
        ch = random_channel(seed)
        baseline = oblivious_baseline(ch)
        assert 0.0 <= baseline <= 1.0
        for s in range(ch.s_size):
            blahut_arimoto(ch.w[:, s, :])

    def test_iteration_cap(self):
        z_channel = np.array([[1.0, 0.0], [0.5, 0.5]])
        with pytest.raises(ConvergenceFailureError):
            blahut_arimoto(z_channel, max_iters=1)
        value, r = blahut_arimoto(z_channel, max_iters=1, strict=False)
        assert 0.0 < value < 1.0
        assert r.sum() == pytest.approx(1.0)
