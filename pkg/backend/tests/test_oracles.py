"""
Testes dos oráculos de forma fechada
"""

import numpy as np
import pytest

from app.schemas import OracleCase
from app.services.channel import validate_channel
from app.services.information import entropy, oblivious_baseline, oblivious_policy
from app.services.oracles import (
    detect_mod_additive, detect_special_cases, detect_useless, large_help_lower_bound,
    mod_additive_capacity, oblivious_oracle, useless_capacity, xs_y_split
)
from app.utils.errors import NotModAdditiveError, RhTooSmallError
from tests.conftest import mod_additive_raw, random_channel


class TestDetection:
    """Detecção dos casos especiais"""

    def test_useless(self, useless_channel, mod2_channel):
        assert detect_useless(useless_channel)
        assert not detect_useless(mod2_channel)

    def test_mod_additive_binary(self, mod2_channel):
        detection = detect_mod_additive(mod2_channel)
        assert detection.detected
        assert detection.alphabet_size == 2
        assert detection.output_map == [[0, 1], [1, 0]]

    def test_mod_additive_ternary(self):
        ch = validate_channel(mod_additive_raw([0.7, 0.2, 0.1]))
        assert detect_mod_additive(ch).detected

    def test_transposed_table_is_rejected(self):
        raw = mod_additive_raw([0.5, 0.5, 0.0])
        w = np.array(raw["w"])
        # Y = X − S (mod 3) não é a soma módulo 3
        for x in range(3):
            for s in range(3):
                w[x, s] = np.eye(3)[(x - s) % 3]
        raw["w"] = w.tolist()
        detection = detect_mod_additive(validate_channel(raw))
        assert not detection.detected
        assert detection.output_map is not None
        assert detection.first_mismatch == [0, 1]

    def test_non_square(self, useless_channel):
        assert not detect_mod_additive(useless_channel).detected


class TestClosedForms:
    """Valores analíticos"""

    def test_useless_capacity(self):
        value = useless_capacity(0.4)
        assert value.value == 0.4
        assert value.case_name == OracleCase.USELESS

    @pytest.mark.parametrize("q_s,rh,expected", [
        ([0.5, 0.5], 0.3, 0.3),
        ([0.89, 0.11], 0.3, 0.800084),
        ([1 / 3, 1 / 3, 1 / 3], 0.0, 0.0),
    ])
    def test_mod_additive_capacity(self, q_s, rh, expected):
        ch = validate_channel(mod_additive_raw(q_s))
        assert mod_additive_capacity(ch, rh).value == pytest.approx(expected, abs=1e-6)

    def test_mod_additive_requires_structure(self, asymmetric_channel):
        with pytest.raises(NotModAdditiveError):
            mod_additive_capacity(asymmetric_channel, 0.3)

    def test_oblivious_oracle(self, mod2_channel):
        value = oblivious_oracle(mod2_channel)
        assert value.case_name == OracleCase.OBLIVIOUS
        assert value.value == pytest.approx(1.0, abs=1e-9)


class TestLargeHelp:
    """Limitante para Rh ≥ H(S)"""

    def test_rh_too_small(self, asymmetric_channel):
        with pytest.raises(RhTooSmallError):
            large_help_lower_bound(asymmetric_channel, 0.1)

    def test_chain_of_bounds(self):
        for seed in range(10):
            ch = random_channel(300 + seed)
            rh = entropy(ch.q_s) + 0.2
            value = large_help_lower_bound(ch, rh, max_iters=500)
            weaker = oblivious_baseline(ch) + rh - entropy(ch.q_s)
            assert value.is_bound
            assert value.weaker_bound == pytest.approx(weaker)
            assert value.value >= weaker - 1e-9

    def test_xs_y_identity(self):
        rng = np.random.default_rng(4)
        for seed in range(10):
            ch = random_channel(400 + seed, x_size=3, s_size=2, y_size=3)
            q_x_given_s = rng.dirichlet(np.ones(3), size=2)
            joint, split = xs_y_split(ch, q_x_given_s)
            assert joint == pytest.approx(split, abs=1e-10)
        _, q_opt = oblivious_policy(ch)
        assert q_opt.shape == (2, 3)


class TestDetectSpecialCases:
    """Coleção de oráculos aplicáveis"""

    def test_mod2(self, mod2_channel):
        cases = [v.case_name for v in detect_special_cases(mod2_channel, 0.3)]
        assert cases == [OracleCase.MOD_ADDITIVE, OracleCase.OBLIVIOUS]

    def test_useless_large_help(self, useless_channel):
        rh = entropy(useless_channel.q_s) + 0.1
        cases = [v.case_name for v in detect_special_cases(useless_channel, rh)]
        assert cases == [OracleCase.USELESS, OracleCase.LARGE_HELP_LB, OracleCase.OBLIVIOUS]
