import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landauer_ann.entropy import (
    Distribution,
    JointDistribution,
    PhysicalConstants,
    QuantizationError,
    QuantizationScheme,
    conditional_entropy,
    decode_symbol,
    dequantize,
    entropy,
    landauer_energy,
    quantize,
    quantize_batch,
)
from oracles import conditional_entropy_by_groups

pairs_strategy = st.lists(st.tuples(st.integers(0, 5), st.integers(0, 3)), min_size=1, max_size=60)


class TestQuantize:
    def test_identity_is_injective(self):
        a = quantize([0, 1, 0, 0, 0, 0, 0, 0, 0], QuantizationScheme.identity())
        b = quantize([1, 0, 0, 0, 0, 0, 0, 0, 0], QuantizationScheme.identity())
        assert a != b
        assert a == quantize([0.0, 1.0, 0, 0, 0, 0, 0, 0, 0], QuantizationScheme.identity())

    def test_identity_rejects_gray_values(self):
        with pytest.raises(QuantizationError):
            quantize([0.5] * 9, QuantizationScheme.identity())

    def test_upper_edge_clamped_into_last_bin(self):
        s = QuantizationScheme.uniform(16, 0.0, 1.0)
        assert quantize([1.0], s) == (15,)
        assert quantize([0.0], s) == (0,)
        assert quantize([-0.2, 1.7], s) == (0, 15)

    def test_bin_formula(self):
        s = QuantizationScheme.uniform(4, -1.0, 1.0)
        assert quantize([-0.99, -0.5, 0.0, 0.49, 0.5], s) == (0, 1, 2, 2, 3)

    def test_threshold(self):
        s = QuantizationScheme.binary_threshold()
        assert quantize([0.49999, 0.5, 0.9], s) == (0, 1, 1)

    def test_round_trip_12_dims(self):
        rng = np.random.default_rng(0)
        indices = rng.integers(0, 16, size=12)
        ranges = (np.zeros(12), np.full(12, 16.0))
        vector = indices + 0.5  # cell centres on a unit grid
        sym = quantize(vector, QuantizationScheme.uniform(16), ranges)
        assert decode_symbol(sym) == indices.tolist()

    def test_observed_ranges_per_dimension(self):
        x = np.array([[0.0, 10.0], [1.0, 30.0], [0.5, 20.0]])
        codes = quantize_batch(x, QuantizationScheme.uniform(2))
        assert codes.tolist() == [[0, 0], [1, 1], [1, 1]]

    def test_degenerate_dimension_single_bin(self):
        x = np.array([[3.0, 0.0], [3.0, 1.0]])
        codes = quantize_batch(x, QuantizationScheme.uniform(16))
        assert codes[:, 0].tolist() == [0, 0]

    def test_non_finite_rejected(self):
        with pytest.raises(QuantizationError):
            quantize([np.nan], QuantizationScheme.uniform(4, 0, 1))

    def test_observed_single_vector_needs_ranges(self):
        with pytest.raises(QuantizationError):
            quantize([0.3], QuantizationScheme.uniform(4))

    @pytest.mark.parametrize(
        "kwargs",
        [dict(kind="uniform-bins", bins=1), dict(kind="uniform-bins", range_policy="fixed", lo=1, hi=1), dict(kind="kmeans")],
    )
    def test_invalid_schemes(self, kwargs):
        with pytest.raises(QuantizationError):
            QuantizationScheme(**kwargs)

    def test_dequantize_returns_cell_centres(self):
        s = QuantizationScheme.uniform(4, 0.0, 1.0)
        np.testing.assert_allclose(dequantize(np.array([[0, 3]]), s), [[0.125, 0.875]])
        assert dequantize(np.array([[2]]), QuantizationScheme.uniform(4), (np.array([5.0]), np.array([5.0])))[0, 0] == 5.0

    def test_scheme_dict_round_trip(self):
        s = QuantizationScheme.uniform(8, 0.0, 1.0)
        assert QuantizationScheme.from_dict(s.to_dict()) == s

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=12))
    def test_equal_vectors_equal_symbols(self, values):
        s = QuantizationScheme.uniform(16, -5.0, 5.0)
        assert quantize(values, s) == quantize(list(values), s)


class TestEntropy:
    def test_uniform_four(self):
        assert entropy(Distribution(Counter("abcd"))) == 2.0

    def test_single_symbol(self):
        assert entropy(Distribution(Counter({"a": 7}))) == 0.0

    def test_two_to_one(self):
        # -(2/3)log2(2/3) - (1/3)log2(1/3)
        assert abs(entropy(Distribution(Counter({"a": 2, "b": 1}))) - 0.918296) <= 1e-6
        assert abs(entropy(Distribution(Counter({"a": 2, "b": 1}))) - (math.log2(3) - 2 / 3)) <= 1e-9

    def test_empty_is_error(self):
        with pytest.raises(ValueError):
            entropy(Distribution())

    @given(st.lists(st.integers(1, 50), min_size=1, max_size=20), st.randoms())
    def test_permutation_invariant(self, counts, rnd):
        labels = list(range(len(counts)))
        rnd.shuffle(labels)
        a = Distribution(Counter(dict(enumerate(counts))))
        b = Distribution(Counter({labels[i]: c for i, c in enumerate(counts)}))
        assert entropy(a) == pytest.approx(entropy(b), abs=1e-12)
        assert entropy(a) >= 0


class TestConditionalEntropy:
    def test_identity_map_loses_nothing(self):
        j = JointDistribution.from_pairs((x, x) for x in range(8))
        assert conditional_entropy(j) == 0.0

    def test_relu_sign_example(self):
        pairs = [(-2, 0), (-1, 0), (1, 1)]
        j = JointDistribution.from_pairs(pairs)
        assert abs(conditional_entropy(j) - 2 / 3) <= 1e-9
        assert abs(conditional_entropy_by_groups(pairs) - 2 / 3) <= 1e-12

    def test_independent_uniform(self):
        j = JointDistribution.from_pairs((x, y) for x in range(2) for y in range(2))
        assert conditional_entropy(j) == pytest.approx(1.0, abs=1e-12)

    def test_empty_is_error(self):
        with pytest.raises(ValueError):
            conditional_entropy(JointDistribution())

    @given(pairs_strategy)
    def test_matches_grouping_oracle(self, pairs):
        assert conditional_entropy(JointDistribution.from_pairs(pairs)) == pytest.approx(
            conditional_entropy_by_groups(pairs), abs=1e-12
        )

    @given(pairs_strategy)
    def test_chain_rule_bounds(self, pairs):
        j = JointDistribution.from_pairs(pairs)
        h = conditional_entropy(j)
        assert 0.0 <= h <= entropy(j.marginal_x()) + 1e-12

    @given(st.lists(st.integers(-10, 10), min_size=1, max_size=80))
    def test_deterministic_map_identity(self, xs):
        j = JointDistribution.from_pairs((x, max(0, x) // 3) for x in xs)
        assert conditional_entropy(j) == pytest.approx(entropy(j.marginal_x()) - entropy(j.marginal_y()), abs=1e-12)

    @given(pairs_strategy)
    def test_marginals_match_independent_counts(self, pairs):
        j = JointDistribution()
        dx, dy = Distribution(), Distribution()
        for x, y in pairs:
            j.add(x, y)
            dx.add(x)
            dy.add(y)
        assert j.marginal_x().counts == dx.counts
        assert j.marginal_y().counts == dy.counts
        assert j.total == dx.total == dy.total == len(pairs)

    @settings(max_examples=30)
    @given(pairs_strategy, pairs_strategy)
    def test_merge_is_addition(self, a, b):
        merged = JointDistribution.from_pairs(a).merge(JointDistribution.from_pairs(b))
        assert merged.counts == JointDistribution.from_pairs(a + b).counts

    def test_from_codes_matches_from_pairs(self):
        rng = np.random.default_rng(0)
        x = rng.integers(0, 3, size=(200, 4))
        y = rng.integers(0, 2, size=(200, 1))
        a = JointDistribution.from_codes(x, y)
        b = JointDistribution.from_pairs((tuple(map(int, r)), tuple(map(int, s))) for r, s in zip(x, y))
        assert a.counts == b.counts


class TestLandauer:
    def test_one_bit_room_temperature(self):
        assert abs(landauer_energy(1.0, PhysicalConstants(temperature=300)) - 2.87098e-21) <= 1e-25

    def test_zero_bits(self):
        assert landauer_energy(0.0) == 0.0

    def test_reference_coefficient(self):
        assert abs(landauer_energy(2.0574) - 5.9068e-21) <= 1e-24

    def test_exact_formula(self):
        assert landauer_energy(3.0, PhysicalConstants(temperature=77)) == pytest.approx(3.0 * 1.380649e-23 * 77 * math.log(2), rel=1e-15)

    def test_negative_bits_rejected(self):
        with pytest.raises(ValueError):
            landauer_energy(-0.1)

    def test_temperature_positive(self):
        with pytest.raises(ValueError):
            PhysicalConstants(temperature=0)


def test_distribution_csv_dump():
    d = Distribution(Counter({(1, 0): 3, (0, 2): 1}))
    text = d.to_csv({"scheme": "uniform(16,observed)"})
    assert text.splitlines() == ["# scheme: uniform(16,observed)", "symbol,count", "0-2,1", "1-0,3"]
