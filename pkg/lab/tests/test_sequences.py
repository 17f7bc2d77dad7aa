"""Tests for sequence families, tuple enumeration and the sum bounds."""

import pytest

from lab.src.errors import ArgumentError, CapacityError
from lab.src.sequences import (
    FrequencyTuple,
    SequenceFamily,
    build_initial_data,
    count_tuples,
    enumerate_tuples,
    family_hash,
    generate_family,
    is_resonant_configuration,
    sum_lemma_check,
    triangle_check,
    validate_family,
)


class TestGenerateFamily:
    """Tests for generate_family and validate_family."""

    def test_small_family_values(self, small_family):
        """ell = 1, M = 5, N = 4 starts at k_N = 128 with partner 261."""
        assert small_family.k_N == 128
        assert small_family.partner(4) == 261
        assert small_family.frequencies(4) == (-261, -128, 128, 261)

    def test_ell2_family_doubles_until_condition_b(self, ell2_family):
        """Condition (b) pushes k_N from 128 to 512."""
        assert ell2_family.k_N == 512
        assert ell2_family.partner(4) == 4 * 512 + 7

    def test_two_index_recursion(self, two_index_family):
        """k_(j+1) is the next power of two above 2 k_j + M."""
        assert list(two_index_family.indices) == [4, 5]
        assert two_index_family.k_seq == [512, 2048]

    @pytest.mark.parametrize(
        "fixture", ["small_family", "ell2_family", "two_index_family"]
    )
    def test_generated_families_validate(self, request, fixture):
        """Every condition holds on generated families."""
        family = request.getfixturevalue(fixture)
        results = validate_family(family)
        assert [r.name for r in results] == ["parameters", "a", "b", "c", "d", "cap"]
        assert all(r.passed for r in results), results

    def test_tampered_gamma_fails_condition_d(self, small_family):
        """A wrong amplitude is reported by condition (d)."""
        bad = small_family.model_copy(update={"gamma_seq": [1.0]})
        verdicts = {r.name: r.passed for r in validate_family(bad)}
        assert not verdicts["d"]
        assert verdicts["a"] and verdicts["b"]

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"epsilon": 0.5},
            {"epsilon": 0.0},
            {"M": 4},
            {"M": 5.5},
            {"delta": -0.1},
            {"N": 0},
            {"q": 0.5},
        ],
    )
    def test_parameter_errors(self, kwargs):
        """Out-of-range parameters raise ArgumentError."""
        params = dict(ell=1, p=1.0, q=4.0, epsilon=0.1, delta=0.0, M=5, N=4)
        params.update(kwargs)
        with pytest.raises(ArgumentError):
            generate_family(**params)

    def test_capacity(self):
        """Families needing frequencies above 2^60 raise CapacityError."""
        with pytest.raises(CapacityError):
            generate_family(1, 1.0, 4.0, 0.1, 1.0, 5, 40)

    def test_deterministic(self):
        """Generation is a pure function of the parameters."""
        a = generate_family(1, 1.0, 4.0, 0.1, 0.5, 5, 6)
        b = generate_family(1, 1.0, 4.0, 0.1, 0.5, 5, 6)
        assert a == b
        assert family_hash(a) == family_hash(b)


class TestSerialization:
    """Tests for JSON persistence and hashing."""

    def test_json_round_trip(self, two_index_family):
        """from_json(to_json(f)) reproduces the family and its hash."""
        loaded = SequenceFamily.from_json(two_index_family.to_json())
        assert loaded == two_index_family
        assert family_hash(loaded) == family_hash(two_index_family)

    def test_hash_changes_with_parameters(self, small_family):
        """Different parameters give different hashes."""
        other = generate_family(1, 1.0, 4.0, 0.1, 0.0, 7, 4)
        assert len(family_hash(small_family)) == 16
        assert family_hash(other) != family_hash(small_family)

    def test_misaligned_sequences_rejected(self, small_family):
        """k_seq must match the index range."""
        payload = small_family.model_dump()
        payload["k_seq"] = [128, 512]
        with pytest.raises(ValueError):
            SequenceFamily.model_validate(payload)


class TestInitialData:
    """Tests for build_initial_data."""

    def test_bumps_per_index(self, two_index_family):
        """Four bumps per index, Hermitian, weighted by gamma_j."""
        phi = build_initial_data(two_index_family)
        assert len(phi.pieces) == 8
        assert phi.is_hermitian()
        anchors = [piece.anchor for piece in phi.pieces[:4]]
        assert anchors == [512, -512, 1029, -1029]
        assert phi.pieces[0].weight == two_index_family.gamma(4)


class TestTuples:
    """Tests for tuple counting and enumeration."""

    def test_single_index_counts(self, small_family):
        """k = 1 gives 64 tuples: 16 same-sign and 6 with sum +-M."""
        items = list(enumerate_tuples(small_family, 1, "diagonal"))
        assert len(items) == count_tuples(small_family, 1, "diagonal") == 64
        assert sum(item.same_sign for item in items) == 16
        assert sum(item.is_exceptional(small_family.M) for item in items) == 6

    def test_ell2_exceptional_tuples(self, ell2_family):
        """On the diagonal at k = ell = 2, exactly 10 tuples sum to +-M."""
        items = list(enumerate_tuples(ell2_family, 2, "diagonal"))
        exceptional = [item for item in items if item.is_exceptional(ell2_family.M)]
        assert len(items) == 1024
        assert len(exceptional) == 10
        assert all(is_resonant_configuration(i, ell2_family) for i in exceptional)

    @pytest.mark.parametrize("mode", ["diagonal", "off_diagonal", "all"])
    def test_counts_match_enumeration(self, two_index_family, mode):
        """count_tuples agrees with the enumerator in every mode."""
        expected = count_tuples(two_index_family, 1, mode)
        assert sum(1 for _ in enumerate_tuples(two_index_family, 1, mode)) == expected
        assert count_tuples(two_index_family, 1, "all") == 8**3

    def test_lexicographic_order(self, small_family):
        """Tuples come out in ascending lexicographic order."""
        entries = [item.entries for item in enumerate_tuples(small_family, 1)]
        assert entries == sorted(entries)
        assert entries[0] == (-261, -261, -261)

    def test_invalid_order_and_mode(self, small_family):
        """k above ell and unknown modes are rejected."""
        with pytest.raises(ArgumentError):
            list(enumerate_tuples(small_family, 2))
        with pytest.raises(ArgumentError):
            list(enumerate_tuples(small_family, 1, "upper"))


class TestSumBounds:
    """Tests for triangle_check and sum_lemma_check."""

    def test_triangle_examples(self):
        """Equality cases and a not-applicable tuple."""
        tight = triangle_check((3, -1, 2))
        assert tight.applicable and tight.passed
        assert (tight.lhs, tight.rhs) == (4, 4)
        assert not triangle_check((1, 2, 3)).applicable
        assert triangle_check((5, -5, 1)).passed

    @pytest.mark.parametrize(
        "fixture,orders",
        [("small_family", (1,)), ("ell2_family", (1, 2))],
    )
    def test_single_index_exhaustive(self, request, fixture, orders):
        """Every single-index tuple satisfies every applicable bound."""
        family = request.getfixturevalue(fixture)
        for k in orders:
            for item in enumerate_tuples(family, k, "diagonal"):
                record = sum_lemma_check(family, item)
                assert record.passed, (item.entries, record.failures)

    def test_resonance_only_at_top_order(self, ell2_family):
        """No tuple of order k < ell sums to +-M."""
        items = enumerate_tuples(ell2_family, 1, "diagonal")
        assert not any(item.is_exceptional(ell2_family.M) for item in items)

    def test_mixed_counterexample(self, two_index_family):
        """(k_5, -(2 k_4 + M), -(2 k_4 + M)) sums to -2M and fails mixed_sum."""
        item = FrequencyTuple.from_pairs(((5, 2048), (4, -1029), (4, -1029)))
        assert item.total == -10
        record = sum_lemma_check(two_index_family, item)
        assert not record.exceptional
        assert record.failures == ["mixed_sum"]

    def test_strict_separation_passes(self):
        """Under strict separation every k = 1 tuple passes."""
        family = generate_family(1, 1.0, 4.0, 0.1, 0.25, 5, 4, strict_separation=True)
        assert family.k_seq == [512, 8192]
        assert all(
            sum_lemma_check(family, item).passed
            for item in enumerate_tuples(family, 1, "all")
        )

    @pytest.mark.parametrize(
        "ell,q,M,delta,k_seq",
        [
            (2, 6.0, 7, 0.25, [16384, 524288]),
            (1, 4.0, 5, 0.5, [2048, 32768, 524288]),
        ],
    )
    def test_strict_separation_exhaustive(self, ell, q, M, delta, k_seq):
        """Every tuple of every order passes every clause under strict separation."""
        family = generate_family(ell, 1.0, q, 0.1, delta, M, 4, strict_separation=True)
        assert family.k_seq == k_seq
        checked = set()
        for k in range(1, ell + 1):
            for item in enumerate_tuples(family, k, "all"):
                record = sum_lemma_check(family, item)
                assert record.passed, (item.entries, record.failures)
                checked.update(n for n, c in record.checks.items() if c.applicable)
        assert checked == {
            "single_sum",
            "single_gap",
            "resonance",
            "mixed_sum",
            "mixed_gap",
            "largest_entry",
        }
