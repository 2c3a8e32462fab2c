from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from gridforge.hashing import SplitMix64, fnv1a64, mix_seed, splitmix64

from oracles import fnv1a64_reference


class TestFnv1a64:
    def test_published_vectors(self):
        # Test vectors from the FNV reference material.
        assert fnv1a64(b"") == 0xCBF29CE484222325
        assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
        assert fnv1a64(b"foobar") == 0x85944171F73967E8

    @given(st.binary(max_size=200))
    def test_matches_reference(self, data):
        assert fnv1a64(data) == fnv1a64_reference(data)

    def test_64_bit_range(self):
        assert 0 <= fnv1a64(b"\xff" * 64) < 1 << 64


class TestSplitMix64:
    def test_published_seed_zero_stream(self):
        state = 0
        outputs = []
        for _ in range(3):
            state, value = splitmix64(state)
            outputs.append(value)
        assert outputs == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]

    def test_stream_is_deterministic(self):
        a = SplitMix64(987654321)
        b = SplitMix64(987654321)
        assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]

    @given(st.integers(0, (1 << 64) - 1), st.integers(1, 1000))
    def test_randrange_bounds(self, seed, n):
        rng = SplitMix64(seed)
        for _ in range(5):
            assert 0 <= rng.randrange(n) < n

    @given(st.integers(0, (1 << 64) - 1))
    def test_uniform_range(self, seed):
        value = SplitMix64(seed).uniform()
        assert 0.0 <= value < 1.0

    def test_shuffle_deterministic_permutation(self):
        items = list(range(12))
        SplitMix64(5).shuffle(items)
        again = list(range(12))
        SplitMix64(5).shuffle(again)
        assert items == again
        assert sorted(items) == list(range(12))

    def test_mix_seed_decorrelates_streams(self):
        values = {mix_seed(7, stream) for stream in range(64)}
        assert len(values) == 64
