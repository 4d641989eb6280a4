import random
from itertools import combinations

import pytest

from hopshare.exceptions import (
    BadThreshold, DuplicateShareIndex, EmptyMessage, InsufficientShares, LengthMismatch, NotAByte, SharingError,
    ZeroInverse,
)
from hopshare.gfshare import (
    FieldElement, SharePoint, ShareStream, field_inverse, lagrange_weights_at_zero, reconstruct_byte,
    reconstruct_message, share_byte, share_message,
)
from tests.reference import evaluate


def _points(*pairs):
    return [SharePoint(FieldElement(x), FieldElement(y)) for x, y in pairs]


class TestFieldElement:

    @pytest.mark.parametrize('a, expected', [(1, 1), (2, 129), (256, 256)])
    def test_inverse(self, a, expected):
        assert field_inverse(FieldElement(a)) == FieldElement(expected)
        assert [b for b in range(1, 257) if a * b % 257 == 1] == [expected]

    def test_every_nonzero_element_has_an_inverse(self):
        for a in range(1, 257):
            assert (FieldElement(a) * FieldElement(a).inverse()).value == 1

    def test_zero_has_no_inverse(self):
        with pytest.raises(ZeroInverse):
            field_inverse(FieldElement(0))
        with pytest.raises(ZeroInverse):
            FieldElement(5) / 0

    def test_arithmetic_wraps(self):
        assert (FieldElement(200) + 100).value == 43
        assert (FieldElement(3) - 5).value == 255
        assert (FieldElement(256) * 256).value == 1
        assert (-FieldElement(1)).value == 256
        assert (FieldElement(1) / 2).value == 129

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            FieldElement(257)


class TestShareByte:

    @pytest.mark.parametrize('secret, n, k, coeffs, expected', [
        (42, 3, 1, [], [(1, 42), (2, 42), (3, 42)]),
        (42, 3, 2, [7], [(1, 49), (2, 56), (3, 63)]),
        (200, 2, 2, [100], [(1, 43), (2, 143)]),
    ])
    def test_known_points(self, secret, n, k, coeffs, expected):
        points = share_byte(secret, n, k, coeffs)
        assert [(p.x.value, p.y.value) for p in points] == expected

    def test_matches_polynomial_oracle(self):
        rng = random.Random(4)
        for _ in range(200):
            k = rng.randint(1, 8)
            n = rng.randint(k, 12)
            secret = rng.randrange(256)
            coeffs = [rng.randrange(257) for _ in range(k - 1)]
            points = share_byte(secret, n, k, coeffs)
            assert [p.y.value for p in points] == [evaluate(secret, coeffs, x) for x in range(1, n + 1)]

    @pytest.mark.parametrize('n, k', [(3, 0), (2, 3), (257, 2)])
    def test_bad_threshold(self, n, k):
        with pytest.raises(BadThreshold):
            share_byte(1, n, k, [0] * max(k - 1, 0))

    def test_wrong_coefficient_count(self):
        with pytest.raises(BadThreshold):
            share_byte(1, 3, 2, [1, 2])

    def test_share_index_zero_rejected(self):
        with pytest.raises(SharingError):
            SharePoint(FieldElement(0), FieldElement(1))


class TestReconstructByte:

    @pytest.mark.parametrize('pairs, k', [
        ([(1, 42)], 1),
        ([(1, 49), (3, 63)], 2),
        ([(2, 56), (3, 63)], 2),
    ])
    def test_known_points(self, pairs, k):
        assert reconstruct_byte(_points(*pairs), k) == 42

    def test_every_subset_reconstructs(self):
        points = share_byte(123, 6, 4, [17, 250, 3])
        for subset in combinations(points, 4):
            assert reconstruct_byte(list(subset), 4) == 123

    def test_duplicate_x_does_not_count(self):
        with pytest.raises(InsufficientShares):
            reconstruct_byte(_points((1, 49), (1, 49)), 2)

    def test_not_a_byte(self):
        with pytest.raises(NotAByte):
            reconstruct_byte(_points((1, 256)), 1)

    def test_weights_sum_to_one(self):
        # f = 1 is reproduced by any weight set
        assert sum(lagrange_weights_at_zero([1, 4, 9, 200])) % 257 == 1


class TestShareMessage:

    def test_degenerate(self):
        streams = share_message(bytes([42]), 1, 1, random.Random(0))
        assert streams == [ShareStream(x=1, values=(42,))]
        assert reconstruct_message(streams, 1) == bytes([42])

    def test_scripted_rng(self, mocker):
        rng = mocker.Mock(spec=random.Random)
        rng.randrange.side_effect = [7, 100]
        streams = share_message(bytes([42, 200]), 3, 2, rng)
        assert streams[0].values == (49, 43)
        assert streams[1].values == (56, 143)

    def test_empty(self):
        with pytest.raises(EmptyMessage):
            share_message(b'', 3, 2, random.Random(0))

    def test_round_trip_random_cases(self):
        rng = random.Random(1000)
        for _ in range(1000):
            k = rng.randint(1, 8)
            n = rng.randint(k, 8)
            msg = bytes(rng.randrange(256) for _ in range(rng.randint(1, 64)))
            streams = share_message(msg, n, k, rng)
            chosen = rng.sample(streams, k)
            assert reconstruct_message(chosen, k) == msg

    def test_every_k_subset_reconstructs(self):
        rng = random.Random(7)
        msg = bytes(range(256))
        for n in range(1, 7):
            for k in range(1, n + 1):
                streams = share_message(msg, n, k, rng)
                for subset in combinations(streams, k):
                    assert reconstruct_message(list(subset), k) == msg

    def test_single_share_is_uniform_over_candidates(self):
        # k=2: for a fixed share (x, y) every candidate secret is explained by exactly one slope
        x, y = FieldElement(1), FieldElement(77)
        counts = [
            sum(1 for a in range(257) if FieldElement(s) + FieldElement(a) * x == y)
            for s in range(257)
        ]
        assert counts == [1] * 257


class TestReconstructMessage:

    def test_too_few(self):
        streams = share_message(b'secret', 5, 3, random.Random(2))
        with pytest.raises(InsufficientShares):
            reconstruct_message(streams[:2], 3)

    def test_duplicate_index(self):
        streams = share_message(b'secret', 5, 3, random.Random(2))
        with pytest.raises(DuplicateShareIndex):
            reconstruct_message([streams[0], streams[0], streams[1]], 3)

    def test_length_mismatch(self):
        a = ShareStream(x=1, values=(1, 2))
        b = ShareStream(x=2, values=(1,))
        with pytest.raises(LengthMismatch):
            reconstruct_message([a, b], 2)

    def test_corrupted_shares_raise_rather_than_return(self):
        with pytest.raises(NotAByte):
            reconstruct_message([ShareStream(x=1, values=(256,))], 1)


class TestShareStream:

    def test_serialize_layout(self):
        stream = ShareStream(x=3, values=(1, 256))
        assert stream.serialize() == bytes([3, 0, 0, 0, 2, 0, 1, 1, 0])
        assert ShareStream.deserialize(stream.serialize()) == stream

    def test_index_256_wraps_to_zero_byte(self):
        stream = ShareStream(x=256, values=(5,))
        assert stream.serialize()[0] == 0
        assert ShareStream.deserialize(stream.serialize()).x == 256

    def test_truncated_dump(self):
        with pytest.raises(LengthMismatch):
            ShareStream.deserialize(bytes([1, 0, 0, 0, 2, 0, 1]))

    def test_index_range(self):
        with pytest.raises(SharingError):
            ShareStream(x=0, values=())
