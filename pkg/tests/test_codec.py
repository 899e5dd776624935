import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from knot_mosaic.codec import (
    B_CODEWORDS,
    DECODING,
    ENCODING,
    INVALID_WORDS,
    M_CODEWORDS,
    BitString,
    Codeword,
    DecodeReport,
    DetectedCorruption,
    InvalidSize,
    LengthMismatch,
    NotSquare,
    decode_mosaic,
    decode_word,
    distance_matrix,
    encode_mosaic,
    encode_tile,
    hamming,
    minimum_distance,
    reed_muller_codewords,
    reed_muller_generator,
    spiral_order,
)
from knot_mosaic.mosaic import Mosaic
from knot_mosaic.tiles import BLANKS, KNOT_TILES, Tile


class TestCodeTables(unittest.TestCase):
    def test_table_values(self):
        self.assertEqual(str(encode_tile(Tile.M1)), "0000")
        self.assertEqual(str(encode_tile(Tile.M4)), "1111")
        self.assertEqual(str(encode_tile(Tile.M6)), "0110")
        self.assertEqual(str(encode_tile(Tile.B1)), "1000")
        self.assertEqual(str(encode_tile(Tile.B4)), "0001")
        self.assertEqual(len(DECODING), 12)

    def test_four_words_are_invalid(self):
        self.assertEqual(len(INVALID_WORDS), 4)
        self.assertTrue(all(word.weight == 3 for word in INVALID_WORDS))
        corruption = decode_word(Codeword.parse("1110"))
        self.assertIsInstance(corruption, DetectedCorruption)

    def test_knot_words_are_first_order_reed_muller(self):
        self.assertEqual(M_CODEWORDS, reed_muller_codewords(1, 2))
        self.assertEqual(len(reed_muller_generator(1, 2)), 3)
        self.assertTrue(all(word.weight % 2 == 0 for word in M_CODEWORDS))
        self.assertTrue(all(word.weight == 1 for word in B_CODEWORDS))

    def test_distances(self):
        matrix = distance_matrix()
        self.assertEqual(minimum_distance(KNOT_TILES), 2)
        self.assertEqual(minimum_distance(BLANKS), 2)
        far = {
            frozenset(pair)
            for pair, d in matrix.items()
            if d == 4
        }
        expected = {
            frozenset({Tile.M1, Tile.M4}),
            frozenset({Tile.M2, Tile.M3}),
            frozenset({Tile.M5, Tile.M8}),
            frozenset({Tile.M6, Tile.M7}),
        }
        self.assertEqual(far, expected)
        for m in KNOT_TILES:
            for b in BLANKS:
                self.assertIn(matrix[(m, b)], (1, 3))
        for a in Tile:
            self.assertEqual(matrix[(a, a)], 0)

    def test_hamming(self):
        self.assertEqual(hamming(Codeword.parse("0101"), Codeword.parse("0110")), 2)

    def test_codeword_rejects_bad_text(self):
        with self.assertRaises(ValueError):
            Codeword.parse("012")


class TestSpiralOrder(unittest.TestCase):
    def test_small_grids(self):
        self.assertEqual(spiral_order(1), ((0, 0),))
        self.assertEqual(spiral_order(2), ((0, 0), (0, 1), (1, 1), (1, 0)))
        self.assertEqual(spiral_order(3)[:3], ((1, 1), (1, 2), (2, 2)))
        self.assertEqual(spiral_order(3)[-1], (0, 2))

    def test_invalid_size(self):
        with self.assertRaises(InvalidSize):
            spiral_order(0)

    @given(st.integers(min_value=1, max_value=12))
    def test_spiral_is_a_walk_over_every_cell(self, n):
        order = spiral_order(n)
        self.assertEqual(len(order), n * n)
        self.assertEqual(set(order), {(r, c) for r in range(n) for c in range(n)})
        for (r1, c1), (r2, c2) in zip(order, order[1:]):
            self.assertEqual(abs(r1 - r2) + abs(c1 - c2), 1)
        self.assertIn(order[-1], {(0, 0), (0, n - 1), (n - 1, 0), (n - 1, n - 1)})


mosaics = st.integers(min_value=1, max_value=6).flatmap(
    lambda n: st.lists(
        st.lists(st.sampled_from(list(Tile)), min_size=n, max_size=n),
        min_size=n,
        max_size=n,
    )
).map(Mosaic.from_rows)


class TestMosaicSerialization(unittest.TestCase):
    def test_single_blank(self):
        self.assertEqual(encode_mosaic(Mosaic.from_rows([["b1"]])).to_text(), "1000")

    def test_length(self):
        self.assertEqual(len(encode_mosaic(Mosaic.blank(6, 6))), 144)

    def test_rectangles_are_refused(self):
        with self.assertRaises(NotSquare):
            encode_mosaic(Mosaic.blank(2, 3))

    def test_length_mismatch(self):
        with self.assertRaises(LengthMismatch):
            decode_mosaic(BitString.from_text("1000" * 3), 2)

    def test_spiral_placement(self):
        m = Mosaic.from_rows([["m1", "m4"], ["m6", "m7"]])
        self.assertEqual(encode_mosaic(m).to_text(), "0000" "1111" "1001" "0110")

    def test_corrupt_word_is_reported_with_its_cell(self):
        m = Mosaic.from_rows([["m3", "m2"], ["m5", "m8"]])
        bits = encode_mosaic(m)
        # position 2 is the lower-right m8, 1100 -> 1110
        report = decode_mosaic(bits.flip(2 * 4 + 2), 2)
        self.assertIsInstance(report, DecodeReport)
        self.assertEqual(report.positions, (2,))
        self.assertEqual(report.cells, ((1, 1),))
        self.assertEqual(report.to_dict()["words"], ["1110"])

    def test_single_flip_of_a_knot_word_never_yields_a_knot_word(self):
        for tile in KNOT_TILES:
            for position in range(4):
                bits = BitString.from_words([ENCODING[tile]]).flip(position)
                decoded = decode_word(next(bits.words()))
                self.assertFalse(isinstance(decoded, Tile) and decoded.is_knot_tile)

    @settings(max_examples=50)
    @given(mosaics)
    def test_decode_inverts_encode(self, m):
        self.assertEqual(decode_mosaic(encode_mosaic(m), m.rows), m)


if __name__ == "__main__":
    unittest.main()
