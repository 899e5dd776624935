import unittest

from knot_mosaic.codec import BitString, encode_mosaic
from knot_mosaic.formats import (
    FORMAT_HEX,
    FormatError,
    format_bits,
    format_ciphertext,
    format_dt,
    format_kmos,
    parse_bits,
    parse_ciphertext,
    parse_dt,
    parse_kmos,
)
from knot_mosaic.mosaic import Mosaic
from knot_mosaic.trace import DTSequence

UNKNOT_TEXT = "KMOS v1 2 2\nm3 m2\nm5 m8\n"


class TestKmos(unittest.TestCase):
    def test_parse(self):
        m = parse_kmos("# a comment\n\n" + UNKNOT_TEXT)
        self.assertEqual(m, Mosaic.from_rows([["m3", "m2"], ["m5", "m8"]]))

    def test_format_is_canonical(self):
        m = parse_kmos("KMOS v1 2 2\n  m3   m2\nm5 m8")
        self.assertEqual(format_kmos(m), UNKNOT_TEXT)
        self.assertEqual(format_kmos(m, "unknot"), "# unknot\n" + UNKNOT_TEXT)

    def test_unknown_tile_position(self):
        with self.assertRaises(FormatError) as ctx:
            parse_kmos("KMOS v1 2 2\nm3 m2\nm5 m9\n", source="bad.kmos")
        self.assertEqual((ctx.exception.line, ctx.exception.column), (3, 4))
        self.assertTrue(str(ctx.exception).startswith("bad.kmos:3:4: "))

    def test_wrong_arity(self):
        with self.assertRaises(FormatError) as ctx:
            parse_kmos("KMOS v1 2 2\nm3 m2 b1\nm5 m8\n")
        self.assertEqual(ctx.exception.line, 2)

    def test_row_count(self):
        with self.assertRaises(FormatError):
            parse_kmos("KMOS v1 3 2\nm3 m2\nm5 m8\n")
        with self.assertRaises(FormatError):
            parse_kmos("KMOS v1 1 2\nm3 m2\nm5 m8\n")

    def test_header_errors(self):
        for text in ("", "KMOS v2 2 2\n", "KMOS v1 two 2\n", "KMOS v1 0 2\n"):
            with self.assertRaises(FormatError):
                parse_kmos(text)
        with self.assertRaises(FormatError) as ctx:
            parse_kmos(UNKNOT_TEXT + "KMOS v1 2 2\n")
        self.assertEqual(ctx.exception.line, 4)


class TestBits(unittest.TestCase):
    def test_binary(self):
        bits = encode_mosaic(Mosaic.from_rows([["b1"]]))
        self.assertEqual(format_bits(bits, 1), "1000\n")
        self.assertEqual(parse_bits("1000\n"), (bits, None))

    def test_hex(self):
        m = Mosaic.from_rows([["m1", "m4"], ["m6", "m7"]])
        text = format_bits(encode_mosaic(m), 2, FORMAT_HEX)
        self.assertEqual(text, "KMOSBITS v1 n=2\n0f96\n")
        bits, n = parse_bits(text)
        self.assertEqual(n, 2)
        self.assertEqual(bits, encode_mosaic(m))

    def test_bad_digits(self):
        with self.assertRaises(FormatError):
            parse_bits("10x0\n")
        with self.assertRaises(FormatError):
            parse_bits("KMOSBITS v1 n=1\nz\n")
        with self.assertRaises(FormatError):
            parse_bits("KMOSBITS v1 size=1\n8\n")
        with self.assertRaises(ValueError):
            format_bits(BitString(()), 0, "oct")

    def test_empty(self):
        self.assertEqual(parse_bits(""), (BitString(()), None))


class TestDTText(unittest.TestCase):
    def test_dt(self):
        self.assertEqual(format_dt(DTSequence((4, 6, 2))), "4,6,2")
        self.assertEqual(parse_dt("4,-6,2"), DTSequence((4, -6, 2)))
        with self.assertRaises(FormatError):
            parse_dt("4,6,6")


class TestCiphertext(unittest.TestCase):
    def setUp(self):
        self.blocks = [
            (1, BitString.from_text("1000")),
            (2, BitString.from_text("0000111110010110")),
        ]

    def test_binary_blocks(self):
        text = format_ciphertext(self.blocks)
        self.assertEqual(
            text, "KMOSCT v1 blocks=2\nn=1\n1000\nn=2\n0000111110010110\n"
        )
        self.assertEqual(parse_ciphertext(text), self.blocks)

    def test_hex_blocks(self):
        text = format_ciphertext(self.blocks, FORMAT_HEX)
        self.assertEqual(text, "KMOSCT v1 blocks=2\nn=1\n8\nn=2\n0f96\n")
        self.assertEqual(parse_ciphertext(text), self.blocks)

    def test_malformed(self):
        for text in (
            "",
            "KMOSCT v1\n",
            "KMOSCT v1 blocks=2\nn=1\n1000\n",
            "KMOSCT v1 blocks=1\nsize=1\n1000\n",
            "KMOSCT v1 blocks=1\nn=1\n10001\n",
        ):
            with self.assertRaises(FormatError, msg=text):
                parse_ciphertext(text)


if __name__ == "__main__":
    unittest.main()
