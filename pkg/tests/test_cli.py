import json
import unittest
from pathlib import Path

from click.testing import CliRunner

from knot_mosaic.cli import EXIT_CORRUPT, EXIT_EMPTY, EXIT_INVALID, EXIT_OK, EXIT_USAGE, cli, main
from knot_mosaic.config import configure_logging
from knot_mosaic.formats import format_kmos
from knot_mosaic.knotlib import load_corpus
from knot_mosaic.mosaic import Mosaic
from knot_mosaic.render import render_ascii
from knot_mosaic.tiles import Tile

CORPUS = load_corpus()


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.runner = CliRunner()

    def tearDown(self):
        # sinks installed inside the runner point at its captured stderr
        configure_logging("WARNING")

    def invoke(self, *args):
        return self.runner.invoke(cli, ["--quiet", *args])

    def write(self, name, text):
        Path(name).write_text(text, encoding="utf-8")
        return name


class TestValidateCommand(CliTestCase):
    def test_valid_corpus_knot(self):
        result = self.invoke("validate", "corpus:granny")
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        self.assertIn("status: valid", result.output)
        self.assertIn("crossings: 6", result.output)

    def test_empty_mosaic(self):
        with self.runner.isolated_filesystem():
            path = self.write("blank.kmos", format_kmos(Mosaic.blank(3, 3)))
            result = self.invoke("validate", path)
        self.assertEqual(result.exit_code, EXIT_EMPTY)
        self.assertIn("status: empty", result.output)

    def test_invalid_mosaic(self):
        m = Mosaic.blank(3, 3).replace({(1, 1): Tile.M2})
        with self.runner.isolated_filesystem():
            path = self.write("arc.kmos", format_kmos(m))
            result = self.invoke("validate", "--json", path)
        self.assertEqual(result.exit_code, EXIT_INVALID)
        self.assertIn("violation: rule i at (1, 1):S", result.output)
        self.assertIn('"status": "invalid"', result.output)

    def test_missing_file(self):
        with self.runner.isolated_filesystem():
            result = self.invoke("validate", "nowhere.kmos")
        self.assertEqual(result.exit_code, EXIT_INVALID)
        self.assertIn("nowhere.kmos", result.output)

    def test_parse_error_has_position(self):
        with self.runner.isolated_filesystem():
            path = self.write("bad.kmos", "KMOS v1 1 1\nq7\n")
            result = self.invoke("validate", path)
        self.assertEqual(result.exit_code, EXIT_INVALID)
        self.assertIn("bad.kmos:2:1:", result.output)

    def test_unknown_corpus_id(self):
        result = self.invoke("validate", "corpus:8_17")
        self.assertEqual(result.exit_code, EXIT_INVALID)


class TestCodecCommands(CliTestCase):
    def test_encode_decode_roundtrip(self):
        for entry in CORPUS:
            n = entry.mosaic.rows
            with self.runner.isolated_filesystem():
                encoded = self.invoke("encode", f"corpus:{entry.id}")
                self.assertEqual(encoded.exit_code, EXIT_OK, entry.id)
                self.assertEqual(len(encoded.output.strip()), 4 * n * n)
                path = self.write("knot.bits", encoded.output)
                decoded = self.invoke("decode", path, "--n", str(n))
            self.assertEqual(decoded.exit_code, EXIT_OK, decoded.output)
            self.assertEqual(decoded.output, format_kmos(entry.mosaic), entry.id)

    def test_hex_roundtrip(self):
        with self.runner.isolated_filesystem():
            encoded = self.invoke("--format", "hex", "encode", "corpus:granny")
            self.assertTrue(encoded.output.startswith("KMOSBITS v1 n=6\n"))
            path = self.write("granny.bits", encoded.output)
            decoded = self.invoke("decode", path)
        self.assertEqual(decoded.exit_code, EXIT_OK, decoded.output)
        self.assertEqual(decoded.output, format_kmos(CORPUS.lookup("granny").mosaic))

    def test_corrupt_bits(self):
        with self.runner.isolated_filesystem():
            path = self.write("bad.bits", "1110\n")
            result = self.invoke("decode", path, "--n", "1")
        self.assertEqual(result.exit_code, EXIT_CORRUPT)
        self.assertIn("corrupt word 1110 at position 0 cell (0, 0)", result.output)

    def test_length_mismatch(self):
        with self.runner.isolated_filesystem():
            path = self.write("short.bits", "1000\n")
            result = self.invoke("decode", path, "--n", "2")
        self.assertEqual(result.exit_code, EXIT_INVALID)

    def test_raw_bits_need_a_size(self):
        with self.runner.isolated_filesystem():
            path = self.write("raw.bits", "1000\n")
            result = self.invoke("decode", path)
        self.assertEqual(result.exit_code, EXIT_USAGE)

    def test_usage_errors(self):
        self.assertEqual(self.invoke("encode").exit_code, EXIT_USAGE)
        self.assertEqual(self.invoke("frobnicate").exit_code, EXIT_USAGE)
        result = self.invoke("--format", "oct", "encode", "corpus:3_1")
        self.assertEqual(result.exit_code, EXIT_USAGE)


class TestKnotCommands(CliTestCase):
    def test_dt(self):
        result = self.invoke("dt", "corpus:5_1")
        self.assertEqual(result.exit_code, EXIT_OK)
        self.assertEqual(result.output, "6,8,10,2,4\n")
        raw = self.invoke("dt", "--raw", "corpus:3_1")
        self.assertEqual(raw.output, "4,6,2\n")

    def test_dt_needs_a_knot(self):
        with self.runner.isolated_filesystem():
            path = self.write("blank.kmos", format_kmos(Mosaic.blank(2, 2)))
            result = self.invoke("dt", path)
        self.assertEqual(result.exit_code, EXIT_INVALID)

    def test_compose(self):
        result = self.invoke("compose", "corpus:3_1", "corpus:3_1m")
        self.assertEqual(result.exit_code, EXIT_OK)
        self.assertEqual(result.output, format_kmos(CORPUS.lookup("granny").mosaic))
        unpadded = self.invoke("compose", "--no-pad", "corpus:3_1", "corpus:3_1m")
        self.assertTrue(unpadded.output.startswith("KMOS v1 4 6\n"))

    def test_mutate(self):
        result = self.invoke("mutate", "corpus:granny", "--region", "0,1,4,2")
        self.assertEqual(result.exit_code, EXIT_OK)
        self.assertIn("m3 m1 m4 m6 m1 m2", result.output)

    def test_mutate_rejections(self):
        asymmetric = self.invoke("mutate", "corpus:3_1", "--region", "0,1,2,2")
        self.assertEqual(asymmetric.exit_code, EXIT_INVALID)
        self.assertEqual(self.invoke("mutate", "corpus:3_1", "--region", "x").exit_code, EXIT_USAGE)

    def test_render(self):
        result = self.invoke("render", "corpus:3_1")
        self.assertEqual(result.output, render_ascii(CORPUS.lookup("3_1").mosaic))
        svg = self.invoke("render", "--svg", "corpus:3_1")
        self.assertTrue(svg.output.startswith("<svg"))

    def test_corpus_check(self):
        result = self.invoke("corpus-check")
        self.assertEqual(result.exit_code, EXIT_OK)
        self.assertIn("granny\tchi=6\tdt=4,6,2,-10,-12,-8", result.output)

    def test_dt_strip(self):
        result = self.invoke("dt-strip", "4,6,2,-10,-12,-8", "4,6,2")
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        self.assertEqual(result.output, "4,6,2\n")
        mismatch = self.invoke("dt-strip", "4,6,2,10,12,8", "6,2,4")
        self.assertEqual(mismatch.exit_code, EXIT_INVALID)
        self.assertIn("does not end with 12,8,10", mismatch.output)
        self.assertEqual(self.invoke("dt-strip", "4,6,6", "4,6,2").exit_code, EXIT_INVALID)


class TestProtocolCommands(CliTestCase):
    def test_protocol_demo(self):
        result = self.invoke("protocol-demo", "--message", "hi", "--seed", "1")
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        self.assertIn("NOT secure", result.output)
        self.assertIn("KMOSCT v1 blocks=8", result.output)
        self.assertTrue(result.output.endswith("message hi\n"))

    def test_protocol_demo_with_a_flip(self):
        result = self.invoke("protocol-demo", "--message", "hi", "--seed", "1", "--flip", "0")
        self.assertEqual(result.exit_code, EXIT_CORRUPT)
        self.assertIn("tamper detected", result.output)

    def encrypt(self, message):
        result = self.invoke("--format", "bin", "encrypt", "--message", message,
                             "--session-out", "session.json", "--seed", "5")
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        return self.write("message.kmct", result.output)

    def test_encrypt_then_decrypt(self):
        with self.runner.isolated_filesystem():
            path = self.encrypt("knots")
            header = Path(path).read_text(encoding="utf-8").splitlines()[0]
            self.assertEqual(header, "KMOSCT v1 blocks=20")
            result = self.invoke("decrypt", path, "--session", "session.json")
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        self.assertEqual(result.output, "knots\n")

    def test_decrypt_under_another_session(self):
        with self.runner.isolated_filesystem():
            path = self.encrypt("hi")
            drawn = json.loads(Path("session.json").read_text(encoding="utf-8"))
            other = "5_1" if drawn["knot_ids"][0] == "3_1" else "3_1"
            self.write("other.json", json.dumps({"knot_ids": [other], "mutations": [None]}))
            result = self.invoke("decrypt", path, "--session", "other.json")
        self.assertEqual(result.exit_code, EXIT_CORRUPT, result.output)

    def test_decrypt_flipped_ciphertext(self):
        with self.runner.isolated_filesystem():
            path = self.encrypt("hi")
            lines = Path(path).read_text(encoding="utf-8").splitlines()
            lines[2] = ("1" if lines[2][0] == "0" else "0") + lines[2][1:]
            self.write(path, "\n".join(lines) + "\n")
            result = self.invoke("decrypt", path, "--session", "session.json")
        self.assertEqual(result.exit_code, EXIT_CORRUPT)
        self.assertIn("tamper detected", result.output)

    def test_decrypt_input_errors(self):
        with self.runner.isolated_filesystem():
            path = self.encrypt("hi")
            self.write("broken.json", "{\"knot_ids\": [\"3_1\"]}")
            self.assertEqual(
                self.invoke("decrypt", path, "--session", "broken.json").exit_code, EXIT_INVALID
            )
            self.write("garbled.kmct", "KMOSCT v1 blocks=2\n")
            self.assertEqual(
                self.invoke("decrypt", "garbled.kmct", "--session", "session.json").exit_code,
                EXIT_INVALID,
            )

    def test_single_flip_channel(self):
        result = self.invoke("channel-test", "--single-flip", "--message", "k", "--json")
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        self.assertIn('"undetected_miss": 0', result.output)

    def test_noisy_channel_table(self):
        result = self.invoke("channel-test", "--p", "0.01", "--trials", "2", "--message", "k")
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        self.assertIn("delivered_clean", result.output)


class TestMain(unittest.TestCase):
    def tearDown(self):
        configure_logging("WARNING")

    def test_main_returns_exit_codes(self):
        self.assertEqual(main(["--quiet", "--bogus"]), EXIT_USAGE)
        self.assertEqual(main(["--quiet", "dt", "corpus:3_1"]), EXIT_OK)


if __name__ == "__main__":
    unittest.main()
