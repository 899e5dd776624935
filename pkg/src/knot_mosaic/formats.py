"""Text formats: ``.kmos`` mosaics, bitstring files, DT text, ciphertext."""

from __future__ import annotations

import re
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from knot_mosaic.codec import WORD_BITS, BitString
from knot_mosaic.mosaic import Mosaic
from knot_mosaic.tiles import Tile, UnknownTileToken
from knot_mosaic.trace import DTSequence


KMOS_MAGIC = "KMOS"
BITS_MAGIC = "KMOSBITS"
CIPHERTEXT_MAGIC = "KMOSCT"
VERSION = "v1"

FORMAT_BIN = "bin"
FORMAT_HEX = "hex"
BIT_FORMATS = (FORMAT_BIN, FORMAT_HEX)

_TOKEN = re.compile(r"\S+")
_KEY_VALUE = re.compile(r"^(?P<key>[a-z]+)=(?P<value>\d+)$")


class FormatError(ValueError):
    """Malformed input with a line/column position (both 1-based)."""

    def __init__(self, message: str, line: int, column: int = 1, source: str = "<input>") -> None:
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.source = source


def _content_lines(text: str) -> List[Tuple[int, str]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            lines.append((number, raw))
    return lines


def _tokens(raw: str) -> List[Tuple[int, str]]:
    return [(match.start() + 1, match.group()) for match in _TOKEN.finditer(raw)]


def parse_kmos(text: str, source: str = "<input>") -> Mosaic:
    """Parse ``KMOS v1 <R> <C>`` followed by R rows of C tile tokens."""

    lines = _content_lines(text)
    if not lines:
        raise FormatError("missing KMOS header", 1, 1, source)

    number, raw = lines[0]
    header = _tokens(raw)
    words = [tok for _, tok in header]
    if len(words) != 4 or words[0] != KMOS_MAGIC or words[1] != VERSION:
        raise FormatError(f"expected '{KMOS_MAGIC} {VERSION} <rows> <cols>'", number, 1, source)
    try:
        rows, cols = int(words[2]), int(words[3])
    except ValueError:
        raise FormatError("grid size must be integers", number, header[2][0], source) from None
    if rows < 1 or cols < 1:
        raise FormatError("grid size must be at least 1x1", number, header[2][0], source)

    grid: List[List[Tile]] = []
    for number, raw in lines[1:]:
        tokens = _tokens(raw)
        if tokens[0][1] == KMOS_MAGIC:
            raise FormatError("duplicate KMOS header", number, tokens[0][0], source)
        if len(grid) == rows:
            raise FormatError(f"more than {rows} rows", number, tokens[0][0], source)
        if len(tokens) != cols:
            raise FormatError(
                f"expected {cols} tiles, found {len(tokens)}", number, tokens[0][0], source
            )
        row: List[Tile] = []
        for column, token in tokens:
            try:
                row.append(Tile.from_token(token))
            except UnknownTileToken:
                raise FormatError(f"unknown tile {token!r}", number, column, source) from None
        grid.append(row)

    if len(grid) != rows:
        last = lines[-1][0]
        raise FormatError(f"expected {rows} rows, found {len(grid)}", last, 1, source)
    return Mosaic.from_rows(grid)


def format_kmos(m: Mosaic, comment: Optional[str] = None) -> str:
    """Canonical ``.kmos`` text; a comment line is prepended when given."""

    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.append(f"{KMOS_MAGIC} {VERSION} {m.rows} {m.cols}")
    lines.extend(" ".join(row) for row in m.tokens())
    return "\n".join(lines) + "\n"


def load_kmos(path: Path) -> Mosaic:
    return parse_kmos(Path(path).read_text(encoding="utf-8"), source=str(path))


def _to_hex(bits: BitString) -> str:
    return "".join(f"{int(str(word), 2):x}" for word in bits.words())


def _from_hex(digits: str, line: int, source: str) -> BitString:
    bits: List[int] = []
    for offset, digit in enumerate(digits, start=1):
        try:
            value = int(digit, 16)
        except ValueError:
            raise FormatError(f"not a hex digit: {digit!r}", line, offset, source) from None
        bits.extend(int(b) for b in f"{value:04b}")
    return BitString(tuple(bits))


def _from_bin(digits: str, line: int, source: str) -> BitString:
    for offset, digit in enumerate(digits, start=1):
        if digit not in "01":
            raise FormatError(f"not a binary digit: {digit!r}", line, offset, source)
    return BitString.from_text(digits)


def format_bits(bits: BitString, n: int, fmt: str = FORMAT_BIN) -> str:
    """Raw ``0``/``1`` text, or hex under a ``KMOSBITS v1 n=<N>`` header."""

    if fmt == FORMAT_BIN:
        return bits.to_text() + "\n"
    if fmt == FORMAT_HEX:
        return f"{BITS_MAGIC} {VERSION} n={n}\n{_to_hex(bits)}\n"
    raise ValueError(f"unknown bit format {fmt!r}; use one of {BIT_FORMATS}")


def parse_bits(text: str, source: str = "<input>") -> Tuple[BitString, Optional[int]]:
    """Read a bitstring file; returns the bits and the grid size if declared."""

    lines = _content_lines(text)
    if not lines:
        return BitString(()), None
    number, first = lines[0]
    tokens = first.split()
    if tokens[0] != BITS_MAGIC:
        digits = "".join("".join(raw.split()) for _, raw in lines)
        return _from_bin(digits, number, source), None

    if len(tokens) != 3 or tokens[1] != VERSION:
        raise FormatError(f"expected '{BITS_MAGIC} {VERSION} n=<N>'", number, 1, source)
    match = _KEY_VALUE.match(tokens[2])
    if match is None or match.group("key") != "n":
        raise FormatError("header needs n=<N>", number, first.find(tokens[2]) + 1, source)
    n = int(match.group("value"))
    body = lines[1:]
    digits = "".join("".join(raw.split()) for _, raw in body)
    line = body[0][0] if body else number
    return _from_hex(digits, line, source), n


def format_dt(seq: DTSequence) -> str:
    return str(seq)


def parse_dt(text: str, source: str = "<input>") -> DTSequence:
    try:
        return DTSequence.parse(text)
    except ValueError as exc:
        raise FormatError(str(exc), 1, 1, source) from None


def format_ciphertext(blocks: Sequence[Tuple[int, BitString]], fmt: str = FORMAT_BIN) -> str:
    """``KMOSCT v1 blocks=<k>`` then ``n=<N>`` and a bit line per block."""

    if fmt not in BIT_FORMATS:
        raise ValueError(f"unknown bit format {fmt!r}; use one of {BIT_FORMATS}")
    lines = [f"{CIPHERTEXT_MAGIC} {VERSION} blocks={len(blocks)}"]
    for n, bits in blocks:
        lines.append(f"n={n}")
        lines.append(bits.to_text() if fmt == FORMAT_BIN else _to_hex(bits))
    return "\n".join(lines) + "\n"


def parse_ciphertext(text: str, source: str = "<input>") -> List[Tuple[int, BitString]]:
    """Inverse of format_ciphertext; bin or hex is told apart by length."""

    lines = _content_lines(text)
    if not lines:
        raise FormatError(f"missing {CIPHERTEXT_MAGIC} header", 1, 1, source)
    number, first = lines[0]
    tokens = first.split()
    match = _KEY_VALUE.match(tokens[2]) if len(tokens) == 3 else None
    if (
        tokens[:2] != [CIPHERTEXT_MAGIC, VERSION]
        or match is None
        or match.group("key") != "blocks"
    ):
        raise FormatError(f"expected '{CIPHERTEXT_MAGIC} {VERSION} blocks=<k>'", number, 1, source)
    count = int(match.group("value"))
    body = lines[1:]
    if len(body) != 2 * count:
        last = body[-1][0] if body else number
        raise FormatError(f"expected {count} blocks, found {len(body) / 2:g}", last, 1, source)

    blocks: List[Tuple[int, BitString]] = []
    for index in range(count):
        size_line, size_raw = body[2 * index]
        bits_line, bits_raw = body[2 * index + 1]
        size_match = _KEY_VALUE.match(size_raw.strip())
        if size_match is None or size_match.group("key") != "n":
            raise FormatError("block header needs n=<N>", size_line, 1, source)
        n = int(size_match.group("value"))
        digits = bits_raw.strip()
        if len(digits) == WORD_BITS * n * n:
            bits = _from_bin(digits, bits_line, source)
        elif len(digits) == n * n:
            bits = _from_hex(digits, bits_line, source)
        else:
            raise FormatError(
                f"block of n={n} needs {WORD_BITS * n * n} bits or {n * n} hex digits",
                bits_line,
                1,
                source,
            )
        blocks.append((n, bits))
    return blocks
