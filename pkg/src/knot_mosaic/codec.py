"""Tile codewords, spiral serialization and mosaic <-> bitstring maps."""

from __future__ import annotations

import itertools
import operator
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Dict, FrozenSet, Iterable, Iterator, List, Sequence, Tuple, Union

from loguru import logger

from knot_mosaic.mosaic import Mosaic
from knot_mosaic.tiles import BLANKS, KNOT_TILES, Tile


Cell = Tuple[int, int]

WORD_BITS = 4


class InvalidSize(ValueError):
    """Raised for a grid size below 1."""


class NotSquare(ValueError):
    """Raised when a rectangular mosaic is serialized without padding."""


class LengthMismatch(ValueError):
    """Raised when a bitstring does not hold exactly 4n^2 bits."""


@dataclass(frozen=True)
class Codeword:
    """Four bits, most significant first as printed in the code tables."""

    bits: Tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.bits) != WORD_BITS or any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"codeword needs four binary digits: {self.bits!r}")

    @classmethod
    def parse(cls, text: str) -> "Codeword":
        if len(text) != WORD_BITS or set(text) - {"0", "1"}:
            raise ValueError(f"codeword needs four binary digits: {text!r}")
        return cls(tuple(int(ch) for ch in text))  # type: ignore[arg-type]

    @property
    def weight(self) -> int:
        return sum(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class DetectedCorruption:
    """A received word outside the code space."""

    word: Codeword
    position: int = -1

    def __str__(self) -> str:
        if self.position < 0:
            return f"invalid codeword {self.word}"
        return f"invalid codeword {self.word} at spiral position {self.position}"


@dataclass(frozen=True)
class BitString:
    """Ordered binary digits as carried on the wire."""

    bits: Tuple[int, ...]

    @classmethod
    def from_text(cls, text: str) -> "BitString":
        text = "".join(text.split())
        if set(text) - {"0", "1"}:
            raise ValueError("bitstring may only contain '0' and '1'")
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def from_words(cls, words: Iterable[Codeword]) -> "BitString":
        return cls(tuple(bit for word in words for bit in word.bits))

    def words(self) -> Iterator[Codeword]:
        for start in range(0, len(self.bits) - WORD_BITS + 1, WORD_BITS):
            yield Codeword(self.bits[start:start + WORD_BITS])  # type: ignore[arg-type]

    def flip(self, *positions: int) -> "BitString":
        """Copy with the bits at ``positions`` inverted."""

        bits = list(self.bits)
        for position in positions:
            bits[position] ^= 1
        return BitString(tuple(bits))

    def to_text(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return self.to_text()


ENCODING: Dict[Tile, Codeword] = {
    Tile.M1: Codeword.parse("0000"),
    Tile.M2: Codeword.parse("0101"),
    Tile.M3: Codeword.parse("1010"),
    Tile.M4: Codeword.parse("1111"),
    Tile.M5: Codeword.parse("0011"),
    Tile.M6: Codeword.parse("0110"),
    Tile.M7: Codeword.parse("1001"),
    Tile.M8: Codeword.parse("1100"),
    Tile.B1: Codeword.parse("1000"),
    Tile.B2: Codeword.parse("0010"),
    Tile.B3: Codeword.parse("0100"),
    Tile.B4: Codeword.parse("0001"),
}

DECODING: Dict[Codeword, Tile] = {word: tile for tile, word in ENCODING.items()}

INVALID_WORDS: FrozenSet[Codeword] = frozenset(
    Codeword(bits)  # type: ignore[arg-type]
    for bits in itertools.product((0, 1), repeat=WORD_BITS)
    if Codeword(bits) not in DECODING  # type: ignore[arg-type]
)


def encode_tile(tile: Tile) -> Codeword:
    return ENCODING[tile]


def decode_word(word: Codeword) -> Union[Tile, DetectedCorruption]:
    """Tile for a valid codeword, or the corruption marker."""

    tile = DECODING.get(word)
    if tile is None:
        return DetectedCorruption(word)
    return tile


def hamming(a: Codeword, b: Codeword) -> int:
    return sum(x != y for x, y in zip(a.bits, b.bits))


def distance_matrix() -> Dict[Tuple[Tile, Tile], int]:
    """Pairwise Hamming distances over the whole tile alphabet."""

    return {
        (a, b): hamming(ENCODING[a], ENCODING[b])
        for a in Tile
        for b in Tile
    }


def minimum_distance(tiles: Iterable[Tile]) -> int:
    words = [ENCODING[t] for t in tiles]
    return min(hamming(a, b) for a, b in itertools.combinations(words, 2))


def _monomial_row(m: int, i: int) -> List[int]:
    return ([1] * (2 ** (m - i - 1)) + [0] * (2 ** (m - i - 1))) * (2**i)


def _vector_mult(*vecs: Sequence[int]) -> List[int]:
    return [reduce(operator.mul, column, 1) for column in zip(*vecs)]


def reed_muller_generator(r: int, m: int) -> List[List[int]]:
    """Generator rows of RM(r, m): all monomials of degree <= r."""

    x_rows = [_monomial_row(m, i) for i in range(m)]
    rows = [[1] * (2**m)]
    for degree in range(1, r + 1):
        for combo in itertools.combinations(x_rows, degree):
            rows.append(_vector_mult(*combo))
    return rows


def reed_muller_codewords(r: int = 1, m: int = 2) -> FrozenSet[Codeword]:
    """Every codeword of RM(r, m); only length-4 codes map onto Codeword."""

    rows = reed_muller_generator(r, m)
    words = set()
    for coefficients in itertools.product((0, 1), repeat=len(rows)):
        word = [0] * (2**m)
        for coefficient, row in zip(coefficients, rows):
            if coefficient:
                word = [(a + b) % 2 for a, b in zip(word, row)]
        words.add(Codeword(tuple(word)))  # type: ignore[arg-type]
    return frozenset(words)


M_CODEWORDS = frozenset(ENCODING[t] for t in KNOT_TILES)
B_CODEWORDS = frozenset(ENCODING[t] for t in BLANKS)


@lru_cache(maxsize=None)
def spiral_order(n: int) -> Tuple[Cell, ...]:
    """Outward clockwise spiral over an n x n grid.

    Starts at ``(ceil(n/2) - 1, ceil(n/2) - 1)`` and moves E, S, W, N with
    run lengths 1, 1, 2, 2, 3, 3, ...; cells outside the grid are skipped,
    which only happens on the final run.
    """

    if n < 1:
        raise InvalidSize(f"grid size must be at least 1, got {n}")

    start = (n + 1) // 2 - 1
    row, col = start, start
    cells: List[Cell] = [(row, col)]
    moves = ((0, 1), (1, 0), (0, -1), (-1, 0))
    run = 1
    turn = 0
    while len(cells) < n * n:
        d_row, d_col = moves[turn % 4]
        for _ in range(run):
            row, col = row + d_row, col + d_col
            if 0 <= row < n and 0 <= col < n:
                cells.append((row, col))
        turn += 1
        if turn % 2 == 0:
            run += 1
    return tuple(cells)


@dataclass(frozen=True)
class DecodeReport:
    """Outcome of a decode that met invalid codewords."""

    n: int
    corruptions: Tuple[DetectedCorruption, ...]

    @property
    def positions(self) -> Tuple[int, ...]:
        return tuple(c.position for c in self.corruptions)

    @property
    def cells(self) -> Tuple[Cell, ...]:
        order = spiral_order(self.n)
        return tuple(order[p] for p in self.positions)

    def to_dict(self) -> Dict[str, object]:
        return {
            "status": "corrupt",
            "n": self.n,
            "positions": list(self.positions),
            "cells": [list(cell) for cell in self.cells],
            "words": [str(c.word) for c in self.corruptions],
        }


def encode_mosaic(m: Mosaic) -> BitString:
    """Concatenate tile codewords along the spiral; 4n^2 bits."""

    if not m.is_square:
        raise NotSquare(f"cannot serialize a {m.rows}x{m.cols} mosaic; pad it first")
    return BitString.from_words(encode_tile(m[cell]) for cell in spiral_order(m.rows))


def decode_mosaic(s: BitString, n: int) -> Union[Mosaic, DecodeReport]:
    """Inverse of encode_mosaic; reports every invalid word position."""

    order = spiral_order(n)
    expected = WORD_BITS * n * n
    if len(s) != expected:
        raise LengthMismatch(f"expected {expected} bits for n={n}, got {len(s)}")

    grid: List[List[Tile]] = [[Tile.B1] * n for _ in range(n)]
    corruptions: List[DetectedCorruption] = []
    for position, (cell, word) in enumerate(zip(order, s.words())):
        decoded = decode_word(word)
        if isinstance(decoded, DetectedCorruption):
            corruptions.append(DetectedCorruption(word, position))
            continue
        grid[cell[0]][cell[1]] = decoded

    if corruptions:
        logger.debug("decode found {} invalid word(s) in n={} stream", len(corruptions), n)
        return DecodeReport(n=n, corruptions=tuple(corruptions))
    return Mosaic.from_rows(grid)
