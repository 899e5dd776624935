"""Tile alphabet and edge geometry for knot mosaics.

Twelve tiles: eight knot prototiles ``m1``..``m8`` and four decorated
blanks ``b1``..``b4``. Strands enter and leave a tile at edge midpoints
(ports). Crossings carry an over strand; m1 has the vertical strand on
top and m4 the horizontal one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Optional, Tuple


class Port(str, Enum):
    """Edge midpoint of a tile."""

    NORTH = "N"
    EAST = "E"
    SOUTH = "S"
    WEST = "W"

    @property
    def opposite(self) -> "Port":
        return _OPPOSITE[self]

    @property
    def offset(self) -> Tuple[int, int]:
        """(row, col) step to the neighbouring cell across this edge."""

        return _OFFSET[self]

    def rotated90(self) -> "Port":
        """Port position after a clockwise quarter turn."""

        return _CLOCKWISE[self]


_OPPOSITE = {
    Port.NORTH: Port.SOUTH,
    Port.SOUTH: Port.NORTH,
    Port.EAST: Port.WEST,
    Port.WEST: Port.EAST,
}
_OFFSET = {
    Port.NORTH: (-1, 0),
    Port.EAST: (0, 1),
    Port.SOUTH: (1, 0),
    Port.WEST: (0, -1),
}
_CLOCKWISE = {
    Port.NORTH: Port.EAST,
    Port.EAST: Port.SOUTH,
    Port.SOUTH: Port.WEST,
    Port.WEST: Port.NORTH,
}


class Tile(str, Enum):
    """The twelve mosaic tiles, keyed by their text token."""

    M1 = "m1"
    M2 = "m2"
    M3 = "m3"
    M4 = "m4"
    M5 = "m5"
    M6 = "m6"
    M7 = "m7"
    M8 = "m8"
    B1 = "b1"
    B2 = "b2"
    B3 = "b3"
    B4 = "b4"

    @classmethod
    def from_token(cls, token: str) -> "Tile":
        try:
            return cls(token)
        except ValueError as exc:
            raise UnknownTileToken(token) from exc

    @property
    def is_crossing(self) -> bool:
        return self in CROSSINGS

    @property
    def is_single_arc(self) -> bool:
        return self in SINGLE_ARCS

    @property
    def is_double_arc(self) -> bool:
        return self in DOUBLE_ARCS

    @property
    def is_blank(self) -> bool:
        return self in BLANKS

    @property
    def is_knot_tile(self) -> bool:
        return not self.is_blank

    def __str__(self) -> str:
        return self.value


class UnknownTileToken(ValueError):
    """Raised when a text token names no tile."""

    def __init__(self, token: str) -> None:
        super().__init__(f"unknown tile token: {token!r}")
        self.token = token


class PortUnoccupied(ValueError):
    """Raised when routing enters a tile through a port it does not use."""

    def __init__(self, tile: Tile, port: Port) -> None:
        super().__init__(f"tile {tile.value} has no strand at port {port.value}")
        self.tile = tile
        self.port = port


CROSSINGS = frozenset({Tile.M1, Tile.M4})
SINGLE_ARCS = frozenset({Tile.M2, Tile.M3, Tile.M5, Tile.M8})
DOUBLE_ARCS = frozenset({Tile.M6, Tile.M7})
BLANKS = frozenset({Tile.B1, Tile.B2, Tile.B3, Tile.B4})
KNOT_TILES = CROSSINGS | SINGLE_ARCS | DOUBLE_ARCS

Strand = FrozenSet[Port]


def _strand(a: Port, b: Port) -> Strand:
    return frozenset({a, b})


VERTICAL = _strand(Port.NORTH, Port.SOUTH)
HORIZONTAL = _strand(Port.EAST, Port.WEST)


@dataclass(frozen=True)
class TileGeometry:
    """Strands a tile connects and, for crossings, the one on top."""

    strands: FrozenSet[Strand]
    over_strand: Optional[Strand] = None

    @property
    def ports(self) -> FrozenSet[Port]:
        return frozenset(port for strand in self.strands for port in strand)

    def rotated90(self) -> "TileGeometry":
        strands = frozenset(
            frozenset(port.rotated90() for port in strand)
            for strand in self.strands
        )
        over = None
        if self.over_strand is not None:
            over = frozenset(port.rotated90() for port in self.over_strand)
        return TileGeometry(strands=strands, over_strand=over)


GEOMETRY: Dict[Tile, TileGeometry] = {
    Tile.M1: TileGeometry(frozenset({VERTICAL, HORIZONTAL}), VERTICAL),
    Tile.M4: TileGeometry(frozenset({VERTICAL, HORIZONTAL}), HORIZONTAL),
    Tile.M2: TileGeometry(frozenset({_strand(Port.SOUTH, Port.WEST)})),
    Tile.M3: TileGeometry(frozenset({_strand(Port.SOUTH, Port.EAST)})),
    Tile.M5: TileGeometry(frozenset({_strand(Port.NORTH, Port.EAST)})),
    Tile.M8: TileGeometry(frozenset({_strand(Port.NORTH, Port.WEST)})),
    Tile.M6: TileGeometry(
        frozenset(
            {_strand(Port.NORTH, Port.WEST), _strand(Port.SOUTH, Port.EAST)}
        )
    ),
    Tile.M7: TileGeometry(
        frozenset(
            {_strand(Port.NORTH, Port.EAST), _strand(Port.SOUTH, Port.WEST)}
        )
    ),
    Tile.B1: TileGeometry(frozenset()),
    Tile.B2: TileGeometry(frozenset()),
    Tile.B3: TileGeometry(frozenset()),
    Tile.B4: TileGeometry(frozenset()),
}

# Arrow decorations turn with the tile.
_BLANK_ROTATION = {
    Tile.B4: Tile.B1,
    Tile.B1: Tile.B2,
    Tile.B2: Tile.B3,
    Tile.B3: Tile.B4,
}

_BY_GEOMETRY = {
    geometry: tile for tile, geometry in GEOMETRY.items() if tile in KNOT_TILES
}


def ports(tile: Tile) -> FrozenSet[Port]:
    """Occupied edge midpoints of ``tile``."""

    return GEOMETRY[tile].ports


def route(tile: Tile, entry: Port) -> Port:
    """Exit port of the strand entering ``tile`` at ``entry``."""

    for strand in GEOMETRY[tile].strands:
        if entry in strand:
            (exit_port,) = strand - {entry}
            return exit_port
    raise PortUnoccupied(tile, entry)


def is_over(tile: Tile, entry: Port) -> bool:
    """Whether the strand entering a crossing at ``entry`` passes on top."""

    over = GEOMETRY[tile].over_strand
    if over is None:
        raise ValueError(f"tile {tile.value} is not a crossing")
    return entry in over


def rotate90(tile: Tile) -> Tile:
    """Tile obtained by turning ``tile`` a quarter turn clockwise."""

    if tile.is_blank:
        return _BLANK_ROTATION[tile]
    return _BY_GEOMETRY[GEOMETRY[tile].rotated90()]


def rotate180(tile: Tile) -> Tile:
    return rotate90(rotate90(tile))
