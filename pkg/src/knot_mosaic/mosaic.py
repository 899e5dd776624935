"""Mosaic grid, topological validation and diagram-level operations.

Validation enforces strand continuity across edges (rule i), a single
closed component (rule iii) and quadrant placement of decorated blanks on
square mosaics (rule iv). Rule ii, the accidental crossing swap, is left to
the codec's distance-4 separation of m1 and m4. The size estimate
``rows * cols <= 8 * crossings`` is reported as a warning only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple, Union

from loguru import logger

from knot_mosaic.tiles import (
    GEOMETRY,
    Port,
    Tile,
    ports,
    rotate180,
    route,
)


Cell = Tuple[int, int]

STATUS_VALID = "valid"
STATUS_EMPTY = "empty"
STATUS_INVALID = "invalid"

RULE_CONTINUITY = "i"
RULE_SINGLE_COMPONENT = "iii"
RULE_BLANK_PLACEMENT = "iv"
RULE_BOUND = "bound"

SIDE_LEFT = "left"
SIDE_RIGHT = "right"


class MosaicShapeError(ValueError):
    """Raised for empty or ragged grids."""


class NotAKnot(ValueError):
    """Raised when an operation needs a valid single-component mosaic."""


class NoSpliceSite(ValueError):
    """Raised when a mosaic has no boundary cap to open for a connected sum."""


class NotATangle(ValueError):
    """Raised when a mutation region is not crossed by exactly four strands."""


class AsymmetricLegs(ValueError):
    """Raised when a region's legs do not survive a half turn."""


class RegionOutOfBounds(ValueError):
    """Raised when a mutation region does not fit inside the mosaic."""


@dataclass(frozen=True)
class Mosaic:
    """Immutable R x C grid of tiles."""

    grid: Tuple[Tuple[Tile, ...], ...]

    def __post_init__(self) -> None:
        if not self.grid or not self.grid[0]:
            raise MosaicShapeError("a mosaic needs at least one row and one column")
        width = len(self.grid[0])
        for index, row in enumerate(self.grid):
            if len(row) != width:
                raise MosaicShapeError(
                    f"row {index} has {len(row)} tiles, expected {width}"
                )
            for tile in row:
                if not isinstance(tile, Tile):
                    raise MosaicShapeError(f"not a tile: {tile!r}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Union[Tile, str]]]) -> "Mosaic":
        """Build from nested sequences of tiles or tile tokens."""

        return cls(
            tuple(
                tuple(t if isinstance(t, Tile) else Tile.from_token(t) for t in row)
                for row in rows
            )
        )

    @classmethod
    def blank(cls, rows: int, cols: int) -> "Mosaic":
        """All-blank mosaic with quadrant-correct decorations."""

        if rows < 1 or cols < 1:
            raise MosaicShapeError("a mosaic needs at least one row and one column")
        return cls(
            tuple(
                tuple(blank_for_cell((r, c), rows, cols) for c in range(cols))
                for r in range(rows)
            )
        )

    @property
    def rows(self) -> int:
        return len(self.grid)

    @property
    def cols(self) -> int:
        return len(self.grid[0])

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, cell: Cell) -> Tile:
        return self.grid[cell[0]][cell[1]]

    def __contains__(self, cell: object) -> bool:
        if not isinstance(cell, tuple) or len(cell) != 2:
            return False
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def cells(self) -> Iterator[Cell]:
        for r in range(self.rows):
            for c in range(self.cols):
                yield (r, c)

    def knot_cells(self) -> Iterator[Cell]:
        return (cell for cell in self.cells() if self[cell].is_knot_tile)

    def replace(self, updates: Dict[Cell, Tile]) -> "Mosaic":
        """Copy with the given cells overwritten."""

        grid = [list(row) for row in self.grid]
        for (r, c), tile in updates.items():
            grid[r][c] = tile
        return Mosaic.from_rows(grid)

    def tokens(self) -> List[List[str]]:
        return [[tile.value for tile in row] for row in self.grid]


def neighbour(cell: Cell, port: Port) -> Cell:
    d_row, d_col = port.offset
    return (cell[0] + d_row, cell[1] + d_col)


def blank_for_cell(cell: Cell, n: int, cols: Optional[int] = None) -> Tile:
    """Decorated blank for ``cell`` by nearest corner.

    Upper means ``row < rows / 2`` and right means ``col >= cols / 2``.
    ``cols`` defaults to ``n`` (square grid).
    """

    rows = n
    cols = n if cols is None else cols
    upper = 2 * cell[0] < rows
    right = 2 * cell[1] >= cols
    if upper:
        return Tile.B1 if right else Tile.B4
    return Tile.B2 if right else Tile.B3


def decorate_blanks(m: Mosaic) -> Mosaic:
    """Re-derive every blank from its quadrant in ``m``'s own frame."""

    updates = {
        cell: blank_for_cell(cell, m.rows, m.cols)
        for cell in m.cells()
        if m[cell].is_blank
    }
    return m.replace(updates)


def pad_to_square(m: Mosaic) -> Mosaic:
    """Embed ``m`` at the top-left of an N x N square, N = max(R, C)."""

    if m.is_square:
        return m
    n = max(m.rows, m.cols)
    grid = [[Tile.B1] * n for _ in range(n)]
    for r, c in m.cells():
        grid[r][c] = m[(r, c)]
    return decorate_blanks(Mosaic.from_rows(grid))


def crossing_number(m: Mosaic) -> int:
    return sum(1 for cell in m.cells() if m[cell].is_crossing)


@dataclass(frozen=True)
class Violation:
    """One finding of the validator."""

    rule: str
    cell: Cell
    message: str
    port: Optional[Port] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "rule": self.rule,
            "cell": list(self.cell),
            "port": self.port.value if self.port is not None else None,
            "message": self.message,
        }

    def __str__(self) -> str:
        where = f"{self.cell}" if self.port is None else f"{self.cell}:{self.port.value}"
        return f"rule {self.rule} at {where}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    status: str
    crossing_count: int
    component_count: int
    violations: Tuple[Violation, ...] = ()
    warnings: Tuple[Violation, ...] = ()

    @property
    def is_valid(self) -> bool:
        return self.status == STATUS_VALID

    def rules_violated(self) -> FrozenSet[str]:
        return frozenset(v.rule for v in self.violations)

    def to_dict(self) -> Dict[str, object]:
        return {
            "status": self.status,
            "crossing_count": self.crossing_count,
            "component_count": self.component_count,
            "violations": [v.to_dict() for v in self.violations],
            "warnings": [w.to_dict() for w in self.warnings],
        }


Strand = FrozenSet[Port]
StrandNode = Tuple[Cell, Strand]


def _walk(
    m: Mosaic, cell: Cell, exit_port: Port, stop: StrandNode
) -> Tuple[List[StrandNode], bool]:
    """Follow a strand leaving ``cell`` through ``exit_port``.

    Returns the nodes passed and whether the walk got back to ``stop``.
    """

    seen: List[StrandNode] = []
    while True:
        nxt = neighbour(cell, exit_port)
        if nxt not in m:
            return seen, False
        entry = exit_port.opposite
        tile = m[nxt]
        if entry not in ports(tile):
            return seen, False
        out = route(tile, entry)
        node = (nxt, frozenset({entry, out}))
        if node == stop:
            return seen, True
        seen.append(node)
        cell, exit_port = nxt, out


def strand_components(m: Mosaic) -> List[Tuple[bool, List[StrandNode]]]:
    """Strand pieces of ``m`` as ``(closed, nodes)`` pairs."""

    visited: Set[StrandNode] = set()
    components: List[Tuple[bool, List[StrandNode]]] = []
    for cell in m.knot_cells():
        for strand in GEOMETRY[m[cell]].strands:
            start = (cell, strand)
            if start in visited:
                continue
            first, second = sorted(strand, key=lambda p: p.value)
            forward, closed = _walk(m, cell, second, start)
            nodes = [start] + forward
            if not closed:
                backward, _ = _walk(m, cell, first, start)
                nodes = list(reversed(backward)) + nodes
            visited.update(nodes)
            components.append((closed, nodes))
    return components


def validate(m: Mosaic, claimed_crossings: Optional[int] = None) -> ValidationReport:
    """Check continuity, component count, blank placement and the size bound."""

    violations: List[Violation] = []
    warnings: List[Violation] = []

    for cell in m.knot_cells():
        tile = m[cell]
        for port in sorted(ports(tile), key=lambda p: p.value):
            other = neighbour(cell, port)
            if other not in m:
                violations.append(
                    Violation(RULE_CONTINUITY, cell, "strand runs off the mosaic boundary", port)
                )
            elif port.opposite not in ports(m[other]):
                violations.append(
                    Violation(
                        RULE_CONTINUITY,
                        cell,
                        f"no matching port on {m[other].value} at {other}",
                        port,
                    )
                )

    components = strand_components(m)
    closed = sum(1 for is_closed, _ in components if is_closed)
    if closed > 1:
        first_cells = sorted(nodes[0][0] for is_closed, nodes in components if is_closed)
        violations.append(
            Violation(
                RULE_SINGLE_COMPONENT,
                first_cells[1],
                f"{closed} closed components: a link, namely a multicomponent knot",
            )
        )

    if m.is_square:
        for cell in m.cells():
            tile = m[cell]
            expected = blank_for_cell(cell, m.rows)
            if tile.is_blank and tile != expected:
                violations.append(
                    Violation(
                        RULE_BLANK_PLACEMENT,
                        cell,
                        f"blank {tile.value} misplaced, quadrant needs {expected.value}",
                    )
                )

    chi = crossing_number(m)
    claimed = chi if claimed_crossings is None else claimed_crossings
    if claimed >= 1 and m.rows * m.cols > 8 * claimed:
        warnings.append(
            Violation(
                RULE_BOUND,
                (0, 0),
                f"{m.rows}x{m.cols} grid exceeds the 8*{claimed} cell estimate",
            )
        )
        logger.warning("size bound exceeded: {}x{} for {} crossings", m.rows, m.cols, claimed)

    if not any(True for _ in m.knot_cells()):
        status = STATUS_EMPTY
    elif not violations and closed == 1:
        status = STATUS_VALID
    else:
        status = STATUS_INVALID

    logger.debug(
        "validated {}x{} mosaic: {} (chi={}, components={}, violations={})",
        m.rows,
        m.cols,
        status,
        chi,
        closed,
        len(violations),
    )
    return ValidationReport(
        status=status,
        crossing_count=chi,
        component_count=closed,
        violations=tuple(violations),
        warnings=tuple(warnings),
    )


def require_knot(m: Mosaic, what: str = "mosaic") -> ValidationReport:
    report = validate(m)
    if not report.is_valid:
        detail = "; ".join(str(v) for v in report.violations) or report.status
        raise NotAKnot(f"{what} is not a valid knot mosaic: {detail}")
    return report


def bounding_box(m: Mosaic) -> Optional[Tuple[int, int, int, int]]:
    """``(top, left, bottom, right)`` of the knot tiles, inclusive."""

    cells = list(m.knot_cells())
    if not cells:
        return None
    rows = [r for r, _ in cells]
    cols = [c for _, c in cells]
    return (min(rows), min(cols), max(rows), max(cols))


def crop(m: Mosaic, box: Tuple[int, int, int, int]) -> Mosaic:
    top, left, bottom, right = box
    return Mosaic(tuple(row[left:right + 1] for row in m.grid[top:bottom + 1]))


@dataclass(frozen=True)
class SpliceSite:
    """Two-tile cap on the outermost column of the knot tiles."""

    side: str
    column: int
    row: int

    @property
    def rows(self) -> Tuple[int, int]:
        return (self.row, self.row + 1)


_CAPS = {
    SIDE_RIGHT: (Tile.M2, Tile.M8),
    SIDE_LEFT: (Tile.M3, Tile.M5),
}


def find_splice_site(m: Mosaic, side: str) -> SpliceSite:
    """Locate the cap a connected sum opens on ``side``."""

    if side not in _CAPS:
        raise ValueError(f"side must be {SIDE_LEFT!r} or {SIDE_RIGHT!r}, got {side!r}")
    box = bounding_box(m)
    if box is None:
        raise NoSpliceSite("mosaic has no knot tiles")
    top, left, bottom, right = box
    column = right if side == SIDE_RIGHT else left
    occupied = [r for r in range(top, bottom + 1) if m[(r, column)].is_knot_tile]
    upper, lower = _CAPS[side]
    if (
        len(occupied) == 2
        and occupied[1] == occupied[0] + 1
        and m[(occupied[0], column)] == upper
        and m[(occupied[1], column)] == lower
    ):
        return SpliceSite(side=side, column=column, row=occupied[0])
    raise NoSpliceSite(
        f"no {upper.value}/{lower.value} cap on the {side} column {column}"
    )


def connect_sum(a: Mosaic, b: Mosaic) -> Mosaic:
    """Connected sum ``a # b``: open a's right cap and b's left cap, abut.

    Both inputs are cropped to their knot tiles; the cap columns are
    dropped and the remaining pieces placed side by side so the four loose
    ends meet. The result is rectangular with blanks decorated in its own
    frame; pad it before serializing.
    """

    require_knot(a, "left summand")
    require_knot(b, "right summand")
    left = crop(a, bounding_box(a))  # type: ignore[arg-type]
    right = crop(b, bounding_box(b))  # type: ignore[arg-type]
    site_a = find_splice_site(left, SIDE_RIGHT)
    site_b = find_splice_site(right, SIDE_LEFT)

    offset_a = max(0, site_b.row - site_a.row)
    offset_b = max(0, site_a.row - site_b.row)
    height = max(left.rows + offset_a, right.rows + offset_b)
    split = left.cols - 1
    width = split + right.cols - 1

    grid = [[Tile.B1] * width for _ in range(height)]
    for r in range(left.rows):
        for c in range(split):
            grid[r + offset_a][c] = left[(r, c)]
    for r in range(right.rows):
        for c in range(1, right.cols):
            grid[r + offset_b][split + c - 1] = right[(r, c)]

    result = decorate_blanks(Mosaic.from_rows(grid))
    logger.debug(
        "connect_sum {}x{} # {}x{} -> {}x{}",
        a.rows, a.cols, b.rows, b.cols, result.rows, result.cols,
    )
    return result


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle of whole tiles."""

    row: int
    col: int
    height: int
    width: int

    @property
    def bottom(self) -> int:
        return self.row + self.height - 1

    @property
    def right(self) -> int:
        return self.col + self.width - 1

    def cells(self) -> Iterator[Cell]:
        for r in range(self.row, self.bottom + 1):
            for c in range(self.col, self.right + 1):
                yield (r, c)

    def rotated(self, cell: Cell) -> Cell:
        """Position of ``cell`` after a half turn about the region centre."""

        return (self.row + self.bottom - cell[0], self.col + self.right - cell[1])

    def fits(self, m: Mosaic) -> bool:
        return (
            self.height >= 1
            and self.width >= 1
            and self.row >= 0
            and self.col >= 0
            and self.bottom < m.rows
            and self.right < m.cols
        )

    def to_dict(self) -> Dict[str, int]:
        return {"row": self.row, "col": self.col, "height": self.height, "width": self.width}

    def __str__(self) -> str:
        return f"{self.row},{self.col},{self.height},{self.width}"

    @classmethod
    def parse(cls, text: str) -> "Region":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"region needs row,col,height,width: {text!r}")
        try:
            row, col, height, width = (int(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"region needs integers: {text!r}") from exc
        return cls(row, col, height, width)


Leg = Tuple[Port, int]


def region_legs(m: Mosaic, region: Region) -> FrozenSet[Leg]:
    """Ports on the region boundary that face out of the region.

    North/south legs are keyed by column, east/west legs by row.
    """

    legs: Set[Leg] = set()
    for r, c in region.cells():
        tile_ports = ports(m[(r, c)])
        if r == region.row and Port.NORTH in tile_ports:
            legs.add((Port.NORTH, c))
        if r == region.bottom and Port.SOUTH in tile_ports:
            legs.add((Port.SOUTH, c))
        if c == region.col and Port.WEST in tile_ports:
            legs.add((Port.WEST, r))
        if c == region.right and Port.EAST in tile_ports:
            legs.add((Port.EAST, r))
    return frozenset(legs)


def _legs_symmetric(region: Region, legs: FrozenSet[Leg]) -> bool:
    turned = set()
    for port, offset in legs:
        if port in (Port.NORTH, Port.SOUTH):
            turned.add((port.opposite, region.col + region.right - offset))
        else:
            turned.add((port.opposite, region.row + region.bottom - offset))
    return turned == set(legs)


def _check_tangle(m: Mosaic, region: Region) -> None:
    if not region.fits(m):
        raise RegionOutOfBounds(f"region {region} does not fit a {m.rows}x{m.cols} mosaic")
    legs = region_legs(m, region)
    if len(legs) != 4:
        raise NotATangle(f"region {region} has {len(legs)} legs, a tangle needs 4")
    if not _legs_symmetric(region, legs):
        raise AsymmetricLegs(f"legs of region {region} do not survive a half turn")


def mutate(m: Mosaic, region: Region) -> Mosaic:
    """Turn the tangle inside ``region`` by 180 degrees.

    Blanks landing in the region are re-decorated for their new position,
    so mutating twice with the same region restores a quadrant-correct
    mosaic exactly.
    """

    require_knot(m)
    _check_tangle(m, region)
    updates: Dict[Cell, Tile] = {}
    for cell in region.cells():
        tile = rotate180(m[region.rotated(cell)])
        if tile.is_blank:
            tile = blank_for_cell(cell, m.rows, m.cols)
        updates[cell] = tile
    return m.replace(updates)


def is_tangle(m: Mosaic, region: Region) -> bool:
    try:
        _check_tangle(m, region)
    except (RegionOutOfBounds, NotATangle, AsymmetricLegs):
        return False
    return True


def mutation_regions(m: Mosaic) -> List[Region]:
    """Every rectangle of ``m`` that mutate accepts, top-left first."""

    require_knot(m)
    regions: List[Region] = []
    for row in range(m.rows):
        for col in range(m.cols):
            for height in range(1, m.rows - row + 1):
                for width in range(1, m.cols - col + 1):
                    region = Region(row, col, height, width)
                    if is_tangle(m, region):
                        regions.append(region)
    return regions
