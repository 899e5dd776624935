"""ASCII and SVG drawings of mosaics."""

from __future__ import annotations

from typing import Dict, List, Tuple

from knot_mosaic.mosaic import Mosaic
from knot_mosaic.tiles import GEOMETRY, HORIZONTAL, Port, Tile


# Each tile is a 3x3 block of characters. Crossings draw the over strand
# straight through the centre and break the under strand.
ASCII_CELLS: Dict[Tile, Tuple[str, str, str]] = {
    Tile.M1: (" | ", "-|-", " | "),
    Tile.M4: (" | ", "---", " | "),
    Tile.M2: ("   ", "-\\ ", " | "),
    Tile.M3: ("   ", " /-", " | "),
    Tile.M5: (" | ", " \\-", "   "),
    Tile.M8: (" | ", "-/ ", "   "),
    Tile.M6: (" | ", "-/-", " | "),
    Tile.M7: (" | ", "-\\-", " | "),
    Tile.B1: ("   ", "   ", "   "),
    Tile.B2: ("   ", "   ", "   "),
    Tile.B3: ("   ", "   ", "   "),
    Tile.B4: ("   ", "   ", "   "),
}


def render_ascii(m: Mosaic) -> str:
    lines: List[str] = []
    for row in m.grid:
        for band in range(3):
            lines.append("".join(ASCII_CELLS[tile][band] for tile in row).rstrip())
    return "\n".join(lines) + "\n"


CELL = 40
STROKE = 3
GAP = CELL / 6


def _port_point(x: float, y: float, port: Port) -> Tuple[float, float]:
    half = CELL / 2
    return {
        Port.NORTH: (x + half, y),
        Port.EAST: (x + CELL, y + half),
        Port.SOUTH: (x + half, y + CELL),
        Port.WEST: (x, y + half),
    }[port]


def _arc(x: float, y: float, a: Port, b: Port) -> str:
    """Quarter circle joining two adjacent edge midpoints around their corner."""

    (x1, y1), (x2, y2) = _port_point(x, y, a), _port_point(x, y, b)
    corner_x = x if Port.WEST in (a, b) else x + CELL
    corner_y = y if Port.NORTH in (a, b) else y + CELL
    cross = (x1 - corner_x) * (y2 - corner_y) - (y1 - corner_y) * (x2 - corner_x)
    sweep = 1 if cross > 0 else 0
    radius = CELL / 2
    return (
        f'<path d="M {x1:g} {y1:g} A {radius:g} {radius:g} 0 0 {sweep} {x2:g} {y2:g}" '
        f'fill="none" stroke="black" stroke-width="{STROKE}"/>'
    )


def _line(x1: float, y1: float, x2: float, y2: float) -> str:
    return (
        f'<line x1="{x1:g}" y1="{y1:g}" x2="{x2:g}" y2="{y2:g}" '
        f'stroke="black" stroke-width="{STROKE}"/>'
    )


def _crossing(x: float, y: float, tile: Tile) -> List[str]:
    half = CELL / 2
    vertical = [(x + half, y), (x + half, y + CELL)]
    horizontal = [(x, y + half), (x + CELL, y + half)]
    over_horizontal = GEOMETRY[tile].over_strand == HORIZONTAL
    over, under = (horizontal, vertical) if over_horizontal else (vertical, horizontal)

    (ox1, oy1), (ox2, oy2) = over
    (ux1, uy1), (ux2, uy2) = under
    centre_x, centre_y = x + half, y + half
    if over_horizontal:
        pieces = [(ux1, uy1, centre_x, centre_y - GAP), (centre_x, centre_y + GAP, ux2, uy2)]
    else:
        pieces = [(ux1, uy1, centre_x - GAP, centre_y), (centre_x + GAP, centre_y, ux2, uy2)]
    return [_line(ox1, oy1, ox2, oy2)] + [_line(*piece) for piece in pieces]


def render_svg(m: Mosaic, grid: bool = True) -> str:
    """Standalone SVG document; arcs are exact quarter circles."""

    width, height = m.cols * CELL, m.rows * CELL
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for r, c in m.cells():
        x, y = c * CELL, r * CELL
        tile = m[(r, c)]
        if grid:
            parts.append(
                f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
                f'fill="none" stroke="#dddddd" stroke-width="1"/>'
            )
        if tile.is_crossing:
            parts.extend(_crossing(x, y, tile))
            continue
        for strand in GEOMETRY[tile].strands:
            a, b = sorted(strand, key=list(Port).index)
            parts.append(_arc(x, y, a, b))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
