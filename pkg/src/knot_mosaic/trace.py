"""Strand tracing and Dowker-Thistlethwaite sequences."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

from loguru import logger

from knot_mosaic.mosaic import (
    SIDE_LEFT,
    SIDE_RIGHT,
    Cell,
    Mosaic,
    NotAKnot,
    find_splice_site,
    neighbour,
)
from knot_mosaic.tiles import Port, is_over, ports, route


Start = Tuple[Cell, Port]
Passage = Tuple[Hashable, bool]


class OpenStrand(RuntimeError):
    """Raised when a traced strand runs into a dead end."""


class DTParityError(RuntimeError):
    """Raised when a crossing receives two labels of the same parity."""


class SuffixMismatch(ValueError):
    """Raised when a composite sequence does not end with the expected summand."""


@dataclass(frozen=True)
class StrandStep:
    cell: Cell
    entry: Port
    exit: Port


@dataclass(frozen=True)
class StrandPath:
    steps: Tuple[StrandStep, ...]
    closed: bool

    def __len__(self) -> int:
        return len(self.steps)

    def cells(self) -> List[Cell]:
        return [step.cell for step in self.steps]


@dataclass(frozen=True)
class DTSequence:
    """Signed even labels indexed by the odd labels 1, 3, 5, ..."""

    evens: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        magnitudes = sorted(abs(e) for e in self.evens)
        if magnitudes != list(range(2, 2 * len(self.evens) + 1, 2)):
            raise ValueError(
                f"DT entries must be a signed permutation of 2..{2 * len(self.evens)}: "
                f"{self.evens!r}"
            )

    @classmethod
    def parse(cls, text: str) -> "DTSequence":
        """Read ``4,6,2`` style text; ``()`` or blank is the empty sequence."""

        text = text.strip().strip("()").strip()
        if not text:
            return cls()
        try:
            return cls(tuple(int(part) for part in text.split(",")))
        except ValueError as exc:
            raise ValueError(f"not a DT sequence: {text!r}") from exc

    @property
    def crossing_count(self) -> int:
        return len(self.evens)

    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((2 * i + 1, abs(e)) for i, e in enumerate(self.evens))

    def shifted(self, offset: int, negate: bool = False) -> Tuple[int, ...]:
        """Entries relabelled by ``offset``; a fragment, not a sequence of its own."""

        sign = -1 if negate else 1
        return tuple(sign * (e + offset if e > 0 else e - offset) for e in self.evens)

    def __len__(self) -> int:
        return len(self.evens)

    def __iter__(self) -> Iterator[int]:
        return iter(self.evens)

    def __str__(self) -> str:
        if not self.evens:
            return "()"
        return ",".join(str(e) for e in self.evens)


def trace_strand(m: Mosaic, start: Start) -> StrandPath:
    """Follow the strand through ``start`` until it closes."""

    cell, entry = start
    if cell not in m:
        raise ValueError(f"start cell {cell} is outside the mosaic")
    steps: List[StrandStep] = []
    while True:
        exit_port = route(m[cell], entry)
        steps.append(StrandStep(cell, entry, exit_port))
        nxt = neighbour(cell, exit_port)
        if nxt not in m or exit_port.opposite not in ports(m[nxt]):
            raise OpenStrand(f"strand ends at {cell}:{exit_port.value}")
        cell, entry = nxt, exit_port.opposite
        if (cell, entry) == start:
            return StrandPath(steps=tuple(steps), closed=True)


def default_start(m: Mosaic) -> Start:
    """First knot tile in row-major order, entered at its first port."""

    for cell in m.knot_cells():
        first = min(ports(m[cell]), key=list(Port).index)
        return (cell, first)
    raise NotAKnot("mosaic has no strand to trace")


def passages(m: Mosaic, path: StrandPath) -> List[Passage]:
    """Crossing passages along ``path`` as ``(cell, on_top)`` pairs."""

    return [
        (step.cell, is_over(m[step.cell], step.entry))
        for step in path.steps
        if m[step.cell].is_crossing
    ]


def _dt_from_passages(sequence: Sequence[Passage]) -> DTSequence:
    labels: Dict[Hashable, List[Tuple[int, bool]]] = defaultdict(list)
    first_over = sequence[0][1] if sequence else False
    for label, (crossing, over) in enumerate(sequence, start=1):
        labels[crossing].append((label, over))

    evens: Dict[int, int] = {}
    for crossing, visits in labels.items():
        if len(visits) != 2:
            raise NotAKnot(
                f"crossing {crossing} passed {len(visits)} time(s); "
                "the strand is not a single closed component"
            )
        (a, a_over), (b, b_over) = visits
        if a % 2 == b % 2:
            raise DTParityError(f"crossing {crossing} labelled {a} and {b}")
        odd, even, even_over = (a, b, b_over) if a % 2 else (b, a, a_over)
        # positive when the even passage keeps the alternation set by passage 1
        evens[odd] = even if even_over != first_over else -even
    return DTSequence(tuple(evens[odd] for odd in sorted(evens)))


def _passages_from_dt(seq: DTSequence) -> List[Passage]:
    sequence: List[Optional[Passage]] = [None] * (2 * len(seq))
    for index, even in enumerate(seq.evens):
        odd = 2 * index + 1
        even_over = even < 0
        sequence[odd - 1] = (index, not even_over)
        sequence[abs(even) - 1] = (index, even_over)
    return [p for p in sequence if p is not None]


def _order_key(seq: DTSequence) -> Tuple[int, ...]:
    key: List[int] = []
    for even in seq.evens:
        key.extend((abs(even), 0 if even > 0 else 1))
    return tuple(key)


def canonical_form(seq: DTSequence) -> DTSequence:
    """Least relabelling of ``seq`` over every start and both directions.

    Entries compare by magnitude, then sign, with positive ahead of
    negative. Mirror images are not identified.
    """

    sequence = _passages_from_dt(seq)
    if not sequence:
        return seq
    candidates = []
    for oriented in (sequence, sequence[::-1]):
        for shift in range(len(oriented)):
            candidates.append(_dt_from_passages(oriented[shift:] + oriented[:shift]))
    return min(candidates, key=_order_key)


def dt_sequence(m: Mosaic, start: Optional[Start] = None, reverse: bool = False) -> DTSequence:
    """DT sequence read along the strand from ``start``.

    ``reverse`` walks the same strand the other way from the same tile.
    An even label is positive when its passage continues the over/under
    alternation that passage 1 starts, so every reading of an alternating
    diagram is all positive and the entry paired with 1 always is.
    """

    cell, entry = start if start is not None else default_start(m)
    if reverse:
        entry = route(m[cell], entry)
    path = trace_strand(m, (cell, entry))
    seq = _dt_from_passages(passages(m, path))
    logger.debug("dt from {}:{} -> {}", cell, entry.value, seq)
    return seq


def canonical_dt(m: Mosaic) -> DTSequence:
    return canonical_form(dt_sequence(m))


def dt_connect_sum(a: DTSequence, b: DTSequence, in_phase: bool = True) -> DTSequence:
    """``a`` followed by ``b`` relabelled past ``a``'s passages.

    ``in_phase=False`` is the join that breaks the alternation between the
    summands: ``b`` then reads with every sign flipped.
    """

    return DTSequence(a.evens + b.shifted(2 * len(a), negate=not in_phase))


def dt_strip_suffix(composite: DTSequence, known: DTSequence) -> DTSequence:
    """Remove the trailing summand ``known`` and return the prefix.

    The summand may sit in either phase against the prefix.
    """

    remaining = len(composite) - len(known)
    if remaining < 0:
        raise SuffixMismatch(
            f"summand has {len(known)} crossings, composite only {len(composite)}"
        )
    suffix = composite.evens[remaining:]
    expected = known.shifted(2 * remaining)
    if suffix != expected and suffix != known.shifted(2 * remaining, negate=True):
        shown = ",".join(str(e) for e in expected)
        raise SuffixMismatch(f"composite {composite} does not end with {shown} in either phase")
    try:
        return DTSequence(composite.evens[:remaining])
    except ValueError as exc:
        raise SuffixMismatch(f"prefix of {composite} is not self-contained") from exc


def splice_start(m: Mosaic, side: str) -> Start:
    """Where a connected sum enters ``m`` through the cap on ``side``."""

    site = find_splice_site(m, side)
    if side == SIDE_RIGHT:
        return ((site.row, site.column - 1), Port.EAST)
    return ((site.row + 1, site.column + 1), Port.WEST)


def splice_dt(m: Mosaic, side: str) -> DTSequence:
    """DT sequence of ``m`` as it reads inside a connected sum.

    ``right`` gives the left summand's labels, ``left`` the right summand's.
    """

    if side not in (SIDE_LEFT, SIDE_RIGHT):
        raise ValueError(f"unknown side {side!r}")
    return dt_sequence(m, splice_start(m, side))
