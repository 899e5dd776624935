"""Bundled knot-mosaic corpus and the symbol codebook built on it."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import BaseModel, ValidationError

from knot_mosaic.formats import load_kmos
from knot_mosaic.mosaic import Mosaic, crossing_number, validate
from knot_mosaic.trace import DTSequence, canonical_dt


MANIFEST_NAME = "index.json"

CHECK_VALIDATE = "validate"
CHECK_CHI = "chi"
CHECK_DT = "dt"
CHECK_BOUND = "bound"
CHECK_DISTINCT = "distinct"


class UnknownKnot(KeyError):
    """Raised when a knot id is not in the corpus."""


class UnknownSymbol(KeyError):
    """Raised when a message symbol has no codebook entry."""


class CorpusError(ValueError):
    """Raised when a corpus directory or manifest cannot be read."""


class ManifestEntry(BaseModel):
    id: str
    file: str
    chi: int
    dt: Optional[str] = None
    prime: bool = True
    mirror_of: Optional[str] = None
    provenance: str = ""


class Manifest(BaseModel):
    version: int = 1
    entries: List[ManifestEntry]


@dataclass(frozen=True)
class KnotEntry:
    """One corpus knot; ``canonical_dt`` is the recorded value."""

    id: str
    mosaic: Mosaic
    chi: int
    canonical_dt: DTSequence
    provenance: str = ""
    prime: bool = True
    mirror_of: Optional[str] = None

    @property
    def is_codebook_candidate(self) -> bool:
        return self.prime and self.mirror_of is None

    def to_dict(self) -> Dict[str, object]:
        return {
            "id": self.id,
            "rows": self.mosaic.rows,
            "cols": self.mosaic.cols,
            "chi": self.chi,
            "dt": str(self.canonical_dt),
            "prime": self.prime,
            "mirror_of": self.mirror_of,
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class CorpusFailure:
    id: str
    check: str
    detail: str

    def __str__(self) -> str:
        return f"{self.id}: {self.check}: {self.detail}"


@dataclass(frozen=True)
class CorpusReport:
    checked: Tuple[str, ...] = ()
    failures: Tuple[CorpusFailure, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, object]:
        return {
            "status": "ok" if self.ok else "failed",
            "checked": list(self.checked),
            "failures": [
                {"id": f.id, "check": f.check, "detail": f.detail} for f in self.failures
            ],
        }


class Corpus:
    """Read-only collection of knot entries keyed by id."""

    def __init__(self, entries: Iterable[KnotEntry], source: Optional[str] = None) -> None:
        self._entries: Dict[str, KnotEntry] = {}
        for entry in entries:
            if entry.id in self._entries:
                raise CorpusError(f"duplicate knot id {entry.id!r}")
            self._entries[entry.id] = entry
        self.source = source

    def lookup(self, knot_id: str) -> KnotEntry:
        try:
            return self._entries[knot_id]
        except KeyError:
            raise UnknownKnot(knot_id) from None

    def ids(self) -> List[str]:
        return list(self._entries)

    def primes(self) -> List[KnotEntry]:
        """Prime entries that are not mirrors of another entry."""

        return [e for e in self._entries.values() if e.is_codebook_candidate]

    def __iter__(self) -> Iterator[KnotEntry]:
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, knot_id: object) -> bool:
        return knot_id in self._entries


def bundled_corpus_dir() -> Path:
    return Path(str(resources.files("knot_mosaic") / "corpus"))


def load_corpus(directory: Optional[Path] = None) -> Corpus:
    """Load ``index.json`` and its ``.kmos`` files from ``directory``."""

    root = Path(directory) if directory is not None else bundled_corpus_dir()
    manifest_path = root / MANIFEST_NAME
    try:
        manifest = Manifest.model_validate_json(manifest_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CorpusError(f"cannot read corpus manifest {manifest_path}: {exc}") from exc
    except ValidationError as exc:
        raise CorpusError(f"malformed corpus manifest {manifest_path}: {exc}") from exc

    entries = []
    for item in manifest.entries:
        mosaic = load_kmos(root / item.file)
        recorded = DTSequence.parse(item.dt) if item.dt is not None else canonical_dt(mosaic)
        entries.append(
            KnotEntry(
                id=item.id,
                mosaic=mosaic,
                chi=item.chi,
                canonical_dt=recorded,
                provenance=item.provenance,
                prime=item.prime,
                mirror_of=item.mirror_of,
            )
        )
    logger.debug("loaded {} corpus entries from {}", len(entries), root)
    return Corpus(entries, source=str(root))


def corpus_check(corpus: Corpus) -> CorpusReport:
    """Re-derive validity, crossing number and canonical DT for each entry."""

    failures: List[CorpusFailure] = []
    checked: List[str] = []
    distinct: Dict[DTSequence, str] = {}

    for entry in corpus:
        checked.append(entry.id)
        m = entry.mosaic
        report = validate(m)
        if not report.is_valid:
            detail = "; ".join(str(v) for v in report.violations) or report.status
            failures.append(CorpusFailure(entry.id, CHECK_VALIDATE, detail))
        chi = crossing_number(m)
        if chi != entry.chi:
            failures.append(
                CorpusFailure(entry.id, CHECK_CHI, f"recorded {entry.chi}, found {chi}")
            )
        if m.rows * m.cols > 8 * max(chi, 1):
            failures.append(
                CorpusFailure(entry.id, CHECK_BOUND, f"{m.rows}x{m.cols} exceeds 8*{chi}")
            )
        if not report.is_valid:
            continue

        computed = canonical_dt(m)
        if computed != entry.canonical_dt:
            failures.append(
                CorpusFailure(
                    entry.id, CHECK_DT, f"recorded {entry.canonical_dt}, computed {computed}"
                )
            )
        if entry.is_codebook_candidate:
            other = distinct.setdefault(computed, entry.id)
            if other != entry.id:
                failures.append(
                    CorpusFailure(entry.id, CHECK_DISTINCT, f"same canonical DT as {other}")
                )

    for failure in failures:
        logger.warning("corpus check: {}", failure)
    return CorpusReport(checked=tuple(checked), failures=tuple(failures))


def _digits_needed(base: int) -> int:
    digits, reach = 1, base
    while reach < 256:
        digits += 1
        reach *= base
    return digits


@dataclass(frozen=True)
class Codebook:
    """Symbol ``i`` stands for knot ``knot_ids[i]``."""

    knot_ids: Tuple[str, ...]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.knot_ids) < 2:
            raise ValueError("a codebook needs at least two knots")
        if len(set(self.knot_ids)) != len(self.knot_ids):
            raise ValueError(f"codebook is not injective: {self.knot_ids}")
        object.__setattr__(self, "_index", {k: i for i, k in enumerate(self.knot_ids)})

    @property
    def size(self) -> int:
        return len(self.knot_ids)

    @property
    def mapping(self) -> Dict[int, str]:
        return dict(enumerate(self.knot_ids))

    @property
    def digits_per_byte(self) -> int:
        return _digits_needed(self.size)

    def id_for(self, symbol: int) -> str:
        if not 0 <= symbol < self.size:
            raise UnknownSymbol(symbol)
        return self.knot_ids[symbol]

    def symbol_for(self, knot_id: str) -> int:
        try:
            return self._index[knot_id]
        except KeyError:
            raise UnknownKnot(knot_id) from None

    def check(self, corpus: Corpus) -> None:
        for knot_id in self.knot_ids:
            corpus.lookup(knot_id)

    def encode_text(self, text: str) -> List[int]:
        """UTF-8 bytes written as fixed-width base-``size`` digits."""

        symbols: List[int] = []
        width = self.digits_per_byte
        for byte in text.encode("utf-8"):
            digits = []
            for _ in range(width):
                byte, digit = divmod(byte, self.size)
                digits.append(digit)
            symbols.extend(reversed(digits))
        return symbols

    def decode_text(self, symbols: Sequence[int]) -> str:
        width = self.digits_per_byte
        if len(symbols) % width:
            raise ValueError(f"symbol count {len(symbols)} is not a multiple of {width}")
        data = bytearray()
        for start in range(0, len(symbols), width):
            value = 0
            for digit in symbols[start:start + width]:
                if not 0 <= digit < self.size:
                    raise UnknownSymbol(digit)
                value = value * self.size + digit
            if value > 255:
                raise ValueError(f"digits {symbols[start:start + width]} exceed one byte")
            data.append(value)
        return data.decode("utf-8")


def default_codebook(corpus: Corpus) -> Codebook:
    """Prime, non-mirror entries ordered by crossing number then id."""

    entries = sorted(corpus.primes(), key=lambda e: (e.chi, e.id))
    return Codebook(tuple(e.id for e in entries))
