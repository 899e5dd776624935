"""Simulation of the knot-based hybrid protocol.

Step I moves a session key (ordered corpus knots plus one optional
mutation region each) under toy RSA. Step II turns every message symbol
into the connected sum ``L # K'`` of its codebook knot with the mutated
session knot and ships it as a mosaic bitstring. Step III decodes,
validates, strips the known summand from the DT sequence and looks the
prefix up in the codebook.

The RSA layer is demo scale and offers no security whatsoever.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import BaseModel, Field, ValidationError
from sympy import mod_inverse, nextprime

from knot_mosaic.codec import BitString, DecodeReport, LengthMismatch, decode_mosaic, encode_mosaic
from knot_mosaic.knotlib import Codebook, Corpus, UnknownKnot
from knot_mosaic.mosaic import (
    SIDE_LEFT,
    Mosaic,
    NoSpliceSite,
    NotAKnot,
    Region,
    bounding_box,
    connect_sum,
    crop,
    find_splice_site,
    is_tangle,
    mutate,
    mutation_regions,
    pad_to_square,
    validate,
)
from knot_mosaic.tiles import Port, Tile, ports
from knot_mosaic.trace import (
    DTSequence,
    SuffixMismatch,
    canonical_dt,
    canonical_form,
    dt_sequence,
    dt_strip_suffix,
    splice_dt,
)


STAGE_CODEC = "codec"
STAGE_VALIDATOR = "validator"
STAGE_STRIP = "strip"

OUTCOME_CLEAN = "delivered_clean"
OUTCOME_CODEC = "detected_codec"
OUTCOME_VALIDATOR = "detected_validator"
OUTCOME_STRIP = "detected_strip"
OUTCOME_MISS = "undetected_miss"
OUTCOMES = (OUTCOME_CLEAN, OUTCOME_CODEC, OUTCOME_VALIDATOR, OUTCOME_STRIP, OUTCOME_MISS)

_STAGE_OUTCOME = {
    STAGE_CODEC: OUTCOME_CODEC,
    STAGE_VALIDATOR: OUTCOME_VALIDATOR,
    STAGE_STRIP: OUTCOME_STRIP,
}

DEFAULT_PRIME_BITS = 16
DEFAULT_PUBLIC_EXPONENT = 65537


class PlaintextTooLarge(ValueError):
    """Raised when an RSA input falls outside ``[0, n)``."""


class InvalidSession(ValueError):
    """Raised when a session key references unusable knots or regions."""


class KeyExchangeCorrupt(ValueError):
    """Raised when the step I wire payload does not decode to a session."""


class UnknownPrefix(ValueError):
    """Raised when a stripped prefix matches no codebook knot."""

    def __init__(self, block: int, prefix: DTSequence) -> None:
        super().__init__(f"block {block}: prefix {prefix} matches no codebook knot")
        self.block = block
        self.prefix = prefix


@dataclass(frozen=True)
class TamperReport:
    block: int
    stage: str
    detail: str

    def to_dict(self) -> Dict[str, object]:
        return {"block": self.block, "stage": self.stage, "detail": self.detail}

    def __str__(self) -> str:
        return f"block {self.block}: {self.stage}: {self.detail}"


class TamperDetected(ValueError):
    """Raised by step III when a block fails decoding, validation or stripping."""

    def __init__(self, report: TamperReport) -> None:
        super().__init__(str(report))
        self.report = report


# -- toy RSA -----------------------------------------------------------------

@dataclass(frozen=True)
class ToyRsaKeys:
    n: int
    e: int
    d: int

    @property
    def block_bytes(self) -> int:
        return (self.n.bit_length() + 7) // 8


def rsa_keys_from_primes(p: int, q: int, e: int = 17) -> ToyRsaKeys:
    """Textbook key pair; ``d`` is the inverse of ``e`` modulo (p-1)(q-1)."""

    if p == q:
        raise ValueError("p and q must differ")
    phi = (p - 1) * (q - 1)
    if gcd(e, phi) != 1:
        raise ValueError(f"e={e} is not coprime to (p-1)(q-1)={phi}")
    return ToyRsaKeys(n=p * q, e=e, d=int(mod_inverse(e, phi)))


def rsa_keygen(seed: int, bits: int = DEFAULT_PRIME_BITS) -> ToyRsaKeys:
    """Deterministic demo key pair from two ``bits``-bit primes."""

    rng = random.Random(seed)
    low, high = 2 ** (bits - 1), 2**bits
    p = int(nextprime(rng.randrange(low, high)))
    q = p
    while q == p:
        q = int(nextprime(rng.randrange(low, high)))
    phi = (p - 1) * (q - 1)
    e = DEFAULT_PUBLIC_EXPONENT
    while gcd(e, phi) != 1:
        e += 2
    return rsa_keys_from_primes(p, q, e)


def _check_range(keys: ToyRsaKeys, value: int) -> None:
    if not 0 <= value < keys.n:
        raise PlaintextTooLarge(f"{value} is outside [0, {keys.n})")


def rsa_encrypt(keys: ToyRsaKeys, plaintext: int) -> int:
    _check_range(keys, plaintext)
    return pow(plaintext, keys.e, keys.n)


def rsa_decrypt(keys: ToyRsaKeys, ciphertext: int) -> int:
    _check_range(keys, ciphertext)
    return pow(ciphertext, keys.d, keys.n)


# -- session keys (step I) ---------------------------------------------------

@dataclass(frozen=True)
class SessionKey:
    """Ordered session knots with one optional mutation region each."""

    knot_ids: Tuple[str, ...]
    mutations: Tuple[Optional[Region], ...]

    def __post_init__(self) -> None:
        if len(self.knot_ids) != len(self.mutations):
            raise InvalidSession(
                f"{len(self.knot_ids)} knots but {len(self.mutations)} mutation slots"
            )

    def check(self, corpus: Corpus) -> None:
        for knot_id, region in zip(self.knot_ids, self.mutations):
            try:
                mosaic = corpus.lookup(knot_id).mosaic
            except UnknownKnot:
                raise InvalidSession(f"unknown session knot {knot_id!r}") from None
            if region is not None and not is_tangle(mosaic, region):
                raise InvalidSession(f"region {region} is not a tangle of {knot_id}")

    def to_dict(self) -> Dict[str, object]:
        return SessionKeyModel.from_session(self).model_dump()


class RegionModel(BaseModel):
    row: int = Field(ge=0)
    col: int = Field(ge=0)
    height: int = Field(ge=1)
    width: int = Field(ge=1)


class SessionKeyModel(BaseModel):
    """Wire form of a session key."""

    knot_ids: List[str]
    mutations: List[Optional[RegionModel]]

    @classmethod
    def from_session(cls, session: SessionKey) -> "SessionKeyModel":
        return cls(
            knot_ids=list(session.knot_ids),
            mutations=[
                None if r is None else RegionModel(**r.to_dict()) for r in session.mutations
            ],
        )

    def to_session(self) -> SessionKey:
        return SessionKey(
            knot_ids=tuple(self.knot_ids),
            mutations=tuple(
                None if r is None else Region(r.row, r.col, r.height, r.width)
                for r in self.mutations
            ),
        )


def derive_session_knots(session: SessionKey, corpus: Corpus) -> List[Mosaic]:
    """K'_i: each session knot after its mutation, if any."""

    knots = []
    for knot_id, region in zip(session.knot_ids, session.mutations):
        mosaic = corpus.lookup(knot_id).mosaic
        knots.append(mosaic if region is None else mutate(mosaic, region))
    return knots


def session_candidates(corpus: Corpus) -> List[str]:
    """Prime corpus knots that can sit on the right of a connected sum."""

    ids = []
    for entry in corpus:
        if not entry.prime:
            continue
        try:
            find_splice_site(entry.mosaic, SIDE_LEFT)
        except NoSpliceSite:
            continue
        ids.append(entry.id)
    return sorted(ids)


def _summand_shape(mosaic: Mosaic) -> Tuple[int, Tuple[Tuple[Optional[Tile], ...], ...]]:
    """Cap row and knot tiles of ``mosaic`` as they land right of a splice."""

    cropped = crop(mosaic, bounding_box(mosaic))  # type: ignore[arg-type]
    site = find_splice_site(cropped, SIDE_LEFT)
    tiles = tuple(
        tuple(t if t.is_knot_tile else None for t in row[1:]) for row in cropped.grid
    )
    return site.row, tiles


def _changes_summand(mosaic: Mosaic, region: Region) -> bool:
    """Whether mutating ``region`` keeps the left cap and alters the shipped tiles."""

    try:
        return _summand_shape(mutate(mosaic, region)) != _summand_shape(mosaic)
    except NoSpliceSite:
        return False


def random_session(corpus: Corpus, length: int, seed: int) -> SessionKey:
    """Seeded session of ``length`` knots, each mutated or left alone.

    Only regions whose half turn changes the tiles a ciphertext carries are
    drawn, so a mutated slot never equals its plain knot.
    """

    if length < 1:
        raise ValueError("session length must be at least 1")
    rng = random.Random(seed)
    candidates = session_candidates(corpus)
    if not candidates:
        raise InvalidSession("corpus has no knot with a left splice site")
    regions_by_id: Dict[str, List[Region]] = {}
    knot_ids: List[str] = []
    mutations: List[Optional[Region]] = []
    for _ in range(length):
        knot_id = rng.choice(candidates)
        if knot_id not in regions_by_id:
            mosaic = corpus.lookup(knot_id).mosaic
            regions_by_id[knot_id] = [
                r for r in mutation_regions(mosaic) if _changes_summand(mosaic, r)
            ]
        options: List[Optional[Region]] = [None]
        options.extend(regions_by_id[knot_id])
        knot_ids.append(knot_id)
        mutations.append(rng.choice(options))
    return SessionKey(tuple(knot_ids), tuple(mutations))


def step1_exchange(receiver: ToyRsaKeys, session: SessionKey) -> bytes:
    """Serialize ``session`` and encrypt it byte by byte for ``receiver``."""

    payload = SessionKeyModel.from_session(session).model_dump_json().encode("utf-8")
    width = receiver.block_bytes
    wire = b"".join(rsa_encrypt(receiver, byte).to_bytes(width, "big") for byte in payload)
    logger.debug("step I: {} payload bytes -> {} wire bytes", len(payload), len(wire))
    return wire


def step1_receive(keys: ToyRsaKeys, wire: bytes, corpus: Corpus) -> SessionKey:
    """Inverse of step1_exchange on the key owner's side."""

    width = keys.block_bytes
    if len(wire) % width:
        raise KeyExchangeCorrupt(f"wire length {len(wire)} is not a multiple of {width}")
    payload = bytearray()
    for start in range(0, len(wire), width):
        block = int.from_bytes(wire[start:start + width], "big")
        if block >= keys.n:
            raise KeyExchangeCorrupt(f"block at byte {start} exceeds the modulus")
        value = rsa_decrypt(keys, block)
        if value > 255:
            raise KeyExchangeCorrupt(f"block at byte {start} does not decrypt to a byte")
        payload.append(value)
    try:
        session = SessionKeyModel.model_validate_json(bytes(payload)).to_session()
        session.check(corpus)
    except (ValidationError, InvalidSession) as exc:
        raise KeyExchangeCorrupt(f"session payload rejected: {exc}") from exc
    return session


# -- ciphertext (steps II and III) -------------------------------------------

@dataclass(frozen=True)
class CipherBlock:
    n: int
    bits: BitString

    def __post_init__(self) -> None:
        if len(self.bits) != 4 * self.n * self.n:
            raise LengthMismatch(f"block of n={self.n} needs {4 * self.n * self.n} bits")


@dataclass(frozen=True)
class Ciphertext:
    blocks: Tuple[CipherBlock, ...] = ()

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, BitString]]) -> "Ciphertext":
        return cls(tuple(CipherBlock(n, bits) for n, bits in pairs))

    def pairs(self) -> List[Tuple[int, BitString]]:
        return [(block.n, block.bits) for block in self.blocks]

    def __len__(self) -> int:
        return len(self.blocks)


def step2_encrypt(
    message: Sequence[int],
    session: SessionKey,
    corpus: Corpus,
    codebook: Codebook,
) -> Ciphertext:
    """One ``L_i # K'_i`` block per symbol; session knots repeat cyclically."""

    if not message:
        return Ciphertext()
    if not session.knot_ids:
        raise InvalidSession("cannot encrypt with an empty session")
    session_knots = derive_session_knots(session, corpus)
    blocks = []
    for index, symbol in enumerate(message):
        summand = corpus.lookup(codebook.id_for(symbol)).mosaic
        composite = pad_to_square(connect_sum(summand, session_knots[index % len(session_knots)]))
        blocks.append(CipherBlock(composite.rows, encode_mosaic(composite)))
    logger.debug("step II: {} symbol(s) -> {} block(s)", len(message), len(blocks))
    return Ciphertext(tuple(blocks))


@dataclass(frozen=True)
class _SessionSummand:
    tiles: Mosaic
    cap_row: int
    dt: DTSequence

    @property
    def width(self) -> int:
        return self.tiles.cols

    def matches(self, decoded: Mosaic, row: int, junction: int) -> bool:
        """Whether ``decoded`` holds exactly these tiles right of ``junction``.

        ``row`` is the upper splice row; column 0 of ``tiles`` is the cap
        the connected sum dropped.
        """

        expected = 0
        for r in range(self.tiles.rows):
            for c in range(1, self.tiles.cols):
                tile = self.tiles[(r, c)]
                cell = (row - self.cap_row + r, junction + c)
                if not tile.is_knot_tile:
                    continue
                expected += 1
                if cell not in decoded or decoded[cell] != tile:
                    return False
        found = sum(1 for _, col in decoded.knot_cells() if col > junction)
        return found == expected


class Receiver:
    """Key owner's view for step III: session summands and codebook DTs."""

    def __init__(self, session: SessionKey, corpus: Corpus, codebook: Codebook) -> None:
        if not session.knot_ids:
            raise InvalidSession("cannot decrypt with an empty session")
        self.session = session
        self.codebook = codebook
        self._summands: List[_SessionSummand] = []
        for mosaic in derive_session_knots(session, corpus):
            cropped = crop(mosaic, bounding_box(mosaic))  # type: ignore[arg-type]
            site = find_splice_site(cropped, SIDE_LEFT)
            self._summands.append(
                _SessionSummand(cropped, site.row, splice_dt(mosaic, SIDE_LEFT))
            )
        self._symbols: Dict[DTSequence, int] = {}
        for symbol, knot_id in codebook.mapping.items():
            self._symbols[canonical_dt(corpus.lookup(knot_id).mosaic)] = symbol

    def _fail(self, index: int, stage: str, detail: str) -> TamperDetected:
        report = TamperReport(index, stage, detail)
        logger.debug("tamper detected: {}", report)
        return TamperDetected(report)

    def decrypt_block(self, index: int, block: CipherBlock) -> int:
        try:
            decoded = decode_mosaic(block.bits, block.n)
        except LengthMismatch as exc:
            raise self._fail(index, STAGE_CODEC, str(exc)) from exc
        if isinstance(decoded, DecodeReport):
            raise self._fail(
                index, STAGE_CODEC,
                f"invalid codewords at spiral positions {list(decoded.positions)}",
            )

        report = validate(decoded)
        if not report.is_valid:
            detail = "; ".join(str(v) for v in report.violations) or report.status
            raise self._fail(index, STAGE_VALIDATOR, detail)

        summand = self._summands[index % len(self._summands)]
        top, left, bottom, right = bounding_box(decoded)  # type: ignore[misc]
        junction = right - summand.width + 1
        if junction <= left:
            raise self._fail(index, STAGE_STRIP, "composite is narrower than the session knot")
        rows = [r for r in range(top, bottom + 1) if Port.EAST in ports(decoded[(r, junction)])]
        if len(rows) != 2 or rows[1] != rows[0] + 1:
            raise self._fail(index, STAGE_STRIP, f"no splice junction at column {junction}")
        if not summand.matches(decoded, rows[0], junction):
            raise self._fail(index, STAGE_STRIP, "right summand is not the session knot")

        try:
            composite = dt_sequence(decoded, ((rows[0], junction), Port.EAST))
            prefix = dt_strip_suffix(composite, summand.dt)
        except (SuffixMismatch, NotAKnot) as exc:
            raise self._fail(index, STAGE_STRIP, str(exc)) from exc

        symbol = self._symbols.get(canonical_form(prefix))
        if symbol is None:
            logger.debug("block {}: unknown prefix {}", index, prefix)
            raise UnknownPrefix(index, prefix)
        return symbol

    def decrypt(self, ciphertext: Ciphertext) -> List[int]:
        return [self.decrypt_block(i, block) for i, block in enumerate(ciphertext.blocks)]


def step3_decrypt(
    ciphertext: Ciphertext,
    session: SessionKey,
    corpus: Corpus,
    codebook: Codebook,
) -> List[int]:
    """Recover message symbols; raises TamperDetected or UnknownPrefix."""

    if not ciphertext.blocks:
        return []
    return Receiver(session, corpus, codebook).decrypt(ciphertext)


# -- noisy channel -----------------------------------------------------------

@dataclass(frozen=True)
class ChannelModel:
    """Independent per-bit flips, reproducible from ``rng_seed``."""

    flip_probability: float
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.flip_probability <= 1.0:
            raise ValueError(f"flip probability must be in [0, 1], got {self.flip_probability}")

    def flips(self, trial: int, block_index: int, length: int) -> List[int]:
        rng = random.Random(f"{self.rng_seed}:{trial}:{block_index}:{length}")
        return [i for i in range(length) if rng.random() < self.flip_probability]


@dataclass
class ChannelStatistics:
    """Outcome counts keyed by the number of bits flipped in a block."""

    counts: Dict[int, Dict[str, int]] = field(default_factory=dict)

    def record(self, weight: int, outcome: str) -> None:
        row = self.counts.setdefault(weight, {name: 0 for name in OUTCOMES})
        row[outcome] += 1

    def total(self, outcome: str) -> int:
        return sum(row[outcome] for row in self.counts.values())

    @property
    def blocks(self) -> int:
        return sum(sum(row.values()) for row in self.counts.values())

    def to_dict(self) -> Dict[str, object]:
        return {
            "blocks": self.blocks,
            "by_weight": {str(w): dict(self.counts[w]) for w in sorted(self.counts)},
            "totals": {name: self.total(name) for name in OUTCOMES},
        }

    def table(self) -> str:
        header = ["flips"] + list(OUTCOMES)
        lines = ["  ".join(f"{h:>18}" for h in header)]
        for weight in sorted(self.counts):
            row = self.counts[weight]
            cells = [str(weight)] + [str(row[name]) for name in OUTCOMES]
            lines.append("  ".join(f"{c:>18}" for c in cells))
        return "\n".join(lines)


def classify_block(receiver: Receiver, index: int, block: CipherBlock, expected: int) -> str:
    """Outcome class of one received block against the symbol sent."""

    try:
        symbol = receiver.decrypt_block(index, block)
    except TamperDetected as exc:
        return _STAGE_OUTCOME[exc.report.stage]
    except UnknownPrefix:
        return OUTCOME_STRIP
    return OUTCOME_CLEAN if symbol == expected else OUTCOME_MISS


def channel_experiment(
    ciphertext: Ciphertext,
    channel: ChannelModel,
    trials: int,
    receiver: Receiver,
) -> ChannelStatistics:
    """Send ``ciphertext`` through ``channel`` ``trials`` times and classify."""

    if trials < 1:
        raise ValueError("trials must be at least 1")
    expected = receiver.decrypt(ciphertext)
    stats = ChannelStatistics()
    for trial in range(trials):
        for index, block in enumerate(ciphertext.blocks):
            positions = channel.flips(trial, index, len(block.bits))
            received = CipherBlock(block.n, block.bits.flip(*positions))
            stats.record(len(positions), classify_block(receiver, index, received, expected[index]))
    logger.debug("channel experiment: {}", stats.to_dict()["totals"])
    return stats


def single_flip_sweep(ciphertext: Ciphertext, receiver: Receiver) -> ChannelStatistics:
    """Flip every bit of every block once, one at a time."""

    expected = receiver.decrypt(ciphertext)
    stats = ChannelStatistics()
    for index, block in enumerate(ciphertext.blocks):
        for position in range(len(block.bits)):
            received = CipherBlock(block.n, block.bits.flip(position))
            stats.record(1, classify_block(receiver, index, received, expected[index]))
    return stats


# -- end-to-end run ----------------------------------------------------------

@dataclass
class ProtocolRun:
    """Artifacts of one step I to III pass."""

    keys: ToyRsaKeys
    session: SessionKey
    wire: bytes
    symbols: List[int]
    ciphertext: Ciphertext
    received: Ciphertext
    decoded_symbols: Optional[List[int]] = None
    text: Optional[str] = None
    tamper: Optional[TamperReport] = None
    unknown_prefix: Optional[str] = None

    @property
    def delivered(self) -> bool:
        return self.text is not None


def run_protocol(
    message: str,
    corpus: Corpus,
    codebook: Codebook,
    seed: int = 0,
    session_length: int = 3,
    flip: Optional[int] = None,
) -> ProtocolRun:
    """Full exchange for a text ``message``; ``flip`` inverts one bit in transit.

    The flip index counts across the concatenated block bits.
    """

    # B picks the session and sends it under A's public key; A encrypts
    # the message with it and B, who kept the session, decrypts.
    keys = rsa_keygen(seed)
    sent_session = random_session(corpus, session_length, seed)
    wire = step1_exchange(keys, sent_session)
    session = step1_receive(keys, wire, corpus)

    symbols = codebook.encode_text(message)
    ciphertext = step2_encrypt(symbols, session, corpus, codebook)
    received = ciphertext
    if flip is not None:
        received = _flip_global(ciphertext, flip)

    run = ProtocolRun(keys, session, wire, symbols, ciphertext, received)
    try:
        run.decoded_symbols = step3_decrypt(received, sent_session, corpus, codebook)
    except TamperDetected as exc:
        logger.warning("step III rejected the ciphertext: {}", exc.report)
        run.tamper = exc.report
        return run
    except UnknownPrefix as exc:
        logger.warning("step III: {}", exc)
        run.unknown_prefix = str(exc)
        return run
    run.text = codebook.decode_text(run.decoded_symbols)
    return run


def _flip_global(ciphertext: Ciphertext, position: int) -> Ciphertext:
    total = sum(len(b.bits) for b in ciphertext.blocks)
    if not 0 <= position < total:
        raise ValueError(f"flip index {position} is outside the {total} ciphertext bits")
    blocks = list(ciphertext.blocks)
    for index, block in enumerate(blocks):
        if position < len(block.bits):
            blocks[index] = CipherBlock(block.n, block.bits.flip(position))
            break
        position -= len(block.bits)
    return Ciphertext(tuple(blocks))
