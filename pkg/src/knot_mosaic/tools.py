"""Dict-returning operations behind the MCP tools."""

from __future__ import annotations

from typing import Any, Dict, Optional

from knot_mosaic.codec import DecodeReport, decode_mosaic, encode_mosaic
from knot_mosaic.formats import (
    FORMAT_BIN,
    FormatError,
    format_bits,
    format_kmos,
    parse_bits,
    parse_kmos,
)
from knot_mosaic.knotlib import Codebook, Corpus, default_codebook
from knot_mosaic.mosaic import connect_sum, pad_to_square, validate
from knot_mosaic.protocol import SessionKeyModel, run_protocol
from knot_mosaic.render import render_ascii, render_svg
from knot_mosaic.trace import canonical_dt

STATUS_OK = "ok"
STATUS_ERROR = "error"
STATUS_TAMPERED = "tampered"


def _error(exc: Exception) -> Dict[str, Any]:
    return {"status": STATUS_ERROR, "error": str(exc), "error_type": type(exc).__name__}


class MosaicTools:
    """Mosaic operations over one loaded corpus."""

    def __init__(self, corpus: Corpus, codebook: Optional[Codebook] = None,
                 session_length: int = 3) -> None:
        self._corpus = corpus
        self._codebook = codebook or default_codebook(corpus)
        self._session_length = session_length

    def validate_mosaic(self, kmos_text: str) -> Dict[str, Any]:
        try:
            m = parse_kmos(kmos_text)
        except FormatError as exc:
            return _error(exc)
        return validate(m).to_dict()

    def encode_mosaic(self, kmos_text: str, fmt: str = FORMAT_BIN) -> Dict[str, Any]:
        try:
            m = pad_to_square(parse_kmos(kmos_text))
            text = format_bits(encode_mosaic(m), m.rows, fmt)
        except ValueError as exc:
            return _error(exc)
        return {"status": STATUS_OK, "n": m.rows, "bits": text}

    def decode_bits(self, text: str, n: Optional[int] = None) -> Dict[str, Any]:
        try:
            bits, declared = parse_bits(text)
            size = n if n is not None else declared
            if size is None:
                raise ValueError("raw bitstrings need n")
            decoded = decode_mosaic(bits, size)
        except ValueError as exc:
            return _error(exc)
        if isinstance(decoded, DecodeReport):
            return decoded.to_dict()
        return {"status": STATUS_OK, "kmos": format_kmos(decoded)}

    def canonical_dt(self, kmos_text: str) -> Dict[str, Any]:
        try:
            m = parse_kmos(kmos_text)
        except FormatError as exc:
            return _error(exc)
        report = validate(m)
        if not report.is_valid:
            return {"status": report.status, "error": "DT needs a valid knot mosaic"}
        return {"status": STATUS_OK, "dt": str(canonical_dt(m)), "crossings": report.crossing_count}

    def compose_mosaics(self, left: str, right: str, pad: bool = True) -> Dict[str, Any]:
        try:
            result = connect_sum(parse_kmos(left, "<left>"), parse_kmos(right, "<right>"))
        except ValueError as exc:
            return _error(exc)
        if pad:
            result = pad_to_square(result)
        return {"status": STATUS_OK, "kmos": format_kmos(result)}

    def render_mosaic(self, kmos_text: str, svg: bool = False) -> Dict[str, Any]:
        try:
            m = parse_kmos(kmos_text)
        except FormatError as exc:
            return _error(exc)
        key = "svg" if svg else "ascii"
        return {"status": STATUS_OK, key: render_svg(m) if svg else render_ascii(m)}

    def list_corpus(self) -> Dict[str, Any]:
        return {
            "status": STATUS_OK,
            "source": self._corpus.source,
            "codebook": list(self._codebook.knot_ids),
            "knots": [entry.to_dict() for entry in self._corpus],
        }

    def protocol_roundtrip(self, message: str, seed: int = 0,
                           flip: Optional[int] = None) -> Dict[str, Any]:
        try:
            run = run_protocol(message, self._corpus, self._codebook, seed=seed,
                               session_length=self._session_length, flip=flip)
        except ValueError as exc:
            return _error(exc)
        result: Dict[str, Any] = {
            "status": STATUS_OK,
            "session": SessionKeyModel.from_session(run.session).model_dump(),
            "symbols": run.symbols,
            "blocks": len(run.ciphertext),
            "message": run.text,
        }
        if run.tamper is not None:
            result.update(status=STATUS_TAMPERED, tamper=run.tamper.to_dict())
        elif run.unknown_prefix is not None:
            result.update(status=STATUS_TAMPERED, error=run.unknown_prefix)
        return result
