"""FastMCP server entrypoint for knot_mosaic."""

from __future__ import annotations

from typing import Any, Dict, Optional

from knot_mosaic.config import Settings, configure_logging
from knot_mosaic.formats import FORMAT_BIN
from knot_mosaic.knotlib import load_corpus
from knot_mosaic.tools import MosaicTools


def create_server() -> Any:
    """Create and configure the FastMCP server instance."""

    try:
        from mcp.server.fastmcp import FastMCP
    except ImportError as exc:  # pragma: no cover
        raise ImportError(
            "mcp is required. Install dependencies with `uv sync`."
        ) from exc

    settings = Settings()
    configure_logging(settings.log_level)
    tools = MosaicTools(load_corpus(settings.corpus_dir), session_length=settings.session_length)

    mcp = FastMCP("knot-mosaic")

    @mcp.tool()
    def validate_mosaic(kmos_text: str) -> Dict[str, Any]:
        """Check a .kmos mosaic against the knot mosaic rules."""

        return tools.validate_mosaic(kmos_text)

    @mcp.tool()
    def encode_mosaic(kmos_text: str, fmt: str = FORMAT_BIN) -> Dict[str, Any]:
        """Encode a mosaic as a bitstring ("bin" or "hex")."""

        return tools.encode_mosaic(kmos_text, fmt)

    @mcp.tool()
    def decode_bits(text: str, n: Optional[int] = None) -> Dict[str, Any]:
        """Decode a bitstring into .kmos text, or report corrupt codewords.

        Raw 0/1 input needs n; hex input carries n in its header.
        """

        return tools.decode_bits(text, n)

    @mcp.tool()
    def canonical_dt(kmos_text: str) -> Dict[str, Any]:
        """Canonical Dowker-Thistlethwaite sequence of a valid mosaic."""

        return tools.canonical_dt(kmos_text)

    @mcp.tool()
    def compose_mosaics(left: str, right: str, pad: bool = True) -> Dict[str, Any]:
        """Connected sum of two knot mosaics."""

        return tools.compose_mosaics(left, right, pad)

    @mcp.tool()
    def render_mosaic(kmos_text: str, svg: bool = False) -> Dict[str, Any]:
        """Draw a mosaic as ASCII art or SVG."""

        return tools.render_mosaic(kmos_text, svg)

    @mcp.tool()
    def list_corpus() -> Dict[str, Any]:
        """List bundled knots and the message codebook."""

        return tools.list_corpus()

    @mcp.tool()
    def protocol_roundtrip(
        message: str, seed: int = 0, flip: Optional[int] = None
    ) -> Dict[str, Any]:
        """Run the toy key exchange, encryption and decryption for a message.

        flip inverts one ciphertext bit in transit. The RSA step uses
        16-bit primes and is for demonstration only.
        """

        return tools.protocol_roundtrip(message, seed, flip)

    return mcp


def run() -> None:
    """Run the MCP server with stdio transport."""

    mcp = create_server()
    mcp.run()
