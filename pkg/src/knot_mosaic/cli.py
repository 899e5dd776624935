"""Command line entrypoint for knot_mosaic.

Machine output goes to stdout, diagnostics and logs to stderr.

\b
Exit codes: 0 success, 1 invalid input or failed validation, 2 empty
mosaic, 3 detected corruption or tampering, 64 usage error.

\b
Formats:
  .kmos       KMOS v1 <rows> <cols>, then one line of tile tokens per row
  bitstring   raw 0/1 text, or 'KMOSBITS v1 n=<N>' followed by hex digits
  DT          comma separated signed even integers, e.g. 4,6,2
  ciphertext  'KMOSCT v1 blocks=<k>', then per block 'n=<N>' and its bits

A mosaic argument is a .kmos path or 'corpus:<id>' for a bundled knot.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Optional

import click
from loguru import logger
from pydantic import ValidationError

from knot_mosaic.codec import DecodeReport, LengthMismatch, decode_mosaic, encode_mosaic
from knot_mosaic.config import Settings, configure_logging
from knot_mosaic.formats import (
    BIT_FORMATS,
    FormatError,
    format_bits,
    format_ciphertext,
    format_dt,
    format_kmos,
    load_kmos,
    parse_bits,
    parse_ciphertext,
    parse_dt,
)
from knot_mosaic.knotlib import (
    Corpus,
    CorpusError,
    UnknownKnot,
    corpus_check,
    default_codebook,
    load_corpus,
)
from knot_mosaic.mosaic import (
    STATUS_EMPTY,
    STATUS_VALID,
    AsymmetricLegs,
    Mosaic,
    NoSpliceSite,
    NotAKnot,
    NotATangle,
    Region,
    RegionOutOfBounds,
    connect_sum,
    mutate,
    pad_to_square,
    validate,
)
from knot_mosaic.protocol import (
    ChannelModel,
    Ciphertext,
    InvalidSession,
    Receiver,
    SessionKeyModel,
    TamperDetected,
    UnknownPrefix,
    channel_experiment,
    random_session,
    run_protocol,
    single_flip_sweep,
    step2_encrypt,
    step3_decrypt,
)
from knot_mosaic.render import render_ascii, render_svg
from knot_mosaic.trace import SuffixMismatch, canonical_dt, dt_sequence, dt_strip_suffix


EXIT_OK = 0
EXIT_INVALID = 1
EXIT_EMPTY = 2
EXIT_CORRUPT = 3
EXIT_USAGE = 64

CORPUS_PREFIX = "corpus:"


class KnotMosaicGroup(click.Group):
    """Group that maps click failures onto this tool's exit codes."""

    def main(self, args: Any = None, prog_name: Optional[str] = None,
             complete_var: Optional[str] = None, standalone_mode: bool = True,
             **extra: Any) -> Any:
        try:
            rv = super().main(
                args=args,
                prog_name=prog_name,
                complete_var=complete_var,
                standalone_mode=False,
                **extra,
            )
        except click.UsageError as exc:
            exc.show()
            rv = EXIT_USAGE
        except click.ClickException as exc:
            exc.show()
            rv = EXIT_INVALID
        except click.Abort:
            click.echo("Aborted!", err=True)
            rv = EXIT_INVALID
        code = rv if isinstance(rv, int) else EXIT_OK
        if standalone_mode:
            sys.exit(code)
        return code


@dataclass
class CliState:
    settings: Settings
    corpus_dir: Optional[Path]
    bit_format: str
    seed: int
    _corpus: Optional[Corpus] = None

    @property
    def corpus(self) -> Corpus:
        if self._corpus is None:
            self._corpus = load_corpus(self.corpus_dir)
        return self._corpus


def _fail(message: str, code: int = EXIT_INVALID) -> int:
    click.echo(f"error: {message}", err=True)
    return code


def _load_mosaic(state: CliState, ref: str) -> Mosaic:
    if ref.startswith(CORPUS_PREFIX):
        return state.corpus.lookup(ref[len(CORPUS_PREFIX):]).mosaic
    return load_kmos(Path(ref))


_INPUT_ERRORS = (OSError, FormatError, UnknownKnot, CorpusError)


@click.group(cls=KnotMosaicGroup, help=__doc__)
@click.option("--corpus", "corpus_dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Corpus directory holding index.json.")
@click.option("--format", "bit_format", type=click.Choice(BIT_FORMATS), default=None,
              help="Bitstring output format.")
@click.option("--seed", type=int, default=None, help="Seed for sessions, keys and channels.")
@click.option("--quiet", is_flag=True, help="Only log warnings and errors.")
@click.pass_context
def cli(ctx: click.Context, corpus_dir: Optional[Path], bit_format: Optional[str],
        seed: Optional[int], quiet: bool) -> None:
    settings = Settings()
    configure_logging("WARNING" if quiet else settings.log_level)
    ctx.obj = CliState(
        settings=settings,
        corpus_dir=corpus_dir if corpus_dir is not None else settings.corpus_dir,
        bit_format=bit_format or settings.bit_format,
        seed=seed if seed is not None else settings.seed,
    )


pass_state = click.make_pass_decorator(CliState)


@cli.command()
@click.argument("mosaic")
@pass_state
def encode(state: CliState, mosaic: str) -> int:
    """Serialize a mosaic (padded to a square) to a bitstring."""

    try:
        m = pad_to_square(_load_mosaic(state, mosaic))
    except _INPUT_ERRORS as exc:
        return _fail(str(exc))
    click.echo(format_bits(encode_mosaic(m), m.rows, state.bit_format), nl=False)
    return EXIT_OK


@cli.command()
@click.argument("bits_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--n", "size", type=click.IntRange(min=1), default=None,
              help="Grid size; required for raw 0/1 input.")
@pass_state
def decode(state: CliState, bits_file: Path, size: Optional[int]) -> int:
    """Decode a bitstring back into .kmos text."""

    try:
        bits, declared = parse_bits(bits_file.read_text(encoding="utf-8"), str(bits_file))
    except (OSError, FormatError) as exc:
        return _fail(str(exc))
    n = size if size is not None else declared
    if n is None:
        raise click.UsageError("raw bitstrings need --n")
    try:
        decoded = decode_mosaic(bits, n)
    except LengthMismatch as exc:
        return _fail(str(exc))
    if isinstance(decoded, DecodeReport):
        for corruption, cell in zip(decoded.corruptions, decoded.cells):
            click.echo(f"corrupt word {corruption.word} at position {corruption.position} "
                       f"cell {cell}", err=True)
        return _fail(f"{len(decoded.corruptions)} invalid codeword(s)", EXIT_CORRUPT)
    click.echo(format_kmos(decoded), nl=False)
    return EXIT_OK


@cli.command(name="validate")
@click.argument("mosaic")
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON on stdout.")
@pass_state
def validate_command(state: CliState, mosaic: str, as_json: bool) -> int:
    """Check the topological rules; exit 0 valid, 2 empty, 1 invalid."""

    try:
        m = _load_mosaic(state, mosaic)
    except _INPUT_ERRORS as exc:
        return _fail(str(exc))
    report = validate(m)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
    click.echo(f"status: {report.status}", err=True)
    click.echo(f"crossings: {report.crossing_count}", err=True)
    click.echo(f"components: {report.component_count}", err=True)
    for violation in report.violations:
        click.echo(f"violation: {violation}", err=True)
    for warning in report.warnings:
        click.echo(f"warning: {warning}", err=True)
    if report.status == STATUS_VALID:
        return EXIT_OK
    if report.status == STATUS_EMPTY:
        return EXIT_EMPTY
    return EXIT_INVALID


@cli.command()
@click.argument("mosaic")
@click.option("--svg", is_flag=True, help="Emit SVG instead of ASCII art.")
@pass_state
def render(state: CliState, mosaic: str, svg: bool) -> int:
    """Draw a mosaic."""

    try:
        m = _load_mosaic(state, mosaic)
    except _INPUT_ERRORS as exc:
        return _fail(str(exc))
    click.echo(render_svg(m) if svg else render_ascii(m), nl=False)
    return EXIT_OK


@cli.command()
@click.argument("mosaic")
@click.option("--raw", is_flag=True, help="Print the sequence from the default start instead.")
@pass_state
def dt(state: CliState, mosaic: str, raw: bool) -> int:
    """Print the canonical DT sequence of a valid mosaic."""

    try:
        m = _load_mosaic(state, mosaic)
    except _INPUT_ERRORS as exc:
        return _fail(str(exc))
    report = validate(m)
    if not report.is_valid:
        return _fail(f"mosaic is {report.status}; DT needs a valid knot")
    click.echo(str(dt_sequence(m) if raw else canonical_dt(m)))
    return EXIT_OK


@cli.command()
@click.argument("left")
@click.argument("right")
@click.option("--pad/--no-pad", default=True, help="Pad the result to a square.")
@pass_state
def compose(state: CliState, left: str, right: str, pad: bool) -> int:
    """Connected sum LEFT # RIGHT as .kmos text."""

    try:
        result = connect_sum(_load_mosaic(state, left), _load_mosaic(state, right))
    except _INPUT_ERRORS + (NotAKnot, NoSpliceSite) as exc:
        return _fail(str(exc))
    click.echo(format_kmos(pad_to_square(result) if pad else result), nl=False)
    return EXIT_OK


def _parse_region(ctx: click.Context, param: click.Parameter, value: str) -> Region:
    try:
        return Region.parse(value)
    except ValueError as exc:
        raise click.BadParameter(str(exc), ctx=ctx, param=param) from None


@cli.command(name="mutate")
@click.argument("mosaic")
@click.option("--region", required=True, callback=_parse_region,
              help="Tangle rectangle as row,col,height,width.")
@pass_state
def mutate_command(state: CliState, mosaic: str, region: Region) -> int:
    """Rotate a four-legged tangle by 180 degrees."""

    try:
        result = mutate(_load_mosaic(state, mosaic), region)
    except _INPUT_ERRORS + (NotAKnot, NotATangle, AsymmetricLegs, RegionOutOfBounds) as exc:
        return _fail(str(exc))
    click.echo(format_kmos(result), nl=False)
    return EXIT_OK


@cli.command(name="channel-test")
@click.option("--p", "probability", type=click.FloatRange(0.0, 1.0), default=None,
              help="Per-bit flip probability.")
@click.option("--trials", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--message", default="knot", show_default=True)
@click.option("--single-flip", is_flag=True, help="Flip every bit once instead of sampling.")
@click.option("--json", "as_json", is_flag=True)
@pass_state
def channel_test(state: CliState, probability: Optional[float], trials: Optional[int],
                 seed: Optional[int], message: str, single_flip: bool, as_json: bool) -> int:
    """Push a ciphertext through a noisy channel and tabulate outcomes."""

    seed = state.seed if seed is None else seed
    probability = state.settings.flip_probability if probability is None else probability
    trials = state.settings.channel_trials if trials is None else trials
    try:
        corpus = state.corpus
    except CorpusError as exc:
        return _fail(str(exc))
    codebook = default_codebook(corpus)
    session = random_session(corpus, state.settings.session_length, seed)
    ciphertext = step2_encrypt(codebook.encode_text(message), session, corpus, codebook)
    receiver = Receiver(session, corpus, codebook)
    if single_flip:
        stats = single_flip_sweep(ciphertext, receiver)
    else:
        stats = channel_experiment(ciphertext, ChannelModel(probability, seed), trials, receiver)
    logger.info("channel test: {} blocks classified", stats.blocks)
    click.echo(json.dumps(stats.to_dict(), indent=2) if as_json else stats.table())
    return EXIT_OK


@cli.command(name="protocol-demo")
@click.option("--message", required=True)
@click.option("--seed", type=int, default=None)
@click.option("--flip", type=click.IntRange(min=0), default=None,
              help="Invert this ciphertext bit in transit.")
@pass_state
def protocol_demo(state: CliState, message: str, seed: Optional[int], flip: Optional[int]) -> int:
    """Run steps I to III end to end (toy RSA, not secure)."""

    seed = state.seed if seed is None else seed
    try:
        corpus = state.corpus
    except CorpusError as exc:
        return _fail(str(exc))
    codebook = default_codebook(corpus)
    try:
        result = run_protocol(message, corpus, codebook, seed=seed,
                              session_length=state.settings.session_length, flip=flip)
    except ValueError as exc:
        return _fail(str(exc))

    click.echo("# step I: toy RSA key exchange (NOT secure)")
    click.echo(f"rsa n={result.keys.n} e={result.keys.e}")
    click.echo(f"session {SessionKeyModel.from_session(result.session).model_dump_json()}")
    click.echo(f"wire bytes {len(result.wire)}")
    knots = ",".join(codebook.knot_ids)
    click.echo(f"# step II: {len(result.symbols)} symbol(s) over codebook {knots}")
    click.echo(f"symbols {' '.join(str(s) for s in result.symbols)}")
    click.echo(format_ciphertext(result.received.pairs(), state.bit_format), nl=False)
    click.echo("# step III")
    if result.tamper is not None:
        return _fail(f"tamper detected: {result.tamper}", EXIT_CORRUPT)
    if result.unknown_prefix is not None:
        return _fail(result.unknown_prefix, EXIT_CORRUPT)
    click.echo(f"message {result.text}")
    return EXIT_OK


@cli.command()
@click.option("--message", required=True)
@click.option("--session-out", type=click.Path(dir_okay=False, path_type=Path), required=True,
              help="Write the session key JSON here.")
@click.option("--seed", type=int, default=None)
@pass_state
def encrypt(state: CliState, message: str, session_out: Path, seed: Optional[int]) -> int:
    """Step II only: draw a session key and print the ciphertext."""

    seed = state.seed if seed is None else seed
    try:
        corpus = state.corpus
    except CorpusError as exc:
        return _fail(str(exc))
    codebook = default_codebook(corpus)
    session = random_session(corpus, state.settings.session_length, seed)
    ciphertext = step2_encrypt(codebook.encode_text(message), session, corpus, codebook)
    try:
        session_out.write_text(
            SessionKeyModel.from_session(session).model_dump_json(indent=2) + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        return _fail(str(exc))
    logger.info("encrypted {} block(s) under session {}", len(ciphertext), session_out)
    click.echo(format_ciphertext(ciphertext.pairs(), state.bit_format), nl=False)
    return EXIT_OK


@cli.command()
@click.argument("ciphertext_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--session", "session_file", required=True,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Session key JSON written by encrypt.")
@pass_state
def decrypt(state: CliState, ciphertext_file: Path, session_file: Path) -> int:
    """Step III only: strip, look up and print the message."""

    try:
        corpus = state.corpus
        pairs = parse_ciphertext(ciphertext_file.read_text(encoding="utf-8"),
                                 str(ciphertext_file))
        model = SessionKeyModel.model_validate_json(session_file.read_text(encoding="utf-8"))
        session = model.to_session()
        session.check(corpus)
    except _INPUT_ERRORS + (ValidationError, InvalidSession) as exc:
        return _fail(str(exc))
    codebook = default_codebook(corpus)
    try:
        symbols = step3_decrypt(Ciphertext.from_pairs(pairs), session, corpus, codebook)
    except TamperDetected as exc:
        return _fail(f"tamper detected: {exc.report}", EXIT_CORRUPT)
    except (UnknownPrefix, LengthMismatch) as exc:
        return _fail(str(exc), EXIT_CORRUPT)
    try:
        text = codebook.decode_text(symbols)
    except (KeyError, ValueError) as exc:
        return _fail(f"symbols do not spell text: {exc}", EXIT_CORRUPT)
    click.echo(text)
    return EXIT_OK


@cli.command(name="dt-strip")
@click.argument("composite")
@click.argument("summand")
def dt_strip(composite: str, summand: str) -> int:
    """Remove the trailing SUMMAND from a COMPOSITE DT sequence."""

    try:
        prefix = dt_strip_suffix(parse_dt(composite, "composite"), parse_dt(summand, "summand"))
    except (FormatError, SuffixMismatch) as exc:
        return _fail(str(exc))
    click.echo(format_dt(prefix))
    return EXIT_OK


@cli.command(name="corpus-check")
@pass_state
def corpus_check_command(state: CliState) -> int:
    """Re-validate every corpus entry."""

    try:
        corpus = state.corpus
    except CorpusError as exc:
        return _fail(str(exc))
    report = corpus_check(corpus)
    for entry in corpus:
        click.echo(f"{entry.id}\tchi={entry.chi}\tdt={entry.canonical_dt}")
    for failure in report.failures:
        click.echo(f"failed: {failure}", err=True)
    return EXIT_OK if report.ok else EXIT_INVALID


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return its exit code."""

    return cli.main(args=argv, prog_name="knot-mosaic", standalone_mode=False)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    run()
