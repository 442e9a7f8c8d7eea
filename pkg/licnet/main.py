"""licnet command-line entry point.

    licnet <command> <document> [--format json|csv] [--alpha A] [--certificates]
    licnet <command> --batch <file-list> [...]
    licnet config template|validate|export

Results go to stdout, diagnostics and errors (as JSON) to stderr. The exit
code is 0 on success, 1 for computation errors and 2 for document errors.
"""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

from licnet.commands.capacity import run_allocate, run_modes, run_region, run_sumcap
from licnet.commands.config import ACTIONS, run_config
from licnet.commands.documents import BoundDocument, bind, load_document
from licnet.commands.feedback import run_feedback
from licnet.commands.params import CommandOptions, run_params
from licnet.commands.repair import run_repair
from licnet.core.config import configure_logging, settings
from licnet.core.errors import CommandNotApplicableError, DocumentSyntaxError, LicError
from licnet.models.network import NetworkDocument
from licnet.models.results import CommandResult, flatten, rounded, rows_to_csv

logger = logging.getLogger(__name__)

COMMANDS: Dict[str, Callable[[BoundDocument, CommandOptions], Dict[str, Any]]] = {
    "params": run_params,
    "region": run_region,
    "sumcap": run_sumcap,
    "allocate": run_allocate,
    "feedback": run_feedback,
    "modes": run_modes,
    "repair": run_repair,
}

HELP = {
    "params": "channel parameters sigma^2 (with --certificates, the vectors behind them)",
    "region": "axis vertices of the rate region",
    "sumcap": "sum capacity with the achieving path, mode or allocation",
    "allocate": "full allocation scheme achieving the sum capacity",
    "feedback": "feedback parameters, routes and feedback sum capacity",
    "modes": "the eight repeated-cycle modes of a grid",
    "repair": "balance the document's single-layer scheme",
}

Outcome = Union[CommandResult, LicError]


def run_command(
    command: str,
    document: NetworkDocument,
    options: Optional[CommandOptions] = None,
    path: Optional[str] = None,
) -> CommandResult:
    options = options or CommandOptions()
    if command not in COMMANDS:
        raise CommandNotApplicableError(f"Unknown command {command!r}", command=command, commands=sorted(COMMANDS))
    bound = bind(document, options.alpha, path)
    values = COMMANDS[command](bound, options)
    return CommandResult(command=command, kind=bound.kind, document=path, alpha=bound.alpha, values=values)


def run_file(command: str, path: Union[str, Path], options: Optional[CommandOptions] = None) -> CommandResult:
    return run_command(command, load_document(path), options, str(path))


def read_batch(path: Union[str, Path]) -> List[Path]:
    """Document paths listed one per line; relative paths are taken from the list's directory."""
    listing = Path(path)
    try:
        lines = listing.read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise DocumentSyntaxError(f"Cannot read batch list {listing}: {str(e)}", path=str(listing)) from e
    paths = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        entry = Path(line)
        paths.append(entry if entry.is_absolute() else listing.parent / entry)
    return paths


async def run_batch(command: str, paths: Sequence[Path], options: CommandOptions) -> List[Outcome]:
    """Run ``command`` on every document concurrently; outcomes keep the input order."""
    semaphore = asyncio.Semaphore(max(1, settings.batch_workers))

    async def one(path: Path) -> Outcome:
        async with semaphore:
            try:
                return await asyncio.to_thread(run_file, command, path, options)
            except LicError as e:
                e.context.setdefault("document", str(path))
                return e

    return await asyncio.gather(*(one(path) for path in paths))


def _report(error: LicError):
    print(json.dumps(error.to_dict(), sort_keys=True), file=sys.stderr)


def _render(results: List[CommandResult], fmt: str, batch: bool) -> str:
    digits = settings.output_digits
    if fmt == "csv":
        if not batch:
            return results[0].to_csv(digits)
        rows = []
        for index, result in enumerate(results):
            rows += [(f"{index}.{key}", value) for key, value in flatten(rounded(result.values, digits))]
        return rows_to_csv(rows)
    if not batch:
        return results[0].to_json(digits)
    return json.dumps([result.payload(digits) for result in results], indent=2, sort_keys=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="licnet",
        description="Channel parameters, deterministic models and capacities of layered networks.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("document", nargs="?", help="Path to the network document (JSON)")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="Output format")
    common.add_argument("--alpha", type=float, default=None, help="Value substituted for $alpha")
    common.add_argument("--certificates", action="store_true", help="Include the vectors behind each parameter")
    common.add_argument("--batch", metavar="FILE", help="File listing one document path per line")

    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=HELP[name])

    config = subparsers.add_parser("config", help="inspect runtime settings")
    config.add_argument("action", choices=ACTIONS)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging()

    try:
        if args.command == "config":
            text, code = run_config(args.action)
            print(text)
            return code

        if (args.document is None) == (args.batch is None):
            parser.error("give exactly one of a document or --batch")
        options = CommandOptions(alpha=args.alpha, certificates=args.certificates)

        if args.batch is None:
            results = [run_file(args.command, args.document, options)]
            code = 0
        else:
            outcomes = asyncio.run(run_batch(args.command, read_batch(args.batch), options))
            results = [outcome for outcome in outcomes if isinstance(outcome, CommandResult)]
            errors = [outcome for outcome in outcomes if isinstance(outcome, LicError)]
            for error in errors:
                _report(error)
            code = max((error.exit_code for error in errors), default=0)
        print(_render(results, args.format, args.batch is not None), end="" if args.format == "csv" else "\n")
        return code
    except LicError as e:
        _report(e)
        return e.exit_code
    except Exception as e:
        logger.exception("Unexpected failure")
        print(json.dumps({"error": "internal_error", "detail": f"{args.command} failed: {str(e)}", "context": {}}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
