"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 I/O failure (unreadable input,
unwritable output), 3 record-level data error while --strict is on.
The output directory defaults to the CHAINSIFT_OUT environment variable
so batch jobs can set it once.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import corpusgen, pipeline, report, sqlemit
from .ingest import ParseError
from .pipeline import RunConfig, StrictDataError
from .urlscan import check_liveness

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DATA = 3

DEFAULT_OUT = "chainsift-out"


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this tool reserves 2 for I/O.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", help="directory holding generated export files")
    parser.add_argument("--btc-txs", help="Bitcoin transactions export (ndjson, .gz ok)")
    parser.add_argument("--btc-blocks", help="Bitcoin blocks export")
    parser.add_argument("--eth-txs", help="Ethereum transactions export")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    parser.add_argument(
        "--strict", action="store_true", help="fail on the first malformed record"
    )


def _add_out_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--out",
        default=None,
        help=f"output directory (default: $CHAINSIFT_OUT or ./{DEFAULT_OUT})",
    )


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("CHAINSIFT_OUT") or DEFAULT_OUT
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _run_scan(args, kinds) -> pipeline.ScanResult:
    run = RunConfig(jobs=max(1, args.jobs), strict=args.strict)
    if args.corpus:
        return pipeline.scan_directory(args.corpus, kinds=kinds, run=run)
    if not (args.btc_txs or args.btc_blocks or args.eth_txs):
        raise UsageError("give --corpus or at least one export file")
    for name in (args.btc_txs, args.btc_blocks, args.eth_txs):
        if name and not Path(name).exists():
            raise FileNotFoundError(name)
    return pipeline.scan_corpus(
        btc_txs=args.btc_txs,
        btc_blocks=args.btc_blocks,
        eth_txs=args.eth_txs,
        kinds=kinds,
        run=run,
    )


class UsageError(Exception):
    pass


def _cmd_scan_text(args) -> int:
    result = _run_scan(args, (pipeline.TEXT,))
    out = _out_dir(args)
    pipeline.write_text_findings(out / "texts.ndjson", result.texts)
    print(f"{len(result.texts)} text findings -> {out / 'texts.ndjson'}")
    _print_stats(result)
    return EXIT_OK


def _cmd_scan_urls(args) -> int:
    result = _run_scan(args, (pipeline.URL,))
    out = _out_dir(args)
    pipeline.write_url_findings(out / "urls.ndjson", result.urls)
    print(f"{len(result.urls)} url findings -> {out / 'urls.ndjson'}")
    _print_stats(result)
    return EXIT_OK


def _cmd_scan_files(args) -> int:
    result = _run_scan(args, (pipeline.FILE,))
    out = _out_dir(args)
    pipeline.write_file_findings(
        out / "files.ndjson", result.files, dump_dir=args.dump_dir
    )
    print(f"{len(result.files)} file findings -> {out / 'files.ndjson'}")
    _print_stats(result)
    return EXIT_OK


def _cmd_report(args) -> int:
    result = _run_scan(args, pipeline.ALL_KINDS)
    out = _out_dir(args)
    pipeline.write_text_findings(out / "texts.ndjson", result.texts)
    pipeline.write_url_findings(out / "urls.ndjson", result.urls)
    pipeline.write_file_findings(out / "files.ndjson", result.files)
    paths = report.render(out, result, top_n=args.top, figures=not args.no_figures)
    for path in paths:
        print(f"wrote {path}")
    _print_stats(result)
    return EXIT_OK


def _cmd_gen_corpus(args) -> int:
    out = _out_dir(args)
    counts = corpusgen.GenCounts(
        texts_per_channel=args.texts,
        urls_per_scheme=args.urls,
        eth_files_per_type=args.eth_files,
        btc_files=args.btc_files,
    )
    manifest = corpusgen.generate(out, seed=args.seed, counts=counts, noise=args.noise)
    print(f"{len(manifest.entries)} plants -> {out}")
    return EXIT_OK


def _cmd_emit_sql(args) -> int:
    out = _out_dir(args)
    for path in sqlemit.write_queries(out):
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_check_links(args) -> int:
    if not args.enable_network:
        raise UsageError("check-links touches the network; pass --enable-network")
    rows = []
    with open(args.findings, "r", encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            url = record["url"]
            status = check_liveness(url, timeout=args.timeout)
            rows.append((url, status.value))
            print(f"{status.value}\t{url}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            for url, status in rows:
                handle.write(json.dumps({"url": url, "status": status}) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chainsift", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func, kinds_help in (
        ("scan-text", _cmd_scan_text, "scan exports for text payloads"),
        ("scan-urls", _cmd_scan_urls, "scan exports for URLs"),
        ("scan-files", _cmd_scan_files, "scan exports for embedded files"),
        ("report", _cmd_report, "scan everything, write tables and figures"),
    ):
        cmd = sub.add_parser(name, help=kinds_help)
        _add_input_args(cmd)
        _add_out_arg(cmd)
        if name == "scan-files":
            cmd.add_argument("--dump-dir", help="also carve file bytes here")
        if name == "report":
            cmd.add_argument("--top", type=int, default=report.DEFAULT_TOP_N)
            cmd.add_argument("--no-figures", action="store_true")
        cmd.set_defaults(func=func)

    gen = sub.add_parser("gen-corpus", help="write a synthetic corpus + manifest")
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--texts", type=int, default=corpusgen.GenCounts().texts_per_channel)
    gen.add_argument("--urls", type=int, default=corpusgen.GenCounts().urls_per_scheme)
    gen.add_argument("--eth-files", type=int, default=corpusgen.GenCounts().eth_files_per_type)
    gen.add_argument("--btc-files", type=int, default=corpusgen.GenCounts().btc_files)
    gen.add_argument("--noise", type=int, default=0)
    _add_out_arg(gen)
    gen.set_defaults(func=_cmd_gen_corpus)

    sql = sub.add_parser("emit-sql", help="write the warehouse queries")
    _add_out_arg(sql)
    sql.set_defaults(func=_cmd_emit_sql)

    links = sub.add_parser("check-links", help="probe found URLs (network)")
    links.add_argument("findings", help="urls.ndjson from scan-urls")
    links.add_argument("--enable-network", action="store_true")
    links.add_argument("--timeout", type=float, default=10.0)
    links.add_argument("--out", default=None, help="write statuses here (ndjson)")
    links.set_defaults(func=_cmd_check_links)

    return parser


def _print_stats(result: pipeline.ScanResult) -> None:
    stats = result.stats
    total = sum(stats.records.values())
    line = f"scanned {total} records"
    if stats.parse_errors:
        line += f", {stats.parse_errors} skipped (parse errors)"
    if stats.script_errors:
        line += f", {stats.script_errors} script errors"
    print(line, file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"chainsift: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StrictDataError as exc:
        print(f"chainsift: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ParseError as exc:
        print(f"chainsift: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"chainsift: cannot read {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"chainsift: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
