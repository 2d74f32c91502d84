"""Entry point: serve the JSONL execution protocol on stdin/stdout."""

from __future__ import annotations

import argparse

from .runner import Runner, serve


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sandbox-runner",
        description="Execute JSONL code requests from stdin, one result line per request.",
    )
    parser.add_argument(
        "--allow-network", action="store_true",
        help="let executed code open sockets (disabled by default)",
    )
    args = parser.parse_args(argv)
    serve(runner=Runner(allow_network=args.allow_network))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
