"""Command line client.

Runs commands in-process by default; with ``--url`` it posts the same
request to a running service instead.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import modelio

# flag name -> (type, help); dest keys double as request option keys
_FLAGS = {
    "N": (int, "base dimension"),
    "p": (str, "jet order (an integer, or 'symbolic' for charges)"),
    "seed": (int, "random seed"),
    "samples": (int, "number of random samples"),
    "degree": (int, "polynomial degree bound"),
    "modes": (int, "largest Fourier mode in random samples"),
    "max-dim": (int, "largest multiplicity per species"),
    "rep": (str, "vector | covector | sym2 | density"),
    "gauge": (str, "none | u1 | su2 | u1+su2"),
    "algebra": (str, "gauge algebra for the sweep"),
    "parity": (str, "boson | fermion"),
    "lam": (str, "causal weight, 'a/b' or integer"),
    "multiplicity": (int, "number of identical pairs"),
    "preset": (str, "auxiliary | harmonic | free-scalar | u1-toy"),
    "sectors": (str, "comma separated sector flags, e.g. E,D,B"),
}

COMMAND_FLAGS = {
    "charges": ("N", "p"),
    "asymptotics": ("N",),
    "scan": ("N", "max-dim"),
    "verify-traces": ("N", "p", "seed", "rep", "gauge", "parity"),
    "jacobi": ("N", "degree", "samples", "seed", "modes", "algebra"),
    "dirac": ("N", "degree", "samples", "seed"),
    "fock-anomaly": ("N", "p", "samples", "seed", "rep"),
    "virasoro": ("lam", "parity", "multiplicity"),
    "kt": ("preset", "p", "degree", "sectors"),
    "np1": ("N", "p"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetquant")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, flags in COMMAND_FLAGS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--model", help="model file path, or '-' for standard input")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--budget", help=f"size caps such as 'N=4,p=5' (default from ${modelio.BUDGET_ENV})")
        sp.add_argument("--url", help="base URL of a running service")
        for flag in flags:
            kind, text = _FLAGS[flag]
            sp.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=kind, help=text)
    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _options(args: argparse.Namespace) -> dict:
    out = {}
    for flag in COMMAND_FLAGS[args.command]:
        v = getattr(args, flag.replace("-", "_"))
        if v is not None:
            out[flag.replace("-", "_")] = v
    if "p" in out and out["p"] != "symbolic":
        out["p"] = int(out["p"])
    return out


def _remote(url: str, cmd: str, body: dict) -> modelio.Report:
    import httpx

    resp = httpx.post(f"{url.rstrip('/')}/run/{cmd}", json=body, timeout=None)
    if resp.status_code != 200:
        detail = resp.json().get("detail", {})
        if isinstance(detail, dict) and "exit_code" in detail:
            raise _RemoteError(detail["exit_code"], detail["message"])
        raise _RemoteError(1, str(detail))
    data = resp.json()
    return modelio.Report(data["command"], data["input_digest"], data["ok"], data["result"], data["notes"])


class _RemoteError(RuntimeError):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        uvicorn.run("jetquant.service:app", host=args.host, port=args.port)
        return modelio.EXIT_OK

    try:
        body = {"model": modelio.read_model(args.model), "options": _options(args), "budget": args.budget}
        if args.url:
            report = _remote(args.url, args.command, body)
        else:
            from .service import CommandRequest, execute

            report = execute(args.command, CommandRequest(**body))
    except _RemoteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (modelio.ModelError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return modelio.exit_code(exc) if not isinstance(exc, OSError) else 1

    if args.format == "csv":
        sys.stdout.write(modelio.dumps_csv(report))
    else:
        print(report.dumps())
    return modelio.exit_code(None, report)


if __name__ == "__main__":
    sys.exit(main())
