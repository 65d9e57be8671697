"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import __version__
from .decompose import cartan_kpk, classify_closing, compile_one_param, cs_decompose
from .errors import DegenerateAngles, InputError, NumericalError
from .holonomy import example_path
from .pathio import (
    build_report,
    cartan_to_dict,
    compiled_to_dict,
    dumps,
    emit_report,
    encode_matrix,
    input_digest,
    parse_path_spec,
    read_matrix,
    sample_gauge_potential_csv,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_holonomy(args):
    text = _read(args.spec)
    path = parse_path_spec(text)
    report = build_report(path, input_digest(text), args.tol, args.samples)
    _write(emit_report(report, args.format), args.report)


def cmd_example(args):
    if args.s2 < 0:
        raise InputError("--s2 must be non-negative")
    path = example_path(args.s2, args.variant)
    digest = input_digest(f"example s2={args.s2!r} variant={args.variant}")
    report = build_report(path, digest, args.tol, args.samples)
    _write(emit_report(report, args.format), args.report)


def cmd_decompose(args):
    g = read_matrix(_read(args.matrix))
    csd = cs_decompose(g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateAngles)
        cartan = cartan_kpk(g)
    out = {
        "classification": classify_closing(g).value,
        "csd": {
            "U1": encode_matrix(csd.U1),
            "U2": encode_matrix(csd.U2),
            "V1": encode_matrix(csd.V1),
            "V2": encode_matrix(csd.V2),
            "D": [float(d) for d in csd.D],
        },
        "cartan": cartan_to_dict(cartan),
        "reconstruction_error": float(np.linalg.norm(cartan.reconstruct() - g)),
    }
    _write(dumps(out), args.out)


def cmd_compile(args):
    path = parse_path_spec(_read(args.spec))
    segments = []
    for k, seg in enumerate(path.segments):
        entry = {"segment": k, "length": seg.length}
        entry.update(compiled_to_dict(compile_one_param(seg.hamiltonian)))
        segments.append(entry)
    _write(dumps({"segments": segments}), args.out)


def cmd_sample(args):
    path = parse_path_spec(_read(args.spec))
    if args.n < 2:
        raise InputError("--n must be at least 2")
    _write(sample_gauge_potential_csv(path, args.n), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entgauge",
        description="Non-Abelian holonomies of two-photon states under linear optics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def report_flags(p):
        p.add_argument("--tol", type=float, default=1e-10, help="integrator tolerance")
        p.add_argument("--report", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("structured", "human"), default="structured")
        p.add_argument("--samples", type=int, default=0, help="gauge-potential samples to include")

    p = sub.add_parser("holonomy", help="Wilson loop of a path-spec file")
    p.add_argument("spec")
    report_flags(p)
    p.set_defaults(func=cmd_holonomy)

    p = sub.add_parser("example", help="the worked triangle-loop example")
    p.add_argument("--s2", type=float, default=2 * np.pi, help="local-leg endpoint (radians)")
    p.add_argument("--variant", choices=("diag", "hv"), default="diag")
    report_flags(p)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("decompose", help="Cartan factorization of a 4x4 unitary")
    p.add_argument("matrix")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("compile", help="phase-shift compilation of each segment")
    p.add_argument("spec")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("sample", help="gauge potential along a path as CSV")
    p.add_argument("spec")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except InputError as exc:
        print(f"entgauge: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"entgauge: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
