"""Command-line interface.

Exit codes: 0 success, 1 differences found (compare), 2 usage error,
3 parse error, 4 gateway error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .api import AppConfig, create_app
from .errors import (
    DuetError,
    GatewayError,
    KindMismatchError,
    MissingEnclosureError,
    MixedKindsError,
    PlantUmlSyntaxError,
)
from .gateway import GatewayConfig, LlmGateway
from .matching import DEFAULT_THRESHOLD
from .model import DiagramKind
from .pipeline import compare_sources
from .store import Store

EXIT_OK = 0
EXIT_DIFFERENCES = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_GATEWAY = 4

_PARSE_ERRORS = (PlantUmlSyntaxError, MissingEnclosureError, MixedKindsError, KindMismatchError)

ENV_STORE_DIR = "DUET_STORE_DIR"


def _default_store_dir() -> str:
    return os.environ.get(ENV_STORE_DIR, "./duet-store")


def _print_diagnostics(error: PlantUmlSyntaxError) -> None:
    for diagnostic in error.diagnostics:
        print(
            f"{diagnostic.line}:{diagnostic.column}: "
            f"{diagnostic.severity.value}: {diagnostic.message}",
            file=sys.stderr,
        )


def _cmd_compare(args) -> int:
    reference_source = Path(args.reference).read_text(encoding="utf-8")
    student_source = Path(args.student).read_text(encoding="utf-8")
    result = compare_sources(
        reference_source,
        student_source,
        reference_name=Path(args.reference).name,
        student_name=Path(args.student).name,
        threshold=args.threshold,
    )
    if args.json:
        print(json.dumps(result.to_dict(), indent=2))
    else:
        if args.audience in ("student", "both"):
            print(result.feedback.student_markdown)
        if args.audience == "both":
            print()
        if args.audience in ("educator", "both"):
            print(result.feedback.educator_markdown)
    return EXIT_DIFFERENCES if result.report.differences else EXIT_OK


def _cmd_batch(args) -> int:
    reference_source = Path(args.reference).read_text(encoding="utf-8")
    directory = Path(args.directory)
    if not directory.is_dir():
        print(f"not a directory: {directory}", file=sys.stderr)
        return EXIT_USAGE
    files = sorted(
        list(directory.glob("*.puml")) + list(directory.glob("*.plantuml"))
    )
    results = []
    for path in files:
        try:
            result = compare_sources(
                reference_source,
                path.read_text(encoding="utf-8"),
                reference_name=Path(args.reference).name,
                student_name=path.name,
                threshold=args.threshold,
            )
            results.append(
                {
                    "file": path.name,
                    "differences": len(result.report.differences),
                    "diff_report": result.report.to_dict(),
                    "tags": [t.to_dict() for t in result.tags],
                    "feedback": result.feedback.to_dict(),
                }
            )
        except _PARSE_ERRORS as exc:
            entry = {"file": path.name, "error": str(exc)}
            if isinstance(exc, PlantUmlSyntaxError):
                entry["diagnostics"] = [d.to_dict() for d in exc.diagnostics]
            results.append(entry)
    payload = {"reference": Path(args.reference).name, "results": results}
    Path(args.out).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    print(f"wrote {len(results)} result(s) to {args.out}")
    return EXIT_OK


def _cmd_convert(args) -> int:
    image = Path(args.image).read_bytes()
    kind = DiagramKind.ER if args.kind == "er" else DiagramKind.CLASS
    gateway = LlmGateway(GatewayConfig.from_env())
    result = gateway.convert_image(image, kind)
    print(result.plantuml)
    return EXIT_OK


def _cmd_analytics(args) -> int:
    store = Store(args.store)
    stats = store.aggregate(args.reference)
    print(json.dumps(stats.to_dict(), indent=2))
    return EXIT_OK


def _cmd_purge(args) -> int:
    store = Store(args.store)
    removed = store.purge()
    for path in removed:
        print(f"removed {path}")
    if not removed:
        print("nothing to remove")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    origins = tuple(
        o.strip()
        for o in os.environ.get("DUET_CORS_ORIGINS", "*").split(",")
        if o.strip()
    )
    config = AppConfig(
        store_dir=args.store,
        cors_origins=origins,
        ui_dir=os.environ.get("DUET_UI_DIR"),
    )
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duet",
        description="Structural diff and feedback for UML class and ER diagrams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compare = sub.add_parser("compare", help="diff a student diagram against a reference")
    compare.add_argument("reference", help="reference .puml file")
    compare.add_argument("student", help="student .puml file")
    output = compare.add_mutually_exclusive_group()
    output.add_argument("--json", action="store_true", help="print the full result as JSON")
    output.add_argument("--markdown", action="store_true", help="print Markdown feedback (default)")
    compare.add_argument(
        "--audience",
        choices=("student", "educator", "both"),
        default="both",
        help="which feedback document(s) to print",
    )
    compare.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    compare.set_defaults(func=_cmd_compare)

    batch = sub.add_parser("batch", help="compare every .puml file in a directory")
    batch.add_argument("reference", help="reference .puml file")
    batch.add_argument("directory", help="directory of student .puml files")
    batch.add_argument("--out", required=True, help="output JSON file")
    batch.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    batch.set_defaults(func=_cmd_batch)

    convert = sub.add_parser("convert", help="convert a diagram image to PlantUML")
    convert.add_argument("image", help="PNG or JPEG file")
    convert.add_argument("--kind", choices=("class", "er"), required=True)
    convert.set_defaults(func=_cmd_convert)

    analytics = sub.add_parser("analytics", help="print aggregated stats for a reference")
    analytics.add_argument("--store", default=_default_store_dir())
    analytics.add_argument("--reference", required=True, help="reference id")
    analytics.set_defaults(func=_cmd_analytics)

    purge = sub.add_parser("purge", help="delete all stored records")
    purge.add_argument("--store", default=_default_store_dir())
    purge.set_defaults(func=_cmd_purge)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--store", default=_default_store_dir())
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PlantUmlSyntaxError as exc:
        print(f"parse failure: {exc}", file=sys.stderr)
        _print_diagnostics(exc)
        return EXIT_PARSE
    except _PARSE_ERRORS as exc:
        print(f"parse failure: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GatewayError as exc:
        print(f"gateway failure: {exc}", file=sys.stderr)
        return EXIT_GATEWAY
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except DuetError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
