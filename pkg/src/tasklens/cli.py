"""Command line front end.

Exit codes: 0 success, 2 bad usage or a package that fails validation,
3 infeasible optimization budget, 4 I/O problems such as a missing path.
The json output format reuses the API payload builders verbatim, so a
scripted consumer sees identical structures either way.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import columns as columns_mod
from . import fixtures, optimize, payloads
from .errors import NotFound, PackageError, TasklensError, UnknownColumn
from .ir import ModelGraph, derive_task_work
from .package import parse_package
from .profiles import HardwareProfile, default_profile, load_profile
from .store import Workspace

MAX_TABLE_WIDTH = 160

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# table rendering


def _format_cell(value: object) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4f}"
    if value is None:
        return "-"
    return str(value)


def render_table(headers: list[str], rows: list[list[object]]) -> str:
    """Plain aligned text, dropping trailing columns past the width cap."""
    cells = [[_format_cell(v) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    keep = 0
    used = 0
    for w in widths:
        needed = w if keep == 0 else w + 2
        if used + needed > MAX_TABLE_WIDTH:
            break
        used += needed
        keep += 1
    keep = max(keep, 1)
    lines = []
    header = "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers[:keep]))
    lines.append(header.rstrip())
    lines.append("  ".join("-" * widths[i] for i in range(keep)))
    for row in cells:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(keep)).rstrip())
    return "\n".join(lines)


def _emit_csv(headers: list[str], rows: list[list[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


# model loading: a filesystem path or a stored model id


def _load_graph(ref: str, data_dir: str) -> ModelGraph:
    path = Path(ref)
    if path.exists():
        try:
            parsed = parse_package(path)
        except PackageError as exc:
            raise CliFailure(EXIT_USAGE, f"invalid package: {exc}")
        except OSError as exc:
            raise CliFailure(EXIT_IO, f"cannot read {ref}: {exc}")
        return derive_task_work(parsed.graph, pool_window=parsed.manifest.pool_window)
    if ref.endswith((".tgz", ".tar.gz", ".json")) or "/" in ref:
        raise CliFailure(EXIT_IO, f"no such package: {ref}")
    ws = Workspace(data_dir)
    try:
        return ws.model_graph(ref)
    except NotFound:
        raise CliFailure(EXIT_IO, f"no package file and no stored model named {ref!r}")


def _load_profile_arg(path: str | None) -> HardwareProfile:
    if path is None:
        return default_profile()
    try:
        return load_profile(path)
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot read profile: {exc}")
    except TasklensError as exc:
        raise CliFailure(EXIT_USAGE, f"bad profile: {exc}")


def _selection_arg(raw: str | None, preset: str | None):
    if raw is None and preset is None:
        return None
    if raw is not None and raw.startswith("@"):
        try:
            raw = Path(raw[1:]).read_text()
        except OSError as exc:
            raise CliFailure(EXIT_IO, f"cannot read selection file: {exc}")
    try:
        sel = payloads.parse_selection_json(raw) if raw is not None else optimize.OptimizationSelection()
        if preset is not None:
            if preset not in optimize.PRESETS:
                raise ValueError(f"unknown preset {preset!r}; choose from {sorted(optimize.PRESETS)}")
            sel = optimize.OptimizationSelection(preset=preset, targeted=sel.targeted)
        return sel
    except ValueError as exc:
        raise CliFailure(EXIT_USAGE, str(exc))


# subcommands


def _cmd_ingest(args) -> int:
    path = Path(args.package)
    if not path.exists():
        raise CliFailure(EXIT_IO, f"no such package: {args.package}")
    ws = Workspace(args.data_dir)
    try:
        record, duplicate = ws.store_model(path, owner=args.owner, name=args.name)
    except PackageError as exc:
        raise CliFailure(EXIT_USAGE, f"invalid package: {exc}")
    payload = payloads.record_payload(record, viewer=args.owner, duplicate=duplicate)
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        state = "already stored" if duplicate else "stored"
        print(f"{state} {record.model_id} ({record.name}) for {record.owner}")
    return EXIT_OK


def _metrics_table_rows(payload: dict, optimized: bool):
    if optimized:
        headers = ["task", "name", "kind", "base_ms", "opt_ms", "delta_pct", "changed"]
        rows = [
            [
                r["task"],
                r["name"],
                r["kind"],
                r["base"]["total_time"],
                r["optimized"]["total_time"],
                r["delta"]["total_time"],
                r["changed"],
            ]
            for r in payload["rows"]
        ]
    else:
        ids = ["task", "name", "kind", "total_time", "compute_time", "memory_time",
               "bytes_moved", "weight_bytes", "energy", "memory_power"]
        headers = list(ids)
        rows = [
            [r[c] if c in ("task", "name", "kind") else r["metrics"][c] for c in ids]
            for r in payload["rows"]
        ]
    return headers, rows


def _sort_payload_rows(payload: dict, sort: str | None, top: int | None, optimized: bool) -> None:
    if sort is not None:
        col = columns_mod.get_column(sort)
        if sort in ("task", "name", "kind", "group"):
            payload["rows"].sort(key=lambda r: r[sort])
        elif sort in columns_mod.METRIC_FIELD_BY_COLUMN:
            bucket = "optimized" if optimized else "metrics"
            payload["rows"].sort(key=lambda r: r[bucket][sort], reverse=True)
        else:
            # config columns such as sparsity sort on the stored value
            key = {"input_format": "input", "output_format": "output",
                   "kernel_format": "kernel", "sparsity": "sparsity",
                   "palette_bits": "palette"}.get(col.id, col.id)
            payload["rows"].sort(key=lambda r: str(r["config"].get(key, "")))
    if top is not None:
        payload["rows"] = payload["rows"][:top]


def _cmd_report(args) -> int:
    g = _load_graph(args.model, args.data_dir)
    profile = _load_profile_arg(args.profile)
    selection = _selection_arg(args.selection, args.preset)
    payload = payloads.metrics_payload(g, profile, selection)
    optimized = selection is not None
    try:
        _sort_payload_rows(payload, args.sort, args.top, optimized)
    except UnknownColumn as exc:
        raise CliFailure(EXIT_USAGE, str(exc))
    if args.format == "json":
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    headers, rows = _metrics_table_rows(payload, optimized)
    if args.format == "csv":
        print(_emit_csv(headers, rows), end="")
        return EXIT_OK
    print(render_table(headers, rows))
    summary = payload["summary"]
    base = summary["base"]
    print()
    print(f"total latency {base['total_latency']:.4f} ms, "
          f"memory power {base['memory_power']:.4f} mW, "
          f"weights {base['total_weight_bytes']} B")
    if optimized:
        opt = summary["optimized"]
        print(f"optimized     {opt['total_latency']:.4f} ms, "
              f"memory power {opt['memory_power']:.4f} mW, "
              f"weights {opt['total_weight_bytes']} B "
              f"(latency {summary['delta_latency_pct']:+.2f}%, "
              f"power {summary['delta_power_pct']:+.2f}%)")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    g = _load_graph(args.model, args.data_dir)
    profile = _load_profile_arg(args.profile)
    if args.budget_ms is None:
        raise CliFailure(EXIT_USAGE, "--budget-ms is required")
    try:
        selection = optimize.plan_to_budget(g, profile, args.budget_ms)
    except ValueError as exc:
        raise CliFailure(EXIT_USAGE, str(exc))
    if selection is None:
        print(f"infeasible: no allowed option set reaches {args.budget_ms} ms",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    result = optimize.simulate(g, selection, profile)
    payload = {
        "budget_ms": args.budget_ms,
        "selection": selection.to_json(),
        "summary": payloads.simulation_payload(result)["summary"],
    }
    if args.format == "json":
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print(f"plan reaches {result.summary_opt.total_latency:.4f} ms "
          f"(budget {args.budget_ms} ms) touching {len(selection.targeted)} tasks")
    headers = ["task", "input", "output", "kernel", "sparsity", "palette"]
    rows = [
        [e.task_id, e.config.input_format.tag, e.config.output_format.tag,
         e.config.kernel_format.tag, e.config.sparsity, e.config.palette_bits]
        for e in selection.targeted
    ]
    print(render_table(headers, rows))
    return EXIT_OK


def _cmd_diff(args) -> int:
    from . import diffs

    g_base = _load_graph(args.base, args.data_dir)
    g_target = _load_graph(args.target, args.data_dir)
    profile = _load_profile_arg(args.profile)
    sel_base = _selection_arg(args.selection_base, None) or optimize.EMPTY_SELECTION
    sel_target = _selection_arg(args.selection_target, None) or optimize.EMPTY_SELECTION
    sim_base = optimize.simulate(g_base, sel_base, profile)
    sim_target = optimize.simulate(g_target, sel_target, profile)
    result = diffs.diff_models(
        g_base, [r.opt for r in sim_base.per_task],
        g_target, [r.opt for r in sim_target.per_task],
        sim_base.summary_opt, sim_target.summary_opt,
    )
    payload = payloads.diff_payload(result)
    if args.format == "json":
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    changed = [m for m in payload["matched"] if m["changed"]]
    print(f"matched {len(payload['matched'])} tasks "
          f"({len(changed)} changed), "
          f"added {len(payload['added'])}, removed {len(payload['removed'])}")
    if args.format == "csv":
        headers = ["base_task", "target_task", "changed", "total_time_delta_pct"]
        rows = [[m["base_task"], m["target_task"], m["changed"],
                 m["metric_deltas"].get("total_time")] for m in payload["matched"]]
        print(_emit_csv(headers, rows), end="")
        return EXIT_OK
    if changed or payload["added"] or payload["removed"]:
        headers = ["base_task", "target_task", "total_time_delta_pct"]
        rows = [[m["base_task"], m["target_task"], m["metric_deltas"].get("total_time")]
                for m in changed]
        print(render_table(headers, rows))
        if payload["added"]:
            print(f"added tasks: {payload['added']}")
        if payload["removed"]:
            print(f"removed tasks: {payload['removed']}")
    delta = payloads.rounded_delta(
        payload["summary_base"]["total_latency"],
        payload["summary_target"]["total_latency"],
    )
    print(f"latency {payload['summary_base']['total_latency']:.4f} -> "
          f"{payload['summary_target']['total_latency']:.4f} ms"
          + (f" ({delta:+.2f}%)" if delta is not None else ""))
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .api import create_app
    import uvicorn

    port = args.port or int(os.environ.get("PORT", "8000"))
    data_dir = args.data_dir or os.environ.get("DATA_DIR", "data")
    profile_path = args.profile or os.environ.get("PROFILE_PATH")
    max_upload = int(os.environ.get("MAX_UPLOAD_MB", "512"))
    profile = _load_profile_arg(profile_path)
    static_dir = args.static_dir or os.environ.get("STATIC_DIR")
    if static_dir and not Path(static_dir).is_dir():
        raise CliFailure(EXIT_IO, f"static dir not found: {static_dir}")
    app = create_app(
        data_dir=data_dir,
        profile=profile,
        max_upload_mb=max_upload,
        static_dir=static_dir,
    )
    uvicorn.run(app, host=args.host, port=port)
    return EXIT_OK


def _cmd_fixture(args) -> int:
    if args.out_dir is not None and args.out is not None:
        raise CliFailure(EXIT_USAGE, "give either an output path or -o DIR, not both")
    if args.out_dir is not None:
        out = str(Path(args.out_dir) / f"{args.name}.tgz")
    else:
        out = args.out or f"{args.name}.tgz"
    try:
        fixtures.build_fixture(args.name, out, seed=args.seed, tasks=args.tasks)
    except ValueError as exc:
        raise CliFailure(EXIT_USAGE, str(exc))
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot write {out}: {exc}")
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tasklens",
        description="Inspect and optimize on-device model task graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_profile=True):
        p.add_argument("--data-dir", default=os.environ.get("DATA_DIR", "data"),
                       help="workspace directory for stored models")
        if with_profile:
            p.add_argument("--profile", default=None,
                           help="hardware profile JSON (default: built-in generic NPU)")
        p.add_argument("--format", choices=("table", "json", "csv"), default="table")

    p = sub.add_parser("ingest", help="validate a package and store it")
    p.add_argument("package")
    p.add_argument("--owner", default="local")
    p.add_argument("--name", default=None)
    add_common(p, with_profile=False)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("report", help="per-task metric table for a package or stored model")
    p.add_argument("model", help="package path or stored model id")
    p.add_argument("--selection", default=None,
                   help="optimization selection JSON, or @file")
    p.add_argument("--preset", default=None, help="apply a named preset")
    p.add_argument("--sort", default=None, help="column id to sort by")
    p.add_argument("--top", type=int, default=None, help="keep only the first N rows")
    add_common(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("optimize", help="plan compression to hit a latency budget")
    p.add_argument("model")
    p.add_argument("--budget-ms", type=float, required=True)
    add_common(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("diff", help="compare two models or analyses")
    p.add_argument("base")
    p.add_argument("target")
    p.add_argument("--selection-base", default=None)
    p.add_argument("--selection-target", default=None)
    add_common(p)
    p.set_defaults(func=_cmd_diff)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--profile", default=None)
    p.add_argument("--static-dir", default=None, help="serve web UI assets from this directory")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("fixture", help="write a built-in demo package")
    p.add_argument("name", choices=fixtures.FIXTURE_NAMES)
    p.add_argument("out", nargs="?", default=None)
    p.add_argument("-o", "--out-dir", default=None, help="write NAME.tgz into this directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tasks", type=int, default=64)
    p.set_defaults(func=_cmd_fixture)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except TasklensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
