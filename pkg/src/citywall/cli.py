"""Command-line entry point: one binary for every workflow.

Subcommands: ``serve`` (room server + HTTP endpoints), ``gen-grid``
(tiled-wall configuration generator), ``convert-mpcdi`` (calibration file to
configuration), ``validate`` (configuration check), ``simulate`` (headless
protocol scenario).  Success prints results to stdout; failures print one
JSON object to stderr and exit 1; usage errors exit 2.

Environment: ``CITYWALL_LISTEN`` and ``CITYWALL_CONFIG_DIR`` provide
defaults for ``serve``; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any

from .errors import CitywallError
from .frustum import (
    FrustumAngles,
    grid_configuration,
    mpcdi_frustum,
    parse_calibration,
    validate_configuration,
)
from .harness import assert_consistent, parse_scenario, run_scenario
from .model import DeviceId, DeviceRole, DeviceView, ViewConfiguration

__all__ = ["main", "build_parser"]

_DEFAULT_LISTEN = "127.0.0.1:8000"


def _fail(code: str, detail: str) -> int:
    print(json.dumps({"error": {"code": code, "detail": detail}}), file=sys.stderr)
    return 1


def _write_json(path: str, doc: Any) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citywall",
        description="Multi-device software-city visualization: server, "
        "configuration tools, and protocol simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the room server")
    serve.add_argument("--listen", help=f"addr:port (default {_DEFAULT_LISTEN})")
    serve.add_argument("--configs", help="directory of configuration JSON files")
    serve.add_argument("--structure", help="structure JSON file")
    serve.add_argument("--traces", help="trace JSONL file (needs --structure)")
    serve.add_argument("--static", help="directory with the browser client")

    grid = sub.add_parser("gen-grid", help="generate a tiled-wall configuration")
    grid.add_argument("--rows", type=int, required=True)
    grid.add_argument("--cols", type=int, required=True)
    grid.add_argument("--tile-w", type=float, required=True, help="tile width in meters")
    grid.add_argument("--tile-h", type=float, required=True, help="tile height in meters")
    grid.add_argument("--eye-dist", type=float, required=True, help="eye distance in meters")
    grid.add_argument("--near", type=float, default=0.1)
    grid.add_argument("--far", type=float, default=1000.0)
    grid.add_argument("--ids", required=True, help="comma-separated device ids, row-major from top-left")
    grid.add_argument("--out", required=True, help="output configuration path")

    mpcdi = sub.add_parser("convert-mpcdi", help="convert a calibration file")
    mpcdi.add_argument("--in", dest="in_path", required=True, help="calibration XML path")
    mpcdi.add_argument("--near", type=float, default=0.1)
    mpcdi.add_argument("--far", type=float, default=1000.0)
    mpcdi.add_argument("--id-prefix", default="proj", help="device ids become <prefix>-<regionId>")
    mpcdi.add_argument(
        "--main-id",
        help="device id to hold the main role; added with a symmetric frustum "
        "when it matches no region (default: first region)",
    )
    mpcdi.add_argument("--out", required=True, help="output configuration path")

    val = sub.add_parser("validate", help="validate a configuration file")
    val.add_argument("file", help="configuration JSON path")

    sim = sub.add_parser("simulate", help="run a protocol scenario")
    sim.add_argument("--scenario", required=True, help="scenario JSON path")
    sim.add_argument("--seed", type=int, default=0)

    return parser


def cmd_serve(args: argparse.Namespace) -> int:
    # serve-only dependencies stay out of the other subcommands' startup
    import uvicorn

    from .ingest import aggregate_traces, ingest_structure, read_trace_records
    from .layout import CityLayout, layout_city
    from .rooms import RoomHub
    from .server import create_app

    listen = args.listen or os.environ.get("CITYWALL_LISTEN") or _DEFAULT_LISTEN
    host, _, port_text = listen.rpartition(":")
    if not host or not port_text.isdigit():
        return _fail("Error", f"--listen must be addr:port, got {listen!r}")

    config_dir = args.configs or os.environ.get("CITYWALL_CONFIG_DIR")
    hub = RoomHub()
    try:
        if config_dir:
            configs = []
            for path in sorted(Path(config_dir).glob("*.json")):
                try:
                    configs.append(json.loads(path.read_text(encoding="utf-8")))
                except (OSError, json.JSONDecodeError) as exc:
                    return _fail("ParseError", f"{path}: {exc}")
            hub.set_default_library(configs)

        layout_doc: dict[str, Any] = CityLayout((), (), ()).to_json()
        if args.traces and not args.structure:
            return _fail("Error", "--traces requires --structure")
        if args.structure:
            model = ingest_structure(Path(args.structure).read_bytes())
            links = []
            if args.traces:
                records = read_trace_records(Path(args.traces).read_bytes())
                links = aggregate_traces(records, model).links
            layout_doc = layout_city(model, links).to_json()
    except OSError as exc:
        return _fail("Error", str(exc))
    except CitywallError as exc:
        return _fail(exc.code, str(exc))

    app = create_app(hub, layout_doc, static_dir=args.static)
    uvicorn.run(app, host=host, port=int(port_text), log_level="info")
    return 0


def cmd_gen_grid(args: argparse.Namespace) -> int:
    ids = [part.strip() for part in args.ids.split(",") if part.strip()]
    try:
        config = grid_configuration(
            rows=args.rows,
            cols=args.cols,
            tile_width=args.tile_w,
            tile_height=args.tile_h,
            eye_distance=args.eye_dist,
            near=args.near,
            far=args.far,
            device_ids=ids,
        )
    except (CitywallError, ValueError) as exc:
        code = exc.code if isinstance(exc, CitywallError) else "Error"
        return _fail(code, str(exc))
    _write_json(args.out, config.to_json())
    print(json.dumps({"written": args.out, "configId": config.config_id, "views": len(config.views)}))
    return 0


def _symmetric_projection(near: float, far: float):
    return mpcdi_frustum(
        FrustumAngles(
            yaw=0.0, pitch=0.0, roll=0.0,
            left_angle=45.0, right_angle=45.0, up_angle=45.0, down_angle=45.0,
        ),
        near,
        far,
    )


def cmd_convert_mpcdi(args: argparse.Namespace) -> int:
    try:
        regions = parse_calibration(Path(args.in_path).read_bytes())
    except OSError as exc:
        return _fail("Error", str(exc))
    except CitywallError as exc:
        return _fail(exc.code, str(exc))

    try:
        views = []
        region_ids = []
        for region in regions:
            device_id = DeviceId(f"{args.id_prefix}-{region.region_id}")
            region_ids.append(device_id)
            views.append(
                DeviceView(
                    device_id=device_id,
                    projection=mpcdi_frustum(region.angles, args.near, args.far),
                    role=DeviceRole.AUXILIARY,
                )
            )
        main_id = DeviceId(args.main_id) if args.main_id else region_ids[0]
        if main_id in region_ids:
            index = region_ids.index(main_id)
            views[index] = DeviceView(
                device_id=main_id, projection=views[index].projection, role=DeviceRole.MAIN
            )
        else:
            # a control node that is not itself a projector region
            views.append(
                DeviceView(
                    device_id=main_id,
                    projection=_symmetric_projection(args.near, args.far),
                    role=DeviceRole.MAIN,
                )
            )
        name = Path(args.in_path).stem
        if name.endswith(".mpcdi"):
            name = name[: -len(".mpcdi")]
        config = ViewConfiguration(config_id=name, views=tuple(views))
    except (CitywallError, ValueError) as exc:
        code = exc.code if isinstance(exc, CitywallError) else "Error"
        return _fail(code, str(exc))

    _write_json(args.out, config.to_json())
    print(json.dumps({"written": args.out, "configId": config.config_id, "views": len(config.views)}))
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(Path(args.file).read_text(encoding="utf-8"))
    except OSError as exc:
        return _fail("Error", str(exc))
    except json.JSONDecodeError as exc:
        return _fail("ParseError", f"{args.file}: {exc}")
    diagnostics = validate_configuration(doc)
    if diagnostics:
        print(
            json.dumps({"error": {"code": "InvalidConfig", "detail": f"{args.file} failed validation"}, "diagnostics": diagnostics}),
            file=sys.stderr,
        )
        return 1
    print(
        json.dumps(
            {
                "valid": True,
                "configId": doc.get("configId"),
                "views": len(doc.get("views", [])),
            }
        )
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        script = parse_scenario(Path(args.scenario).read_bytes())
        report = run_scenario(script, args.seed)
    except OSError as exc:
        return _fail("Error", str(exc))
    except CitywallError as exc:
        return _fail(exc.code, str(exc))
    ok, diffs = assert_consistent(report)
    report["consistent"] = ok
    report["diffs"] = diffs
    print(json.dumps(report, indent=2, sort_keys=True))
    if report["violations"] or not ok:
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "serve": cmd_serve,
        "gen-grid": cmd_gen_grid,
        "convert-mpcdi": cmd_convert_mpcdi,
        "validate": cmd_validate,
        "simulate": cmd_simulate,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
