"""Command-line client for the verification service.

The CLI is a thin transport layer: it assembles a request, sends it to the
service (in-process by default, or a remote instance via ``--server``),
writes the returned payload to report files and maps the outcome to exit
codes: 0 for success, 1 for failed checks or module errors, 2 for usage
errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .config import load_config
from .reports import write_report_file

USAGE_EXIT = 2
FAIL_EXIT = 1


class ServiceClient:
    """Minimal client speaking the service protocol, in-process or remote."""

    def __init__(self, server: str | None = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=3600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def post(self, route: str, payload: dict) -> tuple[int, dict]:
        resp = self._client.post(route, json=payload)
        return resp.status_code, resp.json()


def _config_options(args) -> dict | None:
    overrides = {}
    cfg_file_values = {}
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        cfg_file_values = {
            "classifier_margin": cfg.classifier_margin,
            "seed": cfg.seed,
            "threads": cfg.threads or None,
            "constants": {
                "alpha_k": cfg.constants.alpha_k,
                "alpha_n": cfg.constants.alpha_n,
                "c_n": cfg.constants.c_n,
                "gamma_n": cfg.constants.gamma_n,
                "beta_n": cfg.constants.beta_n,
            },
        }
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        overrides["threads"] = args.threads
    merged = {**cfg_file_values, **overrides}
    return merged or None


def _finish(args, status: int, body: dict, artifacts: dict | None = None) -> int:
    """Write outputs and derive the exit code from the service response."""
    if status != 200:
        print(f"error: {body.get('error', body)}", file=sys.stderr)
        report_path = getattr(args, "report", None)
        if report_path:
            Path(report_path).parent.mkdir(parents=True, exist_ok=True)
            Path(report_path).write_text(json.dumps(
                {"error": body.get("error", str(body)),
                 "kind": body.get("kind", "unknown")},
                sort_keys=True, indent=2) + "\n")
        # incomplete or malformed parameters are usage errors, module errors are not
        if body.get("kind") == "RunnerError" or status == 400:
            return USAGE_EXIT
        return FAIL_EXIT
    payload = body["payload"]
    runtimes = {"total_s": body.get("runtime_s", 0.0)}
    report_path = getattr(args, "report", None)
    if report_path:
        write_report_file(report_path, payload, runtimes=runtimes)
    for path, content in (artifacts or {}).items():
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(content, sort_keys=True, indent=2) + "\n")
    if body.get("failed"):
        print("FAIL: at least one check failed", file=sys.stderr)
        return FAIL_EXIT
    return 0


def _print_rows(payload: dict):
    for row in payload.get("reports", []):
        status = row.get("status", row.get("classification", "?"))
        name = row.get("check_id", row.get("condition", "check"))
        print(f"  [{status}] {name}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="orliczlab",
        description="Gauge-condition, modulus and distortion verification lab",
    )
    parser.add_argument("--server", help="URL of a running service; default runs in-process")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, help="seed for stochastic sampling")
    parser.add_argument("--threads", type=int, help="worker-pool cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-condition", help="classify a growth or weight condition")
    p.add_argument("--phi", required=True)
    p.add_argument("--condition", default="calderon",
                   choices=["calderon", "equivalence", "inverse-tail", "lehto",
                            "boundary", "sphere-average-bound"])
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--delta0", type=float)
    p.add_argument("--weight")
    p.add_argument("--dimension", type=int, default=3)
    p.add_argument("--delta-max", type=float, default=0.5)
    p.add_argument("--report")

    p = sub.add_parser("build-extremal", help="build the extremal radial profile")
    p.add_argument("--phi", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", required=True, help="profile JSON path")
    p.add_argument("--no-rescale", action="store_true")
    p.add_argument("--u-max", type=float, default=1e6)
    p.add_argument("--nodes", type=int, default=16384)
    p.add_argument("--report")
    p.add_argument("--csv", help="write the s vs h table as CSV")

    p = sub.add_parser("build-counterexample", help="build the lattice shear model")
    p.add_argument("--phi", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--u-max", type=float, default=1e6)
    p.add_argument("--nodes", type=int, default=16384)
    p.add_argument("--report")

    p = sub.add_parser("verify-counterexample", help="run checks against a built model")
    p.add_argument("--model", required=True, help="model JSON path")
    p.add_argument("--checks", default="osc,diam,energy,hausdorff")
    p.add_argument("--levels", help="comma-separated levels, default 2..depth")
    p.add_argument("--sample-balls", type=int, default=8)
    p.add_argument("--samples-per-ball", type=int, default=4096)
    p.add_argument("--report")

    p = sub.add_parser("oscillation", help="point oscillation test of a field")
    p.add_argument("--field", required=True)
    p.add_argument("--center", default="0,0")
    p.add_argument("--scales", type=int, default=8)
    p.add_argument("--radius-max", type=float, default=0.5)
    p.add_argument("--report")

    p = sub.add_parser("modulus", help="ring modulus, closed form and grid oracle")
    p.add_argument("--ring", required=True, help="r1,r2,n")
    p.add_argument("--weight", default="const:c=1")
    p.add_argument("--family", default="curves", choices=["curves", "spheres"])
    p.add_argument("--grid", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--report")

    p = sub.add_parser("distortion", help="distortion coefficients and bounds")
    p.add_argument("--map", required=True)
    p.add_argument("--check", default="holder", choices=["holder", "kf", "bound"])
    p.add_argument("--point")
    p.add_argument("--eps0", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gap", type=float, default=1.0)
    p.add_argument("--report")
    p.add_argument("--csv", help="write the r vs bound curve as CSV")

    p = sub.add_parser("suite", help="run a manifest of named scenarios")
    p.add_argument("--manifest", help="file with one scenario name per line")
    p.add_argument("--report")

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    client = ServiceClient(args.server)
    cfg = _config_options(args)

    if args.command == "check-condition":
        status, body = client.post("/check-condition", {
            "phi": args.phi, "condition": args.condition, "k": args.k,
            "p": args.p, "delta": args.delta, "delta0": args.delta0,
            "weight": args.weight, "dimension": args.dimension,
            "delta_max": args.delta_max, "config": cfg,
        })
        code = _finish(args, status, body)
        if status == 200:
            _print_rows(body["payload"])
            for row in body["payload"]["reports"]:
                if "classification" in row:
                    print(f"  {row.get('condition', '')}: {row['classification']}")
        return code

    if args.command == "build-extremal":
        status, body = client.post("/build-extremal", {
            "phi": args.phi, "k": args.k, "rescale": not args.no_rescale,
            "u_max": args.u_max, "nodes": args.nodes, "config": cfg,
        })
        artifacts = {}
        if status == 200:
            artifacts[args.out] = body["payload"].pop("profile")
            table = body["payload"].pop("h_table")
            if args.csv:
                with open(args.csv, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["s", "h"])
                    writer.writerows(zip(table["s"], table["h"]))
        code = _finish(args, status, body, artifacts)
        if status == 200:
            _print_rows(body["payload"])
        return code

    if args.command == "build-counterexample":
        status, body = client.post("/build-counterexample", {
            "phi": args.phi, "k": args.k, "depth": args.depth,
            "u_max": args.u_max, "nodes": args.nodes, "config": cfg,
        })
        artifacts = {}
        if status == 200:
            artifacts[args.out] = body["payload"].pop("model")
        code = _finish(args, status, body, artifacts)
        if status == 200:
            _print_rows(body["payload"])
        return code

    if args.command == "verify-counterexample":
        model = json.loads(Path(args.model).read_text())
        levels = [int(x) for x in args.levels.split(",")] if args.levels else None
        status, body = client.post("/verify-counterexample", {
            "model": model, "checks": args.checks.split(","), "levels": levels,
            "sample_balls": args.sample_balls,
            "samples_per_ball": args.samples_per_ball, "config": cfg,
        })
        code = _finish(args, status, body)
        if status == 200:
            _print_rows(body["payload"])
        return code

    if args.command == "oscillation":
        cx, cy = (float(v) for v in args.center.split(","))
        status, body = client.post("/oscillation", {
            "field": args.field, "center": (cx, cy), "scales": args.scales,
            "radius_max": args.radius_max, "config": cfg,
        })
        code = _finish(args, status, body)
        if status == 200:
            _print_rows(body["payload"])
            pt = body["payload"]["point_test"]
            print(f"  point test: {pt['label']} (max osc {pt['max_oscillation']:.6g})")
        return code

    if args.command == "modulus":
        r1, r2, n = args.ring.split(",")
        status, body = client.post("/modulus", {
            "ring": (float(r1), float(r2), int(n)), "weight": args.weight,
            "family": args.family, "grid": args.grid, "p": args.p, "config": cfg,
        })
        code = _finish(args, status, body)
        if status == 200:
            _print_rows(body["payload"])
            print(f"  closed form: {body['payload']['closed_form']['value']:.8g}")
            if "grid" in body["payload"]:
                print(f"  grid oracle: {body['payload']['grid']['value']:.8g}")
        return code

    if args.command == "distortion":
        point = [float(v) for v in args.point.split(",")] if args.point else None
        status, body = client.post("/distortion", {
            "map": args.map, "check": args.check, "point": point,
            "eps0": args.eps0, "beta": args.beta, "gap": args.gap, "config": cfg,
        })
        artifacts = {}
        code = _finish(args, status, body, artifacts)
        if status == 200:
            _print_rows(body["payload"])
            if args.csv and "bound" in body["payload"]:
                with open(args.csv, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["quantity", "value"])
                    for key, val in body["payload"]["bound"].items():
                        writer.writerow([key, val])
        return code

    if args.command == "suite":
        manifest = None
        if args.manifest:
            manifest = [ln.strip() for ln in Path(args.manifest).read_text().splitlines()
                        if ln.strip() and not ln.startswith("#")]
        status, body = client.post("/suite", {"manifest": manifest, "config": cfg})
        code = _finish(args, status, body)
        if status == 200:
            counts = body["payload"]["counts"]
            print(f"suite: {body['payload']['total_checks']} checks "
                  f"({counts['PASS']} pass, {counts['FAIL']} fail, "
                  f"{counts['INCONCLUSIVE']} inconclusive)")
        return code

    parser.error(f"unknown command {args.command!r}")
    return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
