"""Command-line client for the detection service.

The CLI owns file I/O and argument handling; all computation runs behind
the HTTP API.  By default requests are served in-process (no socket, no
server needed); pass --server to target a running instance instead.
Set RSS_SENTINEL_LOG to error, info or debug to control log output.

Subcommands: simulate, extract, fuse-train, detect, pipeline, evaluate,
serve.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import httpx

from .config import ConfigError, apply_overrides
from .io import canonical_json, write_text

log = logging.getLogger("rss_sentinel")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class CliError(Exception):
    """User-facing failure; the message prints to stderr, exit code 2."""


def _setup_logging() -> None:
    name = os.environ.get("RSS_SENTINEL_LOG", "error").lower()
    if name not in _LOG_LEVELS:
        raise CliError(
            f"RSS_SENTINEL_LOG must be one of {sorted(_LOG_LEVELS)}, got {name!r}"
        )
    logging.basicConfig(level=_LOG_LEVELS[name], format="%(levelname)s %(name)s: %(message)s")


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from .service.app import create_app

    transport = httpx.ASGITransport(app=create_app())
    return httpx.Client(transport=transport, base_url="http://rss-sentinel.local", timeout=None)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise CliError(f"{path}: {_render_detail(detail)}")
    return response.json()


def _render_detail(detail) -> str:
    if isinstance(detail, list):  # pydantic validation errors
        parts = []
        for err in detail:
            loc = ".".join(str(x) for x in err.get("loc", []) if x != "body")
            parts.append(f"{loc}: {err.get('msg', 'invalid')}" if loc else err.get("msg", ""))
        return "; ".join(parts)
    return str(detail)


def _read_file(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {what} {path}: {exc}") from exc


def _load_config_doc(args) -> dict:
    if not args.config:
        raise CliError("--config is required")
    try:
        doc = json.loads(_read_file(args.config, "config"))
    except json.JSONDecodeError as exc:
        raise CliError(f"invalid JSON in config {args.config}: {exc}")
    try:
        doc = apply_overrides(doc, args.override or [])
    except ConfigError as exc:
        raise CliError(str(exc))
    if args.seed is not None:
        doc.setdefault("seeds", {})
        doc["seeds"] = {
            "sim_offline": args.seed,
            "sim_online": args.seed + 1,
            "fusion": args.seed + 2,
            "classifier": args.seed + 3,
        }
    if getattr(args, "fusion_bypass", False):
        doc.setdefault("fusion", {})["bypass"] = True
    # inline a referenced environment file so the service never touches disk
    env = doc.get("environment")
    if isinstance(env, str):
        env_path = Path(env)
        if not env_path.is_absolute():
            env_path = Path(args.config).parent / env_path
        try:
            doc["environment"] = json.loads(_read_file(str(env_path), "environment"))
        except json.JSONDecodeError as exc:
            raise CliError(f"invalid JSON in environment {env_path}: {exc}")
    return doc


def _out_dir(args, doc: dict | None = None) -> Path:
    if args.out:
        return Path(args.out)
    if doc and doc.get("output_dir"):
        return Path(doc["output_dir"])
    return Path("out")


def cmd_simulate(args) -> int:
    doc = _load_config_doc(args)
    with _client(args.server) as client:
        resp = _post(client, "/simulate", {"config": doc, "stage": args.stage})
    trace_path = Path(args.out) if args.out else _out_dir(args, doc) / f"trace_{args.stage}.csv"
    states_path = trace_path.with_name(trace_path.stem + "_states.csv")
    write_text(trace_path, resp["trace_csv"])
    write_text(states_path, resp["states_csv"])
    print(f"wrote {trace_path} and {states_path}")
    return 0


def cmd_extract(args) -> int:
    payload = {
        "trace_csv": _read_file(args.trace, "trace"),
        "normalize": not args.no_normalize,
    }
    if args.states:
        payload["states_csv"] = _read_file(args.states, "states")
    if args.config:
        doc = _load_config_doc(args)
        if "windowing" in doc:
            payload["windowing"] = doc["windowing"]
    with _client(args.server) as client:
        resp = _post(client, "/extract", payload)
    out = Path(args.out) if args.out else Path("features.csv")
    write_text(out, resp["features_csv"])
    print(f"wrote {out}")
    return 0


def cmd_fuse_train(args) -> int:
    payload: dict = {"features_csv": _read_file(args.features, "features"), "seed": args.seed or 0}
    if args.config:
        doc = _load_config_doc(args)
        if "fusion" in doc:
            payload["fusion"] = doc["fusion"]
        seeds = doc.get("seeds", {})
        if args.seed is None and "fusion" in seeds:
            payload["seed"] = seeds["fusion"]
    with _client(args.server) as client:
        resp = _post(client, "/fuse-train", payload)
    out = Path(args.out) if args.out else Path("fusion_model.json")
    write_text(out, canonical_json(resp["model_json"]))
    losses = resp["loss_history"]
    print(f"wrote {out} (loss {losses[0]:.4f} -> {losses[-1]:.4f})")
    return 0


def cmd_detect(args) -> int:
    payload: dict = {
        "source_csv": _read_file(args.source, "source features"),
        "target_csv": _read_file(args.target, "target features"),
    }
    if args.model:
        payload["model_json"] = json.loads(_read_file(args.model, "fusion model"))
    doc = None
    if args.config:
        doc = _load_config_doc(args)
        for key in ("kernels", "transfer", "iteration"):
            if key in doc:
                payload[key] = doc[key]
        if "seeds" in doc and "classifier" in doc["seeds"]:
            payload["classifier_seed"] = doc["seeds"]["classifier"]
    with _client(args.server) as client:
        resp = _post(client, "/detect", payload)
    out_dir = _out_dir(args, doc)
    write_text(out_dir / "report.json", canonical_json(resp["report"]))
    if resp.get("confusion_csv"):
        write_text(out_dir / "confusion.csv", resp["confusion_csv"])
    print(resp["summary"])
    return 0


def cmd_pipeline(args) -> int:
    doc = _load_config_doc(args)
    with _client(args.server) as client:
        resp = _post(client, "/pipeline", {"config": doc})
    out_dir = _out_dir(args, doc)
    write_text(out_dir / "report.json", canonical_json(resp["report"]))
    if resp.get("confusion_csv"):
        write_text(out_dir / "confusion.csv", resp["confusion_csv"])
    write_text(out_dir / "effective_config.json", canonical_json(resp["effective_config"]))
    print(resp["summary"])
    return 0


def cmd_evaluate(args) -> int:
    payload = {
        "truth_csv": _read_file(args.truth, "truth"),
        "pred_csv": _read_file(args.pred, "predictions"),
        "n_states": args.classes,
    }
    with _client(args.server) as client:
        resp = _post(client, "/evaluate", payload)
    out_dir = _out_dir(args)
    metrics_doc = {"fp": resp["fp"], "fn": resp["fn"], "da": resp["da"], "confusion": resp["confusion"]}
    write_text(out_dir / "metrics.json", canonical_json(metrics_doc))
    write_text(out_dir / "confusion.csv", resp["confusion_csv"])

    def fmt(v):
        return "n/a" if v is None else f"{v:.4f}"

    print(f"FP={fmt(resp['fp'])} FN={fmt(resp['fn'])} DA={fmt(resp['da'])}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rss-sentinel",
        description="WLAN device-free intrusion detection pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config: bool = True) -> None:
        if config:
            p.add_argument("--config", help="pipeline config JSON")
            p.add_argument(
                "--override",
                action="append",
                metavar="KEY=VALUE",
                help="override a config entry (dotted path), repeatable",
            )
            p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", help="output file or directory")
        p.add_argument("--server", help="base URL of a running service (default: in-process)")

    p = sub.add_parser("simulate", help="generate synthetic trace and state files")
    common(p)
    p.add_argument("--stage", choices=["offline", "online"], default="offline")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", help="extract windowed features from a trace")
    common(p)
    p.add_argument("--trace", required=True, help="trace CSV")
    p.add_argument("--states", help="state CSV (for window labels)")
    p.add_argument("--no-normalize", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("fuse-train", help="train the fusion network on labelled features")
    common(p)
    p.add_argument("--features", required=True, help="normalized labelled features CSV")
    p.set_defaults(func=cmd_fuse_train)

    p = sub.add_parser("detect", help="run transfer detection on feature files")
    common(p)
    p.add_argument("--source", required=True, help="labelled source features CSV")
    p.add_argument("--target", required=True, help="target features CSV")
    p.add_argument("--model", help="fusion model JSON to apply to both inputs")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("pipeline", help="run the full simulate-to-report pipeline")
    common(p)
    p.add_argument("--fusion-bypass", action="store_true", help="skip the fusion network")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("evaluate", help="score a prediction file against ground truth")
    common(p, config=False)
    p.add_argument("--truth", required=True, help="true state CSV")
    p.add_argument("--pred", required=True, help="predicted state CSV")
    p.add_argument("--classes", type=int, required=True, help="number of states K")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        _setup_logging()
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
