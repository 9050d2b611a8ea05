"""Command-line entry point.

Subcommands: ``serve`` (run the tool-link and HTTP servers), ``repo``
(init/log/verify/export/import/metrics), ``sim run`` (scripted
simulator session against a running server), ``stats`` (questionnaire
scoring and group comparison), ``demo`` (scripted end-to-end session in
one process). Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import shutil
import sys
import tempfile

from ._version import __version__
from .clock import FixedClock, SystemClock
from .errors import AlreadyExists, LabbookError
from .protocol.config import DEFAULT_HTTP_PORT, DEFAULT_TOOL_PORT, resolve_config
from .provstore.bundle import read_bundle, write_bundle
from .provstore.repo import Repository

DEMO_SCRIPT = """\
# scripted session on the ramp scene
camera 0 -15 6 1 0 0 0
marker 2 4 4 crest line
marker -3 2 2 toe of slope
distance 2 4 4 -3 2 2
strikedip 0 0 0 1 0 1 0 1 0
bookmark
remove @2
restore @1
marker 5 5 5 alternate interpretation
"""


def _print_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2))


def _make_clock(args):
    seed = getattr(args, "fixed_clock", None)
    if seed is None:
        return SystemClock()
    return FixedClock(start=seed)


def _add_fixed_clock(parser) -> None:
    parser.add_argument(
        "--fixed-clock",
        nargs="?",
        type=int,
        const=1_700_000_000,
        default=None,
        metavar="EPOCH",
        help="use a deterministic clock starting at EPOCH seconds (for reproducible runs)",
    )


# -- serve ----------------------------------------------------------------


def cmd_serve(args) -> int:
    from .protocol.httpapi import HttpApi
    from .protocol.server import ProvenanceService, ToolServer

    config = resolve_config(
        {
            "repo_root": args.repo,
            "port": args.port,
            "http_port": args.http_port,
            "author": args.author,
            "host": args.host,
        },
        config_path=args.config,
    )
    service = ProvenanceService(config.repo_root, author=config.author, clock=_make_clock(args))
    tool = ToolServer(service, host=config.host, port=config.port)
    http = HttpApi(service, host=config.host, port=config.http_port, ui_dir=args.ui_dir)
    tool.start()
    http.start()
    print(f"repository: {os.path.abspath(config.repo_root)}")
    print(f"tool link : {config.host}:{tool.port}")
    print(f"http api  : http://{config.host}:{http.port}/api/v1/")
    try:
        import threading

        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        tool.stop()
        http.stop()
    return 0


# -- repo ----------------------------------------------------------------


def cmd_repo_init(args) -> int:
    from .session.engine import Session

    # Session.start adopts an existing store (serve relies on that); init must not.
    if os.path.isfile(os.path.join(args.path, "HEAD")):
        raise AlreadyExists(f"repository already exists at {args.path}")
    session = Session.start(args.path, author=args.author, clock=_make_clock(args))
    print(f"initialized repository at {os.path.abspath(args.path)}")
    print(f"HEAD {session.head_commit().id}")
    return 0


def cmd_repo_log(args) -> int:
    repo = Repository.open(args.path)
    commits = repo.log()
    if args.json:
        _print_json(
            [
                {
                    "id": c.id,
                    "kind": c.state_kind,
                    "message": c.message,
                    "author": c.author,
                    "timestamp": c.timestamp.rfc3339(),
                    "parents": list(c.parents),
                }
                for c in commits
            ]
        )
        return 0
    tips = {oid: name for name, oid in repo.branches().items()}
    for commit in commits:
        mark = f" [{tips[commit.id]}]" if commit.id in tips else ""
        print(f"{commit.id[:12]} {commit.state_kind:<19} {commit.message}{mark}")
    return 0


def cmd_repo_verify(args) -> int:
    repo = Repository.open(args.path)
    findings = repo.verify()
    if args.json:
        _print_json({"ok": not findings, "findings": findings})
    elif findings:
        for finding in findings:
            print(finding)
    else:
        print("ok")
    return 1 if findings else 0


def cmd_repo_export(args) -> int:
    repo = Repository.open(args.path)
    write_bundle(repo, args.out)
    print(f"wrote {args.out} ({os.path.getsize(args.out)} bytes)")
    return 0


def cmd_repo_import(args) -> int:
    repo = read_bundle(args.bundle, args.path)
    print(f"imported into {repo.root}")
    return 0


def cmd_repo_metrics(args) -> int:
    from .analysis.metrics import repo_metrics

    metrics = repo_metrics(Repository.open(args.path))
    if args.json:
        _print_json(metrics.as_dict())
    else:
        for name, value in metrics.as_dict().items():
            print(f"{name.ljust(28)} {value}")
    return 0


# -- sim ----------------------------------------------------------------


def cmd_sim_run(args) -> int:
    from .vftsim.client import SimulatorClient
    from .vftsim.scenes import load_scene
    from .vftsim.script import parse_script_file, run_script

    steps = parse_script_file(args.script)
    scene = load_scene(args.scene)
    http_base = f"http://{args.host}:{args.http_port}" if args.http_port else None
    client = SimulatorClient(
        args.host, args.port, scene, client_name="sim", http_base=http_base
    )
    client.connect()
    try:
        client.bind_repo(args.mode)
        transcript = run_script(client, steps)
    finally:
        client.close()
    if args.json:
        _print_json(
            {
                "committed": transcript.committed,
                "minted_ids": transcript.minted_ids,
                "frames": len(transcript.frames),
            }
        )
    else:
        for ack in transcript.committed:
            mid = ack["measurement_id"] or "-"
            print(f"committed {ack['commit'][:12]} measurement={mid}")
        print(f"{len(transcript.committed)} commit(s), {len(transcript.frames)} frames")
    return 0


# -- stats ----------------------------------------------------------------


def cmd_stats_tam(args) -> int:
    import statistics

    from .analysis.tam import read_tam_csv

    rows = read_tam_csv(args.csv)
    if args.json:
        _print_json(
            [
                {
                    "participant_id": row.participant_id,
                    "group": row.group,
                    "pu": row.scores.pu,
                    "peou": row.scores.peou,
                }
                for row in rows
            ]
        )
        return 0
    print(f"{'participant':<14} {'group':<10} {'pu':>7} {'peou':>7}")
    for row in rows:
        print(
            f"{row.participant_id:<14} {row.group:<10} {row.scores.pu:>7.2f} {row.scores.peou:>7.2f}"
        )
    groups = sorted({row.group for row in rows})
    for group in groups:
        pus = [r.scores.pu for r in rows if r.group == group]
        peous = [r.scores.peou for r in rows if r.group == group]
        print(
            f"median[{group}] pu={statistics.median(pus):.2f} peou={statistics.median(peous):.2f}"
        )
    return 0


_METRIC_VARIABLES = (
    "mindmap_saves",
    "mindmap_states_final",
    "mindmap_states_cumulative",
    "measurement_interactions",
    "annotated_states",
    "annotation_chars",
)


def cmd_stats_compare(args) -> int:
    from .analysis.compare import compare_groups, format_comparison
    from .errors import InvalidInput

    variable = args.variable
    if variable in ("pu", "peou"):
        from .analysis.tam import read_tam_csv

        rows = read_tam_csv(args.csv)
        value_of = lambda row: getattr(row.scores, variable)
    elif variable in _METRIC_VARIABLES:
        from .analysis.metrics import read_metrics_csv

        rows = read_metrics_csv(args.csv)
        value_of = lambda row: getattr(row.metrics, variable)
    else:
        raise InvalidInput(f"unknown variable: {variable!r}")

    seen = []
    for row in rows:
        if row.group not in seen:
            seen.append(row.group)
    group_a = args.group_a if args.group_a is not None else (seen + [None])[0]
    group_b = args.group_b if args.group_b is not None else (seen + [None, None])[1]
    if group_a is None or group_b is None:
        raise InvalidInput(f"need two groups, found {seen}")
    a = [value_of(row) for row in rows if row.group == group_a]
    b = [value_of(row) for row in rows if row.group == group_b]
    if not a or not b:
        raise InvalidInput(f"empty group among {group_a!r}, {group_b!r}")
    comparison = compare_groups(a, b, mwu_method=args.method, t_variance=args.variance)
    if args.json:
        _print_json(dict(comparison.as_dict(), variable=variable, group_a=group_a, group_b=group_b))
    else:
        print(f"groups: a={group_a!r} b={group_b!r}")
        print(format_comparison(variable, comparison))
    return 0


# -- demo ----------------------------------------------------------------


def cmd_demo(args) -> int:
    from .analysis.metrics import repo_metrics
    from .protocol.httpapi import HttpApi
    from .protocol.server import ProvenanceService, ToolServer
    from .provstore.bundle import export_bundle
    from .vftsim.client import SimulatorClient
    from .vftsim.scenes import load_scene
    from .vftsim.script import parse_script, run_script

    workdir = args.dir or tempfile.mkdtemp(prefix="labbook-demo-")
    cleanup = args.dir is None and not args.keep
    repo_path = os.path.join(workdir, "repo")
    clock = _make_clock(args)

    service = ProvenanceService(repo_path, author="demo", clock=clock)
    tool = ToolServer(service, host="127.0.0.1", port=0)
    http = HttpApi(service, host="127.0.0.1", port=0)
    tool.start()
    http.start()
    client = SimulatorClient(
        "127.0.0.1",
        tool.port,
        load_scene("ramp"),
        client_name="demo-sim",
        http_base=f"http://127.0.0.1:{http.port}",
    )
    try:
        client.connect()
        client.bind_repo("load")
        transcript = run_script(client, parse_script(DEMO_SCRIPT))
        acks = transcript.committed

        mindmap = {
            "nodes": [
                {
                    "node_id": "n1",
                    "kind": "state",
                    "commit": acks[0]["commit"],
                    "position": [60.0, 40.0],
                    "text": "first marker",
                },
                {
                    "node_id": "n2",
                    "kind": "state",
                    "commit": acks[3]["commit"],
                    "position": [200.0, 40.0],
                    "text": "slope measured",
                },
                {
                    "node_id": "n3",
                    "kind": "label",
                    "position": [130.0, 120.0],
                    "text": "ramp interpretation",
                },
            ],
            "edges": [["n1", "n3", ""], ["n2", "n3", "supports"]],
        }
        service.put_mindmap(mindmap)
        service.put_notes("Ramp session: measured the incline and bookmarked the overview.\n")
        service.annotate(acks[0]["commit"], "Good anchor point for the traverse.", author="demo")
        service.annotate(acks[3]["commit"], "Matches the 45 degree incline.", author="demo")
        redo = service.ui_redo(acks[2]["commit"])
        client.wait_for_push(timeout=10)

        bundle = export_bundle(service.session.repo)
        with open(args.out, "wb") as fh:
            fh.write(bundle)

        metrics = repo_metrics(service.session.repo)
        commits = service.session.log()
        print(f"repository : {repo_path}")
        print(f"commits    : {len(commits)}")
        print(f"branches   : {', '.join(sorted(service.session.repo.branches()))}")
        print(f"redo commit: {redo.commit.id[:12]}")
        print(f"bundle     : {args.out} ({len(bundle)} bytes)")
        print(f"bundle sha : {hashlib.sha256(bundle).hexdigest()}")
        for name, value in metrics.as_dict().items():
            print(f"metric {name.ljust(28)} {value}")
    finally:
        client.close()
        tool.stop()
        http.stop()
        if cleanup:
            shutil.rmtree(workdir, ignore_errors=True)
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labbook", description="Provenance lab book tooling")
    parser.add_argument("--version", action="version", version=f"labbook {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the provenance server")
    serve.add_argument("--repo", help="repository path (or LABBOOK_REPO_ROOT)")
    serve.add_argument("--config", help="key=value config file")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None, help=f"tool port (default {DEFAULT_TOOL_PORT})")
    serve.add_argument(
        "--http-port", type=int, default=None, help=f"http port (default {DEFAULT_HTTP_PORT})"
    )
    serve.add_argument("--author", default=None)
    serve.add_argument("--ui-dir", default=None, help="serve this directory as the web UI")
    _add_fixed_clock(serve)
    serve.set_defaults(func=cmd_serve)

    repo = sub.add_parser("repo", help="repository maintenance")
    repo_sub = repo.add_subparsers(dest="repo_command", required=True)

    r_init = repo_sub.add_parser("init", help="create a repository with its first commit")
    r_init.add_argument("path")
    r_init.add_argument("--author", default="operator")
    _add_fixed_clock(r_init)
    r_init.set_defaults(func=cmd_repo_init)

    r_log = repo_sub.add_parser("log", help="list commits, newest first")
    r_log.add_argument("path")
    r_log.add_argument("--json", action="store_true")
    r_log.set_defaults(func=cmd_repo_log)

    r_verify = repo_sub.add_parser("verify", help="check repository integrity")
    r_verify.add_argument("path")
    r_verify.add_argument("--json", action="store_true")
    r_verify.set_defaults(func=cmd_repo_verify)

    r_export = repo_sub.add_parser("export", help="write a bundle file")
    r_export.add_argument("path")
    r_export.add_argument("--out", "-o", required=True)
    r_export.set_defaults(func=cmd_repo_export)

    r_import = repo_sub.add_parser("import", help="recreate a repository from a bundle")
    r_import.add_argument("bundle")
    r_import.add_argument("path")
    r_import.set_defaults(func=cmd_repo_import)

    r_metrics = repo_sub.add_parser("metrics", help="usage metrics of a repository")
    r_metrics.add_argument("path")
    r_metrics.add_argument("--json", action="store_true")
    r_metrics.set_defaults(func=cmd_repo_metrics)

    sim = sub.add_parser("sim", help="reference visualization client")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True)
    s_run = sim_sub.add_parser("run", help="run a session script against a server")
    s_run.add_argument("--script", required=True)
    s_run.add_argument("--scene", required=True, help="bundled scene name or scene file path")
    s_run.add_argument("--host", default="127.0.0.1")
    s_run.add_argument("--port", type=int, default=DEFAULT_TOOL_PORT)
    s_run.add_argument(
        "--http-port",
        type=int,
        default=DEFAULT_HTTP_PORT,
        help="http port for restore steps (0 disables)",
    )
    s_run.add_argument("--mode", choices=("load", "create"), default="load")
    s_run.add_argument("--json", action="store_true")
    s_run.set_defaults(func=cmd_sim_run)

    stats = sub.add_parser("stats", help="questionnaire scoring and group comparison")
    stats_sub = stats.add_subparsers(dest="stats_command", required=True)
    st_tam = stats_sub.add_parser("tam", help="score responses from a CSV file")
    st_tam.add_argument("csv")
    st_tam.add_argument("--json", action="store_true")
    st_tam.set_defaults(func=cmd_stats_tam)

    st_cmp = stats_sub.add_parser("compare", help="compare one variable between two groups")
    st_cmp.add_argument("csv")
    st_cmp.add_argument(
        "--variable",
        required=True,
        help="pu, peou, or a metrics column (e.g. annotation_chars)",
    )
    st_cmp.add_argument("--group-a", default=None)
    st_cmp.add_argument("--group-b", default=None)
    st_cmp.add_argument("--method", choices=("asymptotic_cc", "exact"), default="asymptotic_cc")
    st_cmp.add_argument("--variance", choices=("pooled", "welch"), default="pooled")
    st_cmp.add_argument("--json", action="store_true")
    st_cmp.set_defaults(func=cmd_stats_compare)

    demo = sub.add_parser("demo", help="scripted end-to-end session in one process")
    demo.add_argument("--dir", default=None, help="work directory (default: temporary)")
    demo.add_argument("--out", default="labbook-demo.zip", help="bundle output path")
    demo.add_argument("--keep", action="store_true", help="keep the work directory")
    _add_fixed_clock(demo)
    demo.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LabbookError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error[NOT_FOUND]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[OS]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
