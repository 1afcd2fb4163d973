import argparse
import json
import logging
import time
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from nethil.config.constants import DEFAULT_ENSEMBLE_SEEDS, DEFAULT_GRID_DELAY_MS, DEFAULT_GRID_PLR, PROFILE_ORDER, TapDirection
from nethil.config.settings import settings
from nethil.coord.scenario import ScenarioError
from nethil.coord.simulation import NonProgressError, run_coordination
from nethil.harness.grid import GridSpec, run_grid
from nethil.harness.loader import profile_with_source, scenario_with_source
from nethil.harness.manifest import RunManifest, file_sha256
from nethil.harness.suite import run_teleop_suite
from nethil.metrics.delay import filter_records, one_way_delay_stats
from nethil.metrics.rates import MetricsError
from nethil.metrics.report import render_report, rows_from_document
from nethil.netchan.agent import run_forward_agent, run_impairment_proxy
from nethil.netchan.profile import ChannelProfile, ProfileError
from nethil.netchan.tap import TapFormatError, TapSink, load_tap
from nethil.teleop.kinematics import ReachabilityError
from nethil.teleop.motion import MotionProfile, TeleopConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUN_FAILURE = 1
EXIT_USAGE = 2

# errors that mean "the run could not be carried out" rather than a bad command line
RUN_ERRORS = (
    ScenarioError, ProfileError, NonProgressError, ReachabilityError,
    MetricsError, TapFormatError, OSError,
)


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Network-in-the-loop testbed for multi-robot coordination and teleoperation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", metavar="<command>")
    sub.required = True

    p = sub.add_parser("coord", help="one coordination run")
    p.add_argument("--scenario", required=True, help="scenario name (scenarios/) or YAML file")
    p.add_argument("--profile", help="channel profile name (profiles/) or YAML file")
    p.add_argument("--plr", type=float, help="static model packet loss rate (instead of --profile)")
    p.add_argument("--delay-ms", type=float, help="static model one-way delay (instead of --profile)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--min-cs", type=int, default=settings.DEFAULT_MIN_CS, help="stop after this many critical sections")
    p.add_argument("--out", type=Path, default=settings.OUTPUT_DIR / "coord")
    p.add_argument("--trace-poses", action="store_true", help="also write poses.csv (large)")
    p.add_argument("--tap", type=Path, help="write endpoint tap records to this CSV")
    p.add_argument("--max-virtual-s", type=float, help="stop after this much virtual time")

    p = sub.add_parser("teleop", help="teleoperation runs over one or more channel profiles")
    p.add_argument("--profile", action="append", help="channel profile (repeatable); default: the four bundled ones")
    p.add_argument("--loops", type=int, default=settings.TELEOP_LOOPS)
    p.add_argument("--seed", type=int, action="append", help="seed (repeatable); default 1")
    p.add_argument("--out", type=Path, default=settings.OUTPUT_DIR / "teleop")
    p.add_argument("--scale", type=float, help="motion mapping scale")
    p.add_argument("--amplitude", type=float, help="swing amplitude in metres")
    p.add_argument("--qdot-max", type=float, help="joint rate limit in rad/s")
    p.add_argument("--watchdog-ms", type=float, help="EGM receive watchdog")
    p.add_argument("--reconnect-ms", type=float, help="delay before re-activation")
    p.add_argument("--tap", action="store_true", help="write tap.csv per run")

    p = sub.add_parser("grid", help="static (plr, delay) grid and profile rows over seed ensembles")
    p.add_argument("--scenario", required=True)
    p.add_argument("--plr", type=float, nargs="+", default=DEFAULT_GRID_PLR)
    p.add_argument("--delay-ms", type=float, nargs="+", default=DEFAULT_GRID_DELAY_MS)
    p.add_argument("--no-static", action="store_true", help="skip the static cells")
    p.add_argument("--profiles", nargs="*", default=[], help="channel profiles reported as extra rows")
    p.add_argument("--seeds", type=int, nargs="+", default=DEFAULT_ENSEMBLE_SEEDS)
    p.add_argument("--min-cs", type=int, default=settings.DEFAULT_MIN_CS)
    p.add_argument("--out", type=Path, default=settings.OUTPUT_DIR / "grid")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trace-poses", action="store_true")

    p = sub.add_parser("agent", help="forward UDP datagrams unchanged, tapping each one")
    p.add_argument("--listen", required=True, help="ip:port")
    p.add_argument("--forward", required=True, help="ip:port")
    p.add_argument("--tap", type=Path)

    p = sub.add_parser("proxy", help="forwarding agent that delays and drops datagrams")
    p.add_argument("--listen", required=True)
    p.add_argument("--forward", required=True)
    p.add_argument("--delay-ms", type=float, default=0.0)
    p.add_argument("--plr", type=float, default=0.0)
    p.add_argument("--jitter-ms", type=float, default=0.0, help="uniform ±jitter")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--tap", type=Path)

    p = sub.add_parser("report", help="re-render the table of a finished grid or suite")
    p.add_argument("--in", dest="in_dir", type=Path, required=True)

    p = sub.add_parser("delay-stats", help="one-way delay and loss from tap files")
    p.add_argument("--send", type=Path, required=True, help="tap CSV holding the send records")
    p.add_argument("--recv", type=Path, required=True, help="tap CSV holding the recv records")
    p.add_argument("--send-endpoint", help="only send records of this endpoint")
    p.add_argument("--recv-endpoint", help="only recv records of this endpoint")
    p.add_argument("--unsynchronized", action="store_true", help="the taps come from different hosts")
    p.add_argument("--json", action="store_true")
    return parser


# ── subcommands ────────────────────────────────────────────────────────────

def cmd_coord(args) -> int:
    scenario, scenario_src = scenario_with_source(args.scenario)
    if args.profile:
        if args.plr is not None or args.delay_ms is not None:
            raise UsageError("--profile cannot be combined with --plr/--delay-ms")
        profile, profile_src = profile_with_source(args.profile)
    else:
        profile = ChannelProfile.static(args.plr or 0.0, args.delay_ms or 0.0)
        profile_src = None

    manifest = RunManifest(
        command="coord",
        seeds=[args.seed],
        scenario=scenario.name,
        scenario_sha256=file_sha256(scenario_src),
        profiles={profile.name: file_sha256(profile_src)},
        parameters={
            "min_cs": args.min_cs,
            "control_period_ms": scenario.control_period_ms,
            "tracker_period_ms": scenario.tracker_period_ms,
            "ds": scenario.sample_spacing,
            "safety_margin_indices": scenario.safety_margin_indices,
            "profile": profile.model_dump(mode="json"),
        },
    )
    manifest.write(args.out)
    started = time.monotonic()
    run = run_coordination(
        scenario, profile, args.seed, args.min_cs, out_dir=args.out,
        trace_poses=args.trace_poses, tap_path=args.tap, max_virtual_s=args.max_virtual_s,
    )
    manifest.wall_s = round(time.monotonic() - started, 3)
    manifest.write(args.out)
    print(run.stats.to_json(), end="")
    return EXIT_OK


def cmd_teleop(args) -> int:
    refs = args.profile or PROFILE_ORDER[:4]
    loaded = [profile_with_source(ref) for ref in refs]
    profiles = [p for p, _ in loaded]
    sources = {p.name: src for p, src in loaded}

    motion_kwargs = {"loops": args.loops}
    if args.amplitude is not None:
        motion_kwargs["amplitude_m"] = args.amplitude
    config_kwargs = {
        k: v for k, v in {
            "mapping_scale": args.scale,
            "qdot_max": args.qdot_max,
            "watchdog_timeout_ms": args.watchdog_ms,
            "reconnect_delay_ms": args.reconnect_ms,
        }.items() if v is not None
    }
    result = run_teleop_suite(
        profiles, MotionProfile(**motion_kwargs), TeleopConfig(**config_kwargs),
        args.seed or [1], args.out, profile_sources=sources, tap=args.tap,
    )
    print(result.text, end="")
    return EXIT_OK if result.ok else EXIT_RUN_FAILURE


def cmd_grid(args) -> int:
    scenario, scenario_src = scenario_with_source(args.scenario)
    loaded = {}
    for ref in args.profiles:
        profile, src = profile_with_source(ref)
        loaded[profile.name] = (profile, src)
    grid = GridSpec.from_lists(
        [] if args.no_static else args.plr,
        args.delay_ms,
        profiles=list(loaded),
        seeds=args.seeds,
        min_cs=args.min_cs,
    )
    result = run_grid(
        scenario, grid, args.out,
        named_profiles={name: p for name, (p, _) in loaded.items()},
        scenario_source=scenario_src,
        profile_sources={name: src for name, (_, src) in loaded.items()},
        workers=args.workers,
        trace_poses=args.trace_poses,
    )
    print(result.text, end="")
    for failure in result.failures:
        logger.error(f"Failed run {failure}")
    return EXIT_OK if result.ok else EXIT_RUN_FAILURE


def cmd_agent(args) -> int:
    tap = TapSink(args.tap) if args.tap else None
    try:
        run_forward_agent(args.listen, args.forward, tap)
    except KeyboardInterrupt:
        logger.info("Agent interrupted")
    finally:
        if tap:
            tap.close()
    return EXIT_OK


def cmd_proxy(args) -> int:
    if not 0.0 <= args.plr <= 1.0 or args.delay_ms < 0 or args.jitter_ms < 0:
        raise UsageError("--plr must be in [0, 1]; --delay-ms and --jitter-ms must be >= 0")
    tap = TapSink(args.tap) if args.tap else None
    try:
        run_impairment_proxy(args.listen, args.forward, args.delay_ms, args.plr, args.jitter_ms, args.seed, tap)
    except KeyboardInterrupt:
        logger.info("Proxy interrupted")
    finally:
        if tap:
            tap.close()
    return EXIT_OK


def cmd_report(args) -> int:
    path = args.in_dir / "report.json"
    if not path.exists():
        raise UsageError(f"{path} does not exist")
    doc = json.loads(path.read_text(encoding="utf-8"))
    text, _ = render_report(rows_from_document(doc))
    print(text, end="")
    return EXIT_OK


def cmd_delay_stats(args) -> int:
    sends = filter_records(load_tap(args.send), args.send_endpoint, TapDirection.SEND)
    recvs = filter_records(load_tap(args.recv), args.recv_endpoint, TapDirection.RECV)
    stats = one_way_delay_stats(sends, recvs, clock_synchronized=not args.unsynchronized)
    print(stats.to_json() if args.json else stats.render(), end="")
    return EXIT_OK


COMMANDS = {
    "coord": cmd_coord,
    "teleop": cmd_teleop,
    "grid": cmd_grid,
    "agent": cmd_agent,
    "proxy": cmd_proxy,
    "report": cmd_report,
    "delay-stats": cmd_delay_stats,
}


def cli_main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help and 2 for usage errors
        return int(e.code) if e.code is not None else EXIT_OK

    if args.verbose or settings.DEBUG:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage()
        logger.error(str(e))
        return EXIT_USAGE
    except ValidationError as e:
        # option values the run models reject, e.g. --loops 0 or --plr 1.5
        parser.print_usage()
        details = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors())
        logger.error(f"{args.command}: {details}")
        return EXIT_USAGE
    except RUN_ERRORS as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_RUN_FAILURE
