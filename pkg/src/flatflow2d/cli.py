"""Command line: ``flatflow2d run|reference|compare|verify|wulff --config <path>``.

Exit codes: 0 success, 1 configuration or input error, 2 typed halt of a run,
3 failed verification property.
"""

import argparse
import csv
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import ConfigError, load_config, parse_config, with_override
from .curve import hausdorff
from .errors import FlatFlowError
from .flow import FlowTrajectory, compare, run_flat_flow, run_pde_reference
from .verify import run_suite

EXIT_OK, EXIT_CONFIG, EXIT_HALT, EXIT_VERIFY = 0, 1, 2, 3


def _out_dir(args, cfg):
    out = args.out or cfg.output_dir
    if not os.path.isabs(out) and args.out is None:
        out = os.path.join(cfg.base_dir, out)
    os.makedirs(out, exist_ok=True)
    return out


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _summary(traj, E0, extra=None):
    last = traj.records[-1]
    out = {
        "exit_reason": "completed" if traj.halt is None else traj.halt.kind,
        "halt": None if traj.halt is None else traj.halt.to_dict(),
        "steps": len(traj.times) - 1,
        "t_final": traj.times[-1],
        "final_energies": {k: last[k] for k in ("P_phi", "E_elastic", "F_total")},
        "area_drift": (last["area"] - E0.area) / E0.area,
        "hausdorff_to_initial": hausdorff(E0, traj.final_curve),
        "tube_exit": None if traj.tube_exit is None else {"k": traj.tube_exit[0], "t": traj.tube_exit[1]},
    }
    out.update(extra or {})
    return out


def _run_one(cfg, out, stride, svg):
    E0 = cfg.build_initial_curve()
    traj = run_flat_flow(E0, cfg.step_config(), cfg.scheme["T"], stride=stride or cfg.scheme["snapshot_stride"])
    traj.save(out, svg=svg)
    _write_json(os.path.join(out, "summary.json"), _summary(traj, E0))
    return EXIT_OK if traj.halt is None else EXIT_HALT


def _sweep_job(job):
    data, base_dir, out, stride, svg = job
    try:
        return _run_one(parse_config(data, base_dir), out, stride, svg)
    except FlatFlowError as exc:
        print(f"{out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def cmd_run(args, cfg):
    out = _out_dir(args, cfg)
    if not cfg.sweep:
        code = _run_one(cfg, out, args.stride, args.svg)
        if code == EXIT_HALT:
            print(f"run halted; see {os.path.join(out, 'summary.json')}", file=sys.stderr)
        return code
    keys = sorted(cfg.sweep)
    jobs = []
    for j, values in enumerate(itertools.product(*(cfg.sweep[k] for k in keys))):
        data = dict(cfg.raw)
        data.pop("sweep", None)
        for k, v in zip(keys, values):
            data = with_override(data, k, v)
        parse_config(data, cfg.base_dir)  # fail fast on a bad combination
        jobs.append((data, cfg.base_dir, os.path.join(out, f"run_{j:03d}"), args.stride, args.svg))
    workers = max(1, int(os.environ.get("FLATFLOW_THREADS", os.cpu_count() or 1)))
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        codes = list(pool.map(_sweep_job, jobs))
    _write_json(
        os.path.join(out, "sweep.json"),
        {"keys": keys, "runs": [{"dir": os.path.basename(j[2]), "exit": c} for j, c in zip(jobs, codes)]},
    )
    return max(codes)


def cmd_reference(args, cfg):
    if not cfg.reference:
        raise ConfigError("reference", "section is required for the reference command")
    out = _out_dir(args, cfg)
    E0 = cfg.build_initial_curve()
    ref = cfg.reference
    traj = run_pde_reference(
        E0, cfg.anisotropy, cfg.elasticity, dt=ref["dt"], T=ref["T"], stride=args.stride or ref["stride"]
    )
    traj.save(out, svg=args.svg)
    _write_json(os.path.join(out, "summary.json"), _summary(traj, E0, {"dt": traj.dt}))
    return EXIT_OK if traj.halt is None else EXIT_HALT


def cmd_compare(args, cfg):
    dirs = []
    for key in ("a", "b"):
        path = cfg.compare.get(key)
        if not isinstance(path, str):
            raise ConfigError(f"compare.{key}", "must name a trajectory directory")
        if not os.path.isabs(path):
            path = os.path.join(cfg.base_dir, path)
        if not os.path.exists(os.path.join(path, "trajectory.json")):
            raise ConfigError(f"compare.{key}", f"no trajectory found in {path}")
        dirs.append(path)
    out = _out_dir(args, cfg)
    rows = compare(FlowTrajectory.load(dirs[0]), FlowTrajectory.load(dirs[1]))
    with open(os.path.join(out, "distances.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "t_other", "hausdorff", "l2_height"])
        for r in rows:
            w.writerow([repr(r["t"]), repr(r["t_other"]), repr(r["hausdorff"]), "" if r["l2_height"] is None else repr(r["l2_height"])])
    return EXIT_OK


def cmd_verify(args, cfg):
    out = _out_dir(args, cfg)
    results = run_suite(seed=cfg.seed)
    with open(os.path.join(out, "verify_report.txt"), "w") as fh:
        for r in results:
            fh.write(r.line() + "\n")
    _write_json(
        os.path.join(out, "verify_report.json"),
        [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
    )
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed properties: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_wulff(args, cfg):
    out = _out_dir(args, cfg)
    W = cfg.anisotropy.wulff_boundary(cfg.n)
    W.save(os.path.join(out, "wulff.json"))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "reference": cmd_reference,
    "compare": cmd_compare,
    "verify": cmd_verify,
    "wulff": cmd_wulff,
}


def build_parser():
    p = argparse.ArgumentParser(prog="flatflow2d", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--out", help="output directory (default: output_dir from the config)")
    p.add_argument("--stride", type=int, help="snapshot stride (overrides the config)")
    p.add_argument("--svg", action="store_true", help="also write an SVG of the snapshots")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.stride is not None and args.stride < 1:
        print("error: --stride must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FlatFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
