"""Command-line front end.

By default the commands run in-process; --server URL sends the same
schema payloads to a running service instead.

Exit codes: 0 ok, 1 stability condition unsatisfied, 2 input error,
3 infeasible set-points, 4 divergence.
"""

import argparse
import concurrent.futures
import json
import os
import sys

import pydantic

from .errors import DivergenceError, InfeasibleSetpointsError, InputError
from .output import write_outputs
from .schemas import CheckResponse, ScenarioFile, SimulateResponse, SolveResponse
from .service import case_study_file, run_check, run_simulate, run_solve

EXIT_OK = 0
EXIT_UNSATISFIED = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_DIVERGENCE = 4


def _load_scenario(path: str) -> ScenarioFile:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}")
    try:
        return ScenarioFile.model_validate(data)
    except pydantic.ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise InputError(f"{path}: schema error at {loc}: {first['msg']}")


def _post(server: str, route: str, sf: ScenarioFile) -> dict:
    import httpx

    resp = httpx.post(
        server.rstrip("/") + route, json=sf.model_dump(mode="json"), timeout=300.0
    )
    if resp.status_code == 409:
        raise InfeasibleSetpointsError(resp.json().get("error", "infeasible"))
    if resp.status_code == 422 and resp.json().get("kind") == "divergence":
        raise DivergenceError(resp.json().get("error", "divergence"))
    if resp.status_code >= 400:
        raise InputError(f"server error {resp.status_code}: {resp.text}")
    return resp.json()


def _apply_overrides(sf: ScenarioFile, args) -> ScenarioFile:
    changes = {}
    if getattr(args, "dt", None) is not None:
        changes["dt"] = args.dt
    if getattr(args, "frame", None) is not None:
        changes["frame"] = args.frame
    return sf.model_copy(update=changes) if changes else sf


def cmd_check(args) -> int:
    sf = _apply_overrides(_load_scenario(args.file), args)
    if args.server:
        resp = CheckResponse.model_validate(_post(args.server, "/check", sf))
    else:
        resp = run_check(sf)
    for rep in resp.reports:
        verdict = "satisfied" if rep.satisfied else "NOT satisfied"
        print(
            f"event t={rep.event_time:g}s: condition {verdict} "
            f"(lhs={rep.lhs:.6g}, rhs={rep.rhs:.6g}, decay={rep.decay_rate:.6g})"
        )
        if rep.reason:
            print(f"  warning: {rep.reason}")
    print(resp.model_dump_json())
    return EXIT_OK if resp.all_satisfied else EXIT_UNSATISFIED


def cmd_solve(args) -> int:
    sf = _apply_overrides(_load_scenario(args.file), args)
    if args.server:
        resp = SolveResponse.model_validate(_post(args.server, "/solve", sf))
    else:
        resp = run_solve(sf)
    print(resp.model_dump_json())
    return EXIT_OK if resp.all_feasible else EXIT_INFEASIBLE


def _simulate_one(sf: ScenarioFile, args, out_dir: str) -> None:
    if args.server:
        resp = SimulateResponse.model_validate(_post(args.server, "/simulate", sf))
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "trajectory.csv"), "w", newline="") as fh:
            fh.write(resp.csv)
        with open(os.path.join(out_dir, "fig5.gp"), "w", newline="") as fh:
            fh.write(resp.gnuplot)
        summary = resp.model_dump(exclude={"csv", "gnuplot"})
    else:
        from . import sim

        traj = sim.integrate(sf.to_scenario())
        write_outputs(traj, out_dir)
        summary = {
            "n_samples": len(traj.times),
            "t_end": float(traj.times[-1]),
            "final_mags": [float(x) for x in traj.mags[-1]],
            "final_freq_hz": [float(x) for x in traj.freq_hz[-1]],
            "final_p": [float(x) for x in traj.p[-1]],
            "final_q": [float(x) for x in traj.q[-1]],
        }
    print(json.dumps({"out": out_dir, **summary}))


def cmd_simulate(args) -> int:
    files = args.file if isinstance(args.file, list) else [args.file]
    out = args.out or "."
    if args.sweep and len(files) > 1:
        threads = int(os.environ.get("OSCGRID_THREADS", os.cpu_count() or 1))
        jobs = []
        with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
            for path in files:
                sf = _apply_overrides(_load_scenario(path), args)
                stem = os.path.splitext(os.path.basename(path))[0]
                jobs.append(ex.submit(_simulate_one, sf, args, os.path.join(out, stem)))
            for job in jobs:
                job.result()
        return EXIT_OK
    for path in files:
        sf = _apply_overrides(_load_scenario(path), args)
        dest = out if len(files) == 1 else os.path.join(
            out, os.path.splitext(os.path.basename(path))[0]
        )
        _simulate_one(sf, args, dest)
    return EXIT_OK


def cmd_case_study(args) -> int:
    sf = case_study_file(dt=args.dt, frame=args.frame or "rotating")
    _simulate_one(sf, args, args.out or ".")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscgrid",
        description="Network-of-oscillators toolkit: certificates, power-flow "
        "set-points and closed-loop simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_file=True, many=False):
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--dt", type=float, default=None, help="integration step [s]")
        p.add_argument(
            "--frame", choices=("static", "rotating"), default=None,
            help="reference frame",
        )
        p.add_argument("--server", default=None, help="base URL of a running service")
        if needs_file:
            if many:
                p.add_argument("file", nargs="+", help="scenario JSON file(s)")
            else:
                p.add_argument("file", help="scenario JSON file")

    p = sub.add_parser("check", help="evaluate the stability condition")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="solve power-flow angles per dispatch")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="integrate a scenario, write CSV + plot script")
    common(p, many=True)
    p.add_argument("--sweep", action="store_true", help="run multiple files in parallel")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("case-study", help="run the built-in three-inverter scenario")
    common(p, needs_file=False)
    p.set_defaults(func=cmd_case_study)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleSetpointsError as exc:
        msg = f"error: {exc}"
        if exc.residual is not None:
            msg += f" (residual {exc.residual:.6g})"
        print(msg, file=sys.stderr)
        return EXIT_INFEASIBLE
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
