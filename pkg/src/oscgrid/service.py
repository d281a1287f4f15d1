"""FastAPI service exposing the check / solve / simulate operations.

The handlers are plain functions over schema objects so the CLI can call
them in-process; the HTTP layer is a thin wrapper.
"""

import math
from typing import Optional

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from . import sim
from .analysis import check_condition1
from .errors import DivergenceError, InfeasibleSetpointsError, InputError
from .output import fig5_script, trajectory_csv
from .schemas import (
    CheckResponse,
    ConditionReport,
    ScenarioFile,
    SimulateResponse,
    SolveReport,
    SolveResponse,
    scenario_to_file,
)
from .setpoints import (
    FEASIBILITY_TOL,
    SetpointBundle,
    feasibility_residual,
    power_from_angles,
    solve_angles,
)


def _event_bundles(sf: ScenarioFile, net):
    """Accumulated (time, p, q, v) per event."""
    n = net.n_nodes
    current = {}
    out = []
    for ev in sf.to_events():
        current.update(ev.updates)
        if set(current) != set(range(1, n + 1)):
            raise InputError("the t = 0 event must dispatch every node")
        p = np.array([current[k][0] for k in range(1, n + 1)])
        q = np.array([current[k][1] for k in range(1, n + 1)])
        v = np.array([current[k][2] for k in range(1, n + 1)])
        out.append((ev.time, p, q, v))
    return out


def run_check(sf: ScenarioFile) -> CheckResponse:
    """Evaluate the stability condition at every dispatch event."""
    net = sf.to_network()
    gains = sf.to_gains(net)
    graph = net.graph()
    reports = []
    for time, p, q, v in _event_bundles(sf, net):
        theta = solve_angles(net, p, q, v)
        rep = check_condition1(
            graph,
            v,
            theta,
            gains.eta,
            gains.alpha,
            eta_eff=gains.eta_eff,
            alpha_eff=gains.alpha_eff,
            net=net,
        )
        reports.append(
            ConditionReport(
                event_time=time,
                lhs=rep.lhs,
                rhs=rep.rhs,
                satisfied=rep.satisfied,
                decay_rate=rep.decay_rate,
                angle_range_ok=rep.angle_range_ok,
                lhs_abs_angles=rep.lhs_abs_angles,
                satisfied_abs_angles=rep.satisfied_abs_angles,
                reason=rep.reason,
            )
        )
    return CheckResponse(
        reports=reports, all_satisfied=all(r.satisfied for r in reports)
    )


def run_solve(sf: ScenarioFile) -> SolveResponse:
    """Solve the power-flow angles of every dispatch event."""
    net = sf.to_network()
    reports = []
    for time, p, q, v in _event_bundles(sf, net):
        try:
            theta = solve_angles(net, p, q, v)
        except InfeasibleSetpointsError as exc:
            reports.append(
                SolveReport(
                    event_time=time,
                    theta_deg=[],
                    residual=float(exc.residual if exc.residual is not None else math.nan),
                    feasible=False,
                )
            )
            continue
        bundle = SetpointBundle(p, q, v, theta_star=theta)
        residual = feasibility_residual(net, bundle)
        reports.append(
            SolveReport(
                event_time=time,
                theta_deg=[math.degrees(t) for t in theta],
                residual=residual,
                feasible=residual < FEASIBILITY_TOL,
            )
        )
    return SolveResponse(
        reports=reports, all_feasible=all(r.feasible for r in reports)
    )


def run_simulate(sf: ScenarioFile) -> SimulateResponse:
    """Integrate a scenario and package the recorded trajectory."""
    scenario = sf.to_scenario()
    traj = sim.integrate(scenario)
    return SimulateResponse(
        n_samples=len(traj.times),
        t_end=float(traj.times[-1]),
        final_mags=[float(x) for x in traj.mags[-1]],
        final_freq_hz=[float(x) for x in traj.freq_hz[-1]],
        final_p=[float(x) for x in traj.p[-1]],
        final_q=[float(x) for x in traj.q[-1]],
        csv=trajectory_csv(traj),
        gnuplot=fig5_script(scenario.net.n_nodes),
    )


def case_study_file(dt: Optional[float] = None, frame: str = "rotating") -> ScenarioFile:
    """The built-in three-inverter scenario in file-schema form."""
    return scenario_to_file(sim.case_study(dt=dt, frame=frame))


app = FastAPI(title="oscgrid", version="1.0.0")


@app.exception_handler(InputError)
async def _input_error(request: Request, exc: InputError):
    return JSONResponse(status_code=400, content={"error": str(exc), "kind": "input"})


@app.exception_handler(InfeasibleSetpointsError)
async def _infeasible(request: Request, exc: InfeasibleSetpointsError):
    return JSONResponse(
        status_code=409,
        content={"error": str(exc), "kind": "infeasible", "residual": exc.residual},
    )


@app.exception_handler(DivergenceError)
async def _divergence(request: Request, exc: DivergenceError):
    return JSONResponse(
        status_code=422,
        content={
            "error": str(exc),
            "kind": "divergence",
            "last_finite_time": exc.last_finite_time,
        },
    )


@app.post("/check", response_model=CheckResponse)
def check_endpoint(sf: ScenarioFile) -> CheckResponse:
    return run_check(sf)


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(sf: ScenarioFile) -> SolveResponse:
    return run_solve(sf)


@app.post("/simulate", response_model=SimulateResponse)
def simulate_endpoint(sf: ScenarioFile) -> SimulateResponse:
    return run_simulate(sf)


@app.get("/case-study", response_model=SimulateResponse)
def case_study_endpoint(
    dt: Optional[float] = Query(default=None, gt=0),
    frame: str = Query(default="rotating", pattern="^(static|rotating)$"),
) -> SimulateResponse:
    return run_simulate(case_study_file(dt=dt, frame=frame))
