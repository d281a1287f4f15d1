"""Deterministic fixed-step simulation with timed set-point events."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import lyapunov_V, projector_P
from .controller import (
    CHART_GUARD,
    FieldContext,
    GainSet,
    PolarState,
    closed_loop_field,
    droop_field,
    instantaneous_frequency,
    make_context,
    phi_all,
    projected_field,
    rotating_frame_field,
)
from .errors import DivergenceError, InfeasibleSetpointsError, InputError
from .network import Bases, LineParams, NetworkSpec, nodal_powers
from .planar import node_norms
from .setpoints import SetpointBundle, solve_angles

FRAMES = ("static", "rotating")
FIELDS = ("cartesian", "projected", "polar_droop")

# Events and segment ends snap to the step grid within this tolerance.
TIME_SNAP = 1e-9


@dataclass(frozen=True)
class Event:
    """Set-point dispatch at a given time; updates maps node -> (p, q, v)."""

    time: float
    updates: dict

    def __post_init__(self):
        if self.time < 0:
            raise InputError("event time must be non-negative")
        for node, pqv in self.updates.items():
            if len(pqv) != 3:
                raise InputError(f"event entry for node {node} must be (p, q, v)")
            if pqv[2] <= 0:
                raise InputError(f"event entry for node {node} has v <= 0")


@dataclass(frozen=True)
class Scenario:
    """Complete description of one simulation run."""

    net: NetworkSpec
    gains: GainSet
    initial_state: np.ndarray
    events: tuple  # Event instances, sorted by time, first at t = 0
    t_end: float
    dt: float
    frame: str = "static"
    field: str = "cartesian"
    record_every: int = 1

    def __post_init__(self):
        state = np.asarray(self.initial_state, dtype=float)
        if state.shape != (2 * self.net.n_nodes,):
            raise InputError("initial state must have 2 entries per node")
        if not np.all(np.isfinite(state)):
            raise InputError("initial state must be finite")
        object.__setattr__(self, "initial_state", state)
        events = tuple(self.events)
        if not events or abs(events[0].time) > TIME_SNAP:
            raise InputError("first event must be at t = 0")
        times = [e.time for e in events]
        if times != sorted(times) or len(set(times)) != len(times):
            raise InputError("events must be sorted by time and distinct")
        if set(events[0].updates) != set(range(1, self.net.n_nodes + 1)):
            raise InputError("the t = 0 event must dispatch every node")
        object.__setattr__(self, "events", events)
        if self.dt <= 0:
            raise InputError("dt must be positive")
        if self.t_end <= 0 or self.t_end < events[-1].time:
            raise InputError("t_end must be positive and after the last event")
        if self.frame not in FRAMES:
            raise InputError(f"unknown frame {self.frame!r}")
        if self.field not in FIELDS:
            raise InputError(f"unknown field {self.field!r}")
        if self.record_every < 1:
            raise InputError("record_every must be >= 1")
        if self.field == "cartesian" and self.frame == "static":
            if self.dt > 1e-3 * (2 * math.pi / self.net.omega0) + TIME_SNAP:
                raise InputError(
                    "dt too large to resolve the carrier in the static frame"
                )
        if self.field == "polar_droop" and not self.net.is_pure_inductive():
            raise InputError("polar_droop requires a pure-inductive network")


@dataclass
class Trajectory:
    """Recorded time series of one run; all arrays share the sample axis."""

    times: np.ndarray
    states: np.ndarray  # (S, 2N), in the scenario's frame
    mags: np.ndarray  # (S, N)
    freq_hz: np.ndarray  # (S, N)
    p: np.ndarray  # (S, N)
    q: np.ndarray  # (S, N)
    V: np.ndarray  # (S,)
    dist_S: np.ndarray  # (S,)
    W: np.ndarray  # (S, N)
    frame: str
    contexts: tuple = ()  # FieldContext per event segment
    segment_angles: tuple = ()  # solved relative angles per segment (or None)


def _rk4_step(f, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _segment_field(scenario: Scenario, ctx: FieldContext):
    """Right-hand side and state codec for the configured field variant."""
    if scenario.field == "cartesian":
        if scenario.frame == "rotating":
            return lambda y: rotating_frame_field(y, ctx)
        return lambda y: closed_loop_field(y, ctx)
    if scenario.field == "projected":
        if scenario.frame != "static":
            raise InputError("projected field is defined in the static frame")
        return lambda y: projected_field(y, ctx)
    # polar droop: state is (nu_1..nu_N, theta_1..theta_N)
    omega_shift = ctx.gains.omega0 if scenario.frame == "rotating" else 0.0

    def rhs(y):
        n = len(y) // 2
        nu_dot, theta_dot = droop_field(PolarState(y[:n], y[n:]), ctx)
        return np.concatenate([nu_dot, theta_dot - omega_shift])

    return rhs


def _to_cartesian(scenario: Scenario, y: np.ndarray) -> np.ndarray:
    if scenario.field == "polar_droop":
        n = len(y) // 2
        return PolarState(y[:n], y[n:]).to_state()
    return y


def _encode_initial(scenario: Scenario) -> np.ndarray:
    if scenario.field == "polar_droop":
        ps = PolarState.from_state(scenario.initial_state)
        return np.concatenate([ps.nu, ps.theta])
    return scenario.initial_state.copy()


def integrate(scenario: Scenario) -> Trajectory:
    """Fixed-step Runge-Kutta integration of the configured field.

    Events are applied exactly at their timestamps (the step preceding an
    event is shortened to land on it), the state is continuous across
    events, and identical inputs produce bit-identical outputs.
    """
    net, gains = scenario.net, scenario.gains
    n = net.n_nodes
    boundaries = [e.time for e in scenario.events] + [scenario.t_end]

    # per-segment contexts and diagnostic projectors
    contexts, angles_per_seg, projectors = [], [], []
    current = {}
    last_theta = None
    for ev in scenario.events:
        current.update(ev.updates)
        p = np.array([current[k][0] for k in range(1, n + 1)])
        q = np.array([current[k][1] for k in range(1, n + 1)])
        v = np.array([current[k][2] for k in range(1, n + 1)])
        sp = SetpointBundle(p, q, v)
        contexts.append(make_context(net, gains, sp))
        try:
            theta = solve_angles(net, p, q, v)
        except InfeasibleSetpointsError:
            # infeasible dispatch: keep monitoring against the last
            # consistent target plane
            theta = last_theta
        if theta is None:
            raise InfeasibleSetpointsError("initial dispatch is infeasible")
        last_theta = theta
        angles_per_seg.append(theta)
        projectors.append(projector_P(v, theta))

    y = _encode_initial(scenario)
    times, states, freqs = [], [], []

    def record(t, y, rhs, seg):
        v = _to_cartesian(scenario, y)
        times.append(t)
        states.append(v)
        dydt = rhs(y)
        if scenario.field == "polar_droop":
            omega = dydt[n:].copy()
        else:
            omega = instantaneous_frequency(v, dydt)
        if scenario.frame == "rotating":
            omega = omega + gains.omega0
        freqs.append((omega, seg))

    t = 0.0
    step_count = 0
    last_finite = 0.0
    for seg, ctx in enumerate(contexts):
        rhs = _segment_field(scenario, ctx)
        t0, t1 = boundaries[seg], boundaries[seg + 1]
        if seg == 0:
            record(t0, y, rhs, seg)
        # whole steps of dt; the final step is shortened to land on t1
        n_full = int(math.floor((t1 - t0) / scenario.dt + TIME_SNAP))
        step_times = [t0 + (i + 1) * scenario.dt for i in range(n_full)]
        if not step_times or t1 - step_times[-1] > TIME_SNAP:
            step_times.append(t1)
        else:
            step_times[-1] = t1
        n_steps = len(step_times)
        for i, t_next in enumerate(step_times):
            h = t_next - t
            # a blowing-up state is reported as DivergenceError below,
            # not as floating-point warnings
            with np.errstate(over="ignore", invalid="ignore"):
                y = _rk4_step(rhs, y, h)
            t = t_next
            if not np.all(np.isfinite(y)):
                raise DivergenceError(
                    f"state diverged at t = {t:.6g} s", last_finite_time=last_finite
                )
            last_finite = t
            step_count += 1
            at_boundary = i == n_steps - 1
            if step_count % scenario.record_every == 0 or at_boundary:
                record(t, y, rhs, seg)

    times = np.array(times)
    states = np.array(states)
    S = len(times)
    mags = np.array([node_norms(v) for v in states])
    freq_hz = np.array([om / (2.0 * math.pi) for om, _ in freqs])
    pq = [nodal_powers(states[i], contexts[freqs[i][1]].Y) for i in range(S)]
    p_arr = np.array([pq_i[0] for pq_i in pq])
    q_arr = np.array([pq_i[1] for pq_i in pq])
    V = np.empty(S)
    W = np.empty((S, n))
    for i in range(S):
        seg = freqs[i][1]
        V[i] = lyapunov_V(states[i], projectors[seg])
        W[i] = phi_all(states[i], contexts[seg].setpoints.v_star) ** 2
    return Trajectory(
        times=times,
        states=states,
        mags=mags,
        freq_hz=freq_hz,
        p=p_arr,
        q=q_arr,
        V=V,
        dist_S=np.sqrt(np.maximum(V, 0.0)),
        W=W,
        frame=scenario.frame,
        contexts=tuple(contexts),
        segment_angles=tuple(angles_per_seg),
    )


def case_study(dt: Optional[float] = None, frame: str = "rotating") -> Scenario:
    """Canned three-inverter black-start scenario.

    Three nodes on a triangle of 125 km / 125 km / 25 km lines
    (0.03 ohm/km, 0.3 ohm/km) with 1 GW / 320 kV / 50 Hz bases; black
    start from v_k(0) = 1e-3 (1, 1); zero-power dispatch at t = 0, the
    first-column dispatch at t = 5 s and the (infeasible) active-power
    step of node 3 at t = 10 s.
    """
    bases = Bases(power_va=1e9, voltage_v=320e3, frequency_hz=50.0)
    z_base = bases.impedance_ohm
    omega0 = bases.omega0

    def line(km):
        r = km * 0.03 / z_base
        x = km * 0.3 / z_base
        return LineParams(r=r, ell=x / omega0)

    net = NetworkSpec(
        n_nodes=3,
        topology=((1, 2), (1, 3), (2, 3)),
        lines=(line(125.0), line(125.0), line(25.0)),
        omega0=omega0,
        bases=bases,
    )
    gains = GainSet(eta=0.0015, alpha=0.01, omega0=omega0)
    v0 = np.tile([1e-3, 1e-3], 3)
    events = (
        Event(0.0, {1: (0.0, 0.0, 1.0), 2: (0.0, 0.0, 1.0), 3: (0.0, 0.0, 1.0)}),
        Event(
            5.0,
            {
                1: (0.1458, 0.0432, 1.01),
                2: (0.7066, -0.0793, 1.0),
                3: (-0.8509, 0.0803, 1.0),
            },
        ),
        Event(10.0, {3: (-0.3509, 0.0803, 1.0)}),
    )
    if frame not in FRAMES:
        raise InputError(f"unknown frame {frame!r}")
    if dt is None:
        dt = 1e-3 if frame == "rotating" else 1e-5
    return Scenario(
        net=net,
        gains=gains,
        initial_state=v0,
        events=events,
        t_end=15.0,
        dt=dt,
        frame=frame,
        field="cartesian",
        record_every=1,
    )
