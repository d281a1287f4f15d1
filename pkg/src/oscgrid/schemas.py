"""Pydantic schemas for scenario files and service payloads.

All physical quantities in files are unit-tagged: "pu" values are used
as-is, "si" values are converted through the file's base quantities.
Unknown keys are rejected everywhere.
"""

import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import sim
from .controller import GainSet
from .errors import InputError
from .network import Bases, LineParams, NetworkSpec


class Quantity(BaseModel):
    """A number tagged with its unit system."""

    model_config = ConfigDict(extra="forbid")

    value: float
    unit: Literal["pu", "si"] = "pu"


class BasesModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    power_va: float = 1.0
    voltage_v: float = 1.0
    frequency_hz: float = 1.0

    def to_bases(self) -> Bases:
        return Bases(self.power_va, self.voltage_v, self.frequency_hz)


class LineModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    nodes: Tuple[int, int]
    r: Quantity
    ell: Quantity

    def to_params(self, bases: Bases) -> LineParams:
        r = self.r.value if self.r.unit == "pu" else self.r.value / bases.impedance_ohm
        # internal ell is reactance-per-rad/s: x_pu = omega0 * ell, so a
        # henry value converts through the impedance base alone
        ell = (
            self.ell.value
            if self.ell.unit == "pu"
            else self.ell.value / bases.impedance_ohm
        )
        return LineParams(r=r, ell=ell)


class NetworkModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_nodes: int = Field(ge=1)
    lines: List[LineModel]
    omega0: Quantity = Quantity(value=1.0, unit="pu")
    bases: BasesModel = BasesModel()

    def to_spec(self) -> NetworkSpec:
        bases = self.to_bases()
        omega0 = (
            self.omega0.value * bases.omega0
            if self.omega0.unit == "pu"
            else self.omega0.value
        )
        return NetworkSpec(
            n_nodes=self.n_nodes,
            topology=tuple(ln.nodes for ln in self.lines),
            lines=tuple(ln.to_params(bases) for ln in self.lines),
            omega0=omega0,
            bases=bases,
        )

    def to_bases(self) -> Bases:
        return self.bases.to_bases()


class GainsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    eta: float = Field(ge=0)
    alpha: float = Field(ge=0)


class SetpointEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    node: int = Field(ge=1)
    p: Quantity
    q: Quantity
    v: Quantity

    def to_pu(self, bases: Bases):
        p = self.p.value if self.p.unit == "pu" else self.p.value / bases.power_va
        q = self.q.value if self.q.unit == "pu" else self.q.value / bases.power_va
        v = self.v.value if self.v.unit == "pu" else self.v.value / bases.voltage_v
        return p, q, v


class EventModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    time: float = Field(ge=0)
    setpoints: List[SetpointEntry] = Field(min_length=1)

    def to_event(self, bases: Bases) -> sim.Event:
        return sim.Event(
            self.time, {e.node: e.to_pu(bases) for e in self.setpoints}
        )


class ScenarioFile(BaseModel):
    """On-disk scenario description.

    The simulation-only fields (initial_state, t_end, dt) may be omitted
    in files that are only checked or solved.
    """

    model_config = ConfigDict(extra="forbid")

    network: NetworkModel
    gains: GainsModel
    events: List[EventModel] = Field(min_length=1)
    initial_state: Optional[List[float]] = None
    t_end: Optional[float] = None
    dt: Optional[float] = None
    frame: Literal["static", "rotating"] = "static"
    field: Literal["cartesian", "projected", "polar_droop"] = "cartesian"
    record_every: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _events_sorted(self):
        times = [e.time for e in self.events]
        if times != sorted(times) or len(set(times)) != len(times):
            raise ValueError("events must be sorted by time and distinct")
        if times[0] != 0.0:
            raise ValueError("first event must be at time 0")
        return self

    def to_network(self) -> NetworkSpec:
        return self.network.to_spec()

    def to_gains(self, net: NetworkSpec) -> GainSet:
        return GainSet(eta=self.gains.eta, alpha=self.gains.alpha, omega0=net.omega0)

    def to_events(self) -> tuple:
        bases = self.network.to_bases()
        return tuple(e.to_event(bases) for e in self.events)

    def to_scenario(self) -> sim.Scenario:
        if self.initial_state is None or self.t_end is None or self.dt is None:
            raise InputError(
                "simulation needs initial_state, t_end and dt in the scenario file"
            )
        net = self.to_network()
        return sim.Scenario(
            net=net,
            gains=self.to_gains(net),
            initial_state=np.asarray(self.initial_state, dtype=float),
            events=self.to_events(),
            t_end=self.t_end,
            dt=self.dt,
            frame=self.frame,
            field=self.field,
            record_every=self.record_every,
        )


def scenario_to_file(scenario: sim.Scenario) -> ScenarioFile:
    """Serialize an in-memory scenario back to the file schema (pu units)."""
    net = scenario.net
    lines = [
        LineModel(
            nodes=edge,
            r=Quantity(value=ln.r, unit="pu"),
            ell=Quantity(value=ln.ell, unit="pu"),
        )
        for edge, ln in zip(net.topology, net.lines)
    ]
    omega0_pu = net.omega0 / net.bases.omega0
    return ScenarioFile(
        network=NetworkModel(
            n_nodes=net.n_nodes,
            lines=lines,
            omega0=Quantity(value=omega0_pu, unit="pu"),
            bases=BasesModel(
                power_va=net.bases.power_va,
                voltage_v=net.bases.voltage_v,
                frequency_hz=net.bases.frequency_hz,
            ),
        ),
        gains=GainsModel(eta=scenario.gains.eta, alpha=scenario.gains.alpha),
        events=[
            EventModel(
                time=ev.time,
                setpoints=[
                    SetpointEntry(
                        node=node,
                        p=Quantity(value=pqv[0], unit="pu"),
                        q=Quantity(value=pqv[1], unit="pu"),
                        v=Quantity(value=pqv[2], unit="pu"),
                    )
                    for node, pqv in sorted(ev.updates.items())
                ],
            )
            for ev in scenario.events
        ],
        initial_state=[float(x) for x in scenario.initial_state],
        t_end=scenario.t_end,
        dt=scenario.dt,
        frame=scenario.frame,
        field=scenario.field,
        record_every=scenario.record_every,
    )


# ---- service payloads ----------------------------------------------------


class ConditionReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    event_time: float
    lhs: float
    rhs: float
    satisfied: bool
    decay_rate: float
    angle_range_ok: bool
    lhs_abs_angles: float
    satisfied_abs_angles: bool
    reason: str = ""


class CheckResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    reports: List[ConditionReport]
    all_satisfied: bool


class SolveReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    event_time: float
    theta_deg: List[float]
    residual: float
    feasible: bool


class SolveResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    reports: List[SolveReport]
    all_feasible: bool


class SimulateResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_samples: int
    t_end: float
    final_mags: List[float]
    final_freq_hz: List[float]
    final_p: List[float]
    final_q: List[float]
    csv: str
    gnuplot: str
