"""Scenario file schema: validation, unit conversion, round trips."""

import json

import numpy as np
import pydantic
import pytest

from oscgrid.schemas import Quantity, ScenarioFile, scenario_to_file
from oscgrid.sim import case_study


def minimal_doc():
    return {
        "network": {
            "n_nodes": 2,
            "lines": [
                {
                    "nodes": [1, 2],
                    "r": {"value": 0.1, "unit": "pu"},
                    "ell": {"value": 0.5, "unit": "pu"},
                }
            ],
        },
        "gains": {"eta": 0.1, "alpha": 0.01},
        "events": [
            {
                "time": 0.0,
                "setpoints": [
                    {
                        "node": 1,
                        "p": {"value": 0.0},
                        "q": {"value": 0.0},
                        "v": {"value": 1.0},
                    },
                    {
                        "node": 2,
                        "p": {"value": 0.0},
                        "q": {"value": 0.0},
                        "v": {"value": 1.0},
                    },
                ],
            }
        ],
        "initial_state": [1.0, 0.0, 1.0, 0.0],
        "t_end": 1.0,
        "dt": 0.001,
        "frame": "rotating",
    }


def test_minimal_document_parses():
    sf = ScenarioFile.model_validate(minimal_doc())
    sc = sf.to_scenario()
    assert sc.net.n_nodes == 2
    assert sc.gains.eta == 0.1


def test_unknown_keys_rejected():
    doc = minimal_doc()
    doc["surprise"] = 1
    with pytest.raises(pydantic.ValidationError):
        ScenarioFile.model_validate(doc)
    doc = minimal_doc()
    doc["network"]["lines"][0]["length_km"] = 125
    with pytest.raises(pydantic.ValidationError):
        ScenarioFile.model_validate(doc)


def test_unknown_unit_rejected():
    doc = minimal_doc()
    doc["network"]["lines"][0]["r"]["unit"] = "ohm"
    with pytest.raises(pydantic.ValidationError):
        ScenarioFile.model_validate(doc)


def test_events_must_start_at_zero():
    doc = minimal_doc()
    doc["events"][0]["time"] = 1.0
    with pytest.raises(pydantic.ValidationError):
        ScenarioFile.model_validate(doc)


def test_si_units_converted():
    doc = minimal_doc()
    doc["network"]["bases"] = {
        "power_va": 1e9,
        "voltage_v": 320e3,
        "frequency_hz": 50.0,
    }
    doc["network"]["omega0"] = {"value": 2 * np.pi * 50.0, "unit": "si"}
    z_base = 320e3**2 / 1e9
    doc["network"]["lines"][0]["r"] = {"value": 0.1 * z_base, "unit": "si"}
    doc["network"]["lines"][0]["ell"] = {
        "value": 0.5 * z_base / (2 * np.pi * 50.0),
        "unit": "si",
    }
    doc["events"][0]["setpoints"][0]["p"] = {"value": 0.2e9, "unit": "si"}
    doc["dt"] = 1e-3
    sf = ScenarioFile.model_validate(doc)
    net = sf.to_network()
    assert net.lines[0].r == pytest.approx(0.1)
    assert net.omega0 * net.lines[0].ell == pytest.approx(0.5)
    ev = sf.to_events()[0]
    assert ev.updates[1][0] == pytest.approx(0.2)


def test_round_trip_parse_serialize_parse():
    sf1 = ScenarioFile.model_validate(minimal_doc())
    text = sf1.model_dump_json()
    sf2 = ScenarioFile.model_validate(json.loads(text))
    assert sf1 == sf2


def test_case_study_round_trip():
    sc = case_study()
    sf = scenario_to_file(sc)
    sc2 = sf.to_scenario()
    assert sc2.net.n_nodes == sc.net.n_nodes
    assert np.allclose(
        [ln.r for ln in sc2.net.lines], [ln.r for ln in sc.net.lines]
    )
    assert sc2.gains == sc.gains
    assert np.allclose(sc2.initial_state, sc.initial_state)
    assert [e.time for e in sc2.events] == [e.time for e in sc.events]
    for e1, e2 in zip(sc.events, sc2.events):
        for node in e1.updates:
            assert np.allclose(e1.updates[node], e2.updates[node])
    assert (sc2.t_end, sc2.dt, sc2.frame, sc2.field) == (
        sc.t_end,
        sc.dt,
        sc.frame,
        sc.field,
    )


def test_simulation_fields_optional_for_checks():
    doc = minimal_doc()
    del doc["initial_state"]
    del doc["t_end"]
    del doc["dt"]
    sf = ScenarioFile.model_validate(doc)
    from oscgrid import InputError

    with pytest.raises(InputError):
        sf.to_scenario()


def test_quantity_defaults_to_pu():
    assert Quantity(value=1.5).unit == "pu"
