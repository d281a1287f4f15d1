"""Shared fixtures and random-instance generators for the test suite."""

import numpy as np
import pytest

from oscgrid import GainSet, LineParams, NetworkSpec, SetpointBundle, power_from_angles
from oscgrid.sim import case_study, integrate


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


def random_topology(rng, n):
    """Random connected simple topology: spanning tree plus a few chords."""
    edges = set()
    order = rng.permutation(np.arange(1, n + 1))
    for i in range(1, n):
        a = int(order[i])
        b = int(order[rng.integers(0, i)])
        edges.add((min(a, b), max(a, b)))
    n_extra = int(rng.integers(0, n))
    for _ in range(n_extra):
        a, b = rng.choice(np.arange(1, n + 1), size=2, replace=False)
        edges.add((min(int(a), int(b)), max(int(a), int(b))))
    return tuple(sorted(edges))


def random_network(rng, n=None, pure_inductive=False, omega0=1.0):
    """Random connected network with a uniform ell/r ratio."""
    if n is None:
        n = int(rng.integers(2, 7))
    topology = random_topology(rng, n)
    if pure_inductive:
        lines = tuple(
            LineParams(r=0.0, ell=float(rng.uniform(0.2, 1.0))) for _ in topology
        )
    else:
        rho = float(rng.uniform(0.5, 10.0))
        lines = tuple(
            LineParams(r=(r := float(rng.uniform(0.05, 0.8))), ell=rho * r)
            for _ in topology
        )
    return NetworkSpec(n_nodes=n, topology=topology, lines=lines, omega0=omega0)


def random_bundle(rng, net, theta_low=-np.pi / 6, theta_high=np.pi / 6, v_low=0.9, v_high=1.1):
    """Feasible set-point bundle generated from random angles and magnitudes."""
    n = net.n_nodes
    theta = rng.uniform(theta_low, theta_high, size=n - 1)
    v_star = rng.uniform(v_low, v_high, size=n)
    p, q = power_from_angles(net, v_star, theta)
    return SetpointBundle(p, q, v_star, theta_star=theta)


def small_gains(rng=None, omega0=1.0):
    """Gains with eta >= alpha, in the regime where the certificate applies."""
    return GainSet(eta=0.1, alpha=0.05, omega0=omega0)


@pytest.fixture
def case_scenario():
    return case_study()


@pytest.fixture(scope="session")
def case_trajectory():
    return integrate(case_study())
