"""Power-network physics in the stationary alpha-beta frame.

Everything here works in per-unit; the base quantities are only used by
the unit-conversion helpers at the I/O boundary.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolationError, DegenerateLineError, InputError
from .graph import Graph, build_laplacian, extend
from .planar import J2, block_rot, rot

# Relative tolerance for the uniform ell/r ratio check and for the
# graph-side cross-check of the network Laplacian.
RATIO_RTOL = 1e-9

CLARKE = (2.0 / 3.0) * np.array(
    [
        [1.0, -0.5, -0.5],
        [0.0, math.sqrt(3.0) / 2.0, -math.sqrt(3.0) / 2.0],
        [0.5, 0.5, 0.5],
    ]
)
CLARKE_INV = np.linalg.inv(CLARKE)


@dataclass(frozen=True)
class LineParams:
    """Per-unit series resistance and inductance of one line.

    The reactance at nominal frequency is omega0 * ell.
    """

    r: float
    ell: float

    def __post_init__(self):
        if self.r < 0 or self.ell < 0:
            raise InputError(f"negative line parameters r={self.r}, ell={self.ell}")
        if self.r == 0 and self.ell == 0:
            raise DegenerateLineError("degenerate line: r = ell = 0")


@dataclass(frozen=True)
class Bases:
    """Base quantities for converting between SI and per-unit."""

    power_va: float = 1.0
    voltage_v: float = 1.0
    frequency_hz: float = 1.0

    @property
    def impedance_ohm(self) -> float:
        return self.voltage_v**2 / self.power_va

    @property
    def omega0(self) -> float:
        return 2.0 * math.pi * self.frequency_hz

    @property
    def inductance_h(self) -> float:
        return self.impedance_ohm / self.omega0

    @property
    def current_a(self) -> float:
        return self.power_va / self.voltage_v


@dataclass(frozen=True)
class NetworkSpec:
    """Connected network of inverters joined by resistive-inductive lines."""

    n_nodes: int
    topology: tuple  # tuple of (j, k) node pairs, 1-based
    lines: tuple  # tuple of LineParams, aligned with topology
    omega0: float  # nominal angular frequency, rad/s (1.0 for p.u. time)
    bases: Bases = field(default_factory=Bases)

    def __post_init__(self):
        if len(self.topology) != len(self.lines):
            raise InputError("topology and lines must have the same length")
        if self.omega0 <= 0:
            raise InputError("omega0 must be positive")
        object.__setattr__(self, "topology", tuple((int(j), int(k)) for j, k in self.topology))
        object.__setattr__(self, "lines", tuple(self.lines))
        # Connectivity and simplicity are enforced by the Graph invariants.
        self.graph()

    def graph(self) -> Graph:
        """Weighted graph with admittance-magnitude weights (Eq. of w_jk)."""
        edges = [
            (j, k, line_weight(line, self.omega0))
            for (j, k), line in zip(self.topology, self.lines)
        ]
        return Graph(self.n_nodes, tuple(edges))

    def edge_kappas(self) -> np.ndarray:
        """Per-line angle atan(omega0 * ell / r), in [0, pi/2]."""
        return np.array([math.atan2(self.omega0 * ln.ell, ln.r) for ln in self.lines])

    def uniform_ratio(self) -> float:
        """The common ell/r ratio rho; math.inf for pure-inductive networks.

        Raises AssumptionViolationError when the ratio is not uniform.
        """
        ratios = []
        for ln in self.lines:
            ratios.append(math.inf if ln.r == 0 else ln.ell / ln.r)
        ref = ratios[0]
        bad = []
        for (j, k), rho in zip(self.topology, ratios):
            if ref == math.inf or rho == math.inf:
                if rho != ref:
                    bad.append((j, k))
            elif abs(rho - ref) > RATIO_RTOL * max(abs(ref), abs(rho)):
                bad.append((j, k))
        if bad:
            raise AssumptionViolationError(
                f"non-uniform ell/r ratio on edges {bad}", offending_edges=bad
            )
        return ref

    def kappa(self) -> float:
        """Network angle atan(rho * omega0) under the uniform-ratio assumption."""
        return kappa(self.uniform_ratio(), self.omega0)

    def is_pure_inductive(self) -> bool:
        return all(ln.r == 0 for ln in self.lines)


def line_weight(line: LineParams, omega0: float) -> float:
    """Admittance-magnitude edge weight 1/sqrt(r^2 + (omega0*ell)^2)."""
    mag = math.hypot(line.r, omega0 * line.ell)
    if mag == 0:
        raise DegenerateLineError("degenerate line: r = ell = 0")
    return 1.0 / mag


def kappa(rho: float, omega0: float) -> float:
    """Impedance angle atan(rho * omega0) in [0, pi/2]; rho may be inf."""
    if rho < 0:
        raise InputError(f"negative ell/r ratio {rho}")
    if math.isinf(rho):
        return math.pi / 2.0
    return math.atan(rho * omega0)


def admittance_matrix(net: NetworkSpec) -> np.ndarray:
    """Real-embedded nodal admittance matrix, 2N x 2N.

    Each line contributes the 2x2 inverse of (r I2 + omega0*ell J), i.e.
    w^2 (r I2 - omega0*ell J), in the usual nodal pattern.
    """
    n = net.n_nodes
    Y = np.zeros((2 * n, 2 * n))
    for (j, k), line in zip(net.topology, net.lines):
        x = net.omega0 * line.ell
        w2 = line_weight(line, net.omega0) ** 2
        y_block = w2 * (line.r * np.eye(2) - x * J2)
        a, b = j - 1, k - 1
        Y[2 * a : 2 * a + 2, 2 * a : 2 * a + 2] += y_block
        Y[2 * b : 2 * b + 2, 2 * b : 2 * b + 2] += y_block
        Y[2 * a : 2 * a + 2, 2 * b : 2 * b + 2] -= y_block
        Y[2 * b : 2 * b + 2, 2 * a : 2 * a + 2] -= y_block
    return Y


def network_laplacian(net: NetworkSpec):
    """Extended Laplacian R(kappa) Y together with the weighted graph.

    Only defined for uniform-ratio networks; cross-checked against the
    graph-side construction kron(L, I2).
    """
    kap = net.kappa()  # raises if the ratio is not uniform
    Y = admittance_matrix(net)
    L_ext = block_rot(kap, net.n_nodes) @ Y
    g = net.graph()
    ref = extend(build_laplacian(g))
    scale = max(np.abs(ref).max(), 1.0)
    err = np.abs(L_ext - ref).max()
    if err > RATIO_RTOL * scale:
        raise AssertionError(
            f"network Laplacian mismatch vs graph construction: {err:.3e}"
        )
    return L_ext, g


def local_output(i_o_k: np.ndarray, kap: float) -> np.ndarray:
    """Rotate a local current measurement into the relative output y_k."""
    return rot(kap) @ np.asarray(i_o_k, dtype=float)


def instantaneous_power(v_k: np.ndarray, i_k: np.ndarray):
    """Instantaneous active and reactive power (p, q) at one node."""
    v_k = np.asarray(v_k, dtype=float)
    i_k = np.asarray(i_k, dtype=float)
    p = float(v_k @ i_k)
    q = float(v_k @ (J2 @ i_k))
    return p, q


def nodal_powers(v: np.ndarray, Y: np.ndarray):
    """Vectorized (p, q) for all nodes of a stacked state, with i_o = Y v."""
    io = Y @ v
    p = v[0::2] * io[0::2] + v[1::2] * io[1::2]
    q = -v[0::2] * io[1::2] + v[1::2] * io[0::2]
    return p, q


def clarke(v_abc: np.ndarray) -> np.ndarray:
    """Amplitude-preserving Clarke transform of a three-phase sample."""
    return CLARKE @ np.asarray(v_abc, dtype=float)


def inverse_clarke(v_abg: np.ndarray) -> np.ndarray:
    """Inverse of the amplitude-preserving Clarke transform."""
    return CLARKE_INV @ np.asarray(v_abg, dtype=float)
