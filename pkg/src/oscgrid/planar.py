"""Small helpers for the two-dimensional (alpha-beta) plane."""

import numpy as np

# 90-degree rotation; plays the role of the imaginary unit in alpha-beta
# coordinates.
J2 = np.array([[0.0, -1.0], [1.0, 0.0]])

I2 = np.eye(2)


def rot(theta: float) -> np.ndarray:
    """2x2 counter-clockwise rotation matrix."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def block_rot(theta: float, n: int) -> np.ndarray:
    """Block-diagonal rotation I_n kron R(theta)."""
    return np.kron(np.eye(n), rot(theta))


def stack_rotate(v: np.ndarray, theta: float) -> np.ndarray:
    """Rotate every 2-vector of a stacked 2N state by the same angle."""
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty_like(v)
    out[0::2] = c * v[0::2] - s * v[1::2]
    out[1::2] = s * v[0::2] + c * v[1::2]
    return out


def node_norms(v: np.ndarray) -> np.ndarray:
    """Per-node Euclidean norms of a stacked 2N state."""
    return np.hypot(v[0::2], v[1::2])
