"""Geometric kernel for a two-level ensemble on the unit Bloch sphere.

Conventions, fixed across the package:

* states are real 3-vectors on (or inside) the unit sphere, with the
  ground state |g> at (0, 0, +1) and the excited state |e> at (0, 0, -1);
* the excitation probability of a state is P_e = (1 - z) / 2;
* all rotations follow the right-hand rule.  Resonant pulses rotate about
  an axis in the equatorial plane, free evolution precesses about +z.

Note on radii: some texts draw the Bloch sphere with radius 1/2 (the spin
expectation value).  Lengths there are half of the lengths here; a circle
of diameter 0.5 in that convention has radius 0.5 on this unit sphere.

Every operation broadcasts over leading axes, so a stack of states with
shape (n, 3), or a single state paired with an (n,) stack of axis
azimuths, is processed in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError

#: Tolerance on the norm of a valid Bloch vector.
NORM_TOL = 1e-12

#: Tolerance on |z| accepted by :func:`excitation_probability`.
Z_TOL = 1e-9

TWO_PI = 2.0 * np.pi

GROUND = np.array([0.0, 0.0, 1.0])
EXCITED = np.array([0.0, 0.0, -1.0])
GROUND.setflags(write=False)
EXCITED.setflags(write=False)


def wrap_angle(angle):
    """Reduce an angle (or array of angles) to [0, 2*pi)."""
    a = np.mod(angle, TWO_PI)
    # np.mod can round tiny negatives up to 2*pi itself
    return np.where(a >= TWO_PI, 0.0, a) if np.ndim(a) else (0.0 if a >= TWO_PI else float(a))


def _as_state(state) -> np.ndarray:
    v = np.asarray(state, dtype=float)
    if v.shape[-1:] != (3,):
        raise ValueError(f"state must have shape (..., 3), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("state components must be finite")
    return v


def _as_angle(angle, name: str) -> np.ndarray:
    a = np.asarray(angle, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return a


def validate_state(state) -> np.ndarray:
    """Return ``state`` as a float array after checking it is a Bloch vector.

    Parameters
    ----------
    state : array_like, shape (..., 3)
        Candidate Bloch vector(s).

    Returns
    -------
    ndarray
        The validated array.

    Raises
    ------
    ValueError
        If the shape is wrong or a component is not finite.
    InvalidStateError
        If any vector norm exceeds 1 + NORM_TOL.
    """
    v = _as_state(state)
    norm = np.linalg.norm(v, axis=-1)
    if np.any(norm > 1.0 + NORM_TOL):
        raise InvalidStateError(f"state norm {float(np.max(norm))!r} exceeds 1")
    return v


def rotate_inplane(state, axis_azimuth, angle):
    """Rotate Bloch vectors about an equatorial axis.

    The axis is (cos(axis_azimuth), sin(axis_azimuth), 0); the rotation is
    by ``angle`` with the right-hand rule (Rodrigues formula).  A resonant
    pulse of area theta is exactly this operation.

    Parameters
    ----------
    state : array_like, shape (..., 3)
    axis_azimuth : float or array_like
        Azimuth of the rotation axis in the equatorial plane, radians.
    angle : float or array_like
        Rotation angle (pulse area), radians.  Any finite real; the
        trigonometric evaluation reduces it internally.

    Returns
    -------
    ndarray, shape broadcast(state, axis_azimuth, angle) x (3,)

    Raises
    ------
    ValueError
        On non-finite input or a state of the wrong shape.
    """
    v = _as_state(state)
    a = _as_angle(axis_azimuth, "axis_azimuth")
    th = _as_angle(angle, "angle")
    ax, ay = np.cos(a), np.sin(a)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    ct, st = np.cos(th), np.sin(th)
    along = ax * x + ay * y
    rise = 1.0 - ct
    rx = x * ct + ay * z * st + ax * along * rise
    ry = y * ct - ax * z * st + ay * along * rise
    rz = z * ct + (ax * y - ay * x) * st
    return np.stack(np.broadcast_arrays(rx, ry, rz), axis=-1)


def precess(state, phase):
    """Rotate Bloch vectors about +z by ``phase`` (right-hand rule).

    Free evolution for a time dt in a frame detuned by delta is
    ``precess(v, delta * dt)``.

    Parameters
    ----------
    state : array_like, shape (..., 3)
    phase : float or array_like
        Accumulated phase in radians, any finite real.

    Returns
    -------
    ndarray of the broadcast shape, trailing axis 3.
    """
    v = _as_state(state)
    b = _as_angle(phase, "phase")
    cb, sb = np.cos(b), np.sin(b)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    rx = x * cb - y * sb
    ry = x * sb + y * cb
    return np.stack(np.broadcast_arrays(rx, ry, z), axis=-1)


def excitation_probability(state):
    """Excited-state population P_e = (1 - z) / 2, clipped to [0, 1].

    Raises
    ------
    InvalidStateError
        If |z| exceeds 1 + Z_TOL; small numerical overshoot inside that
        band is clipped instead.
    """
    v = _as_state(state)
    z = v[..., 2]
    if np.any(np.abs(z) > 1.0 + Z_TOL):
        raise InvalidStateError(f"z component {float(np.max(np.abs(z)))!r} outside [-1, 1]")
    p = np.clip((1.0 - z) / 2.0, 0.0, 1.0)
    return float(p) if np.ndim(p) == 0 else p


@dataclass(frozen=True)
class InPlaneAxis:
    """Equatorial rotation axis, stored as an azimuth reduced to [0, 2*pi)."""

    azimuth: float

    def __post_init__(self):
        a = float(self.azimuth)
        if not np.isfinite(a):
            raise ValueError("azimuth must be finite")
        object.__setattr__(self, "azimuth", wrap_angle(a))

    @property
    def vector(self) -> np.ndarray:
        """Unit vector (cos azimuth, sin azimuth, 0)."""
        return np.array([np.cos(self.azimuth), np.sin(self.azimuth), 0.0])
