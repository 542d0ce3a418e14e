"""Pulse timelines over one ensemble addressed by two rotating frames.

Two interferometers drive the same two-level ensemble: the write/read
frame (W) and the scramble/retrieve frame (S).  Simulation happens in the
W rotating frame:

* ``Wait(dt)`` precesses the state by ``delta_w * dt`` about +z;
* a W pulse of area theta rotates about the azimuth-0 equatorial axis;
* an S pulse of area theta fired at absolute time t rotates about the
  equatorial axis at azimuth ``eta(t) = (delta_w - delta_s) * t + phi_s``.

``phi_s`` is the relative phase of the two frames for one shot.  The
interferometers share no phase reference, so a fresh shot sees a fresh
uniformly random ``phi_s``; within a single timeline every S pulse reads
the same ``phi_s`` and only the deterministic drift
``(delta_w - delta_s) * t`` separates their axes.

Pulses are instantaneous: time advances through ``Wait`` events only.
The physical pulse lengths (``WRI_PULSE_SECONDS``, ``SRI_PULSE_SECONDS``)
are carried as metadata for reporting and never enter the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .bloch import GROUND, precess, rotate_inplane, validate_state, wrap_angle
from .errors import InvalidTimelineError

#: Reference detunings used throughout the examples and tests, rad/s.
DELTA_W_REF = 2.0 * np.pi * 100.0
DELTA_S_REF = 2.0 * np.pi * 100.0

# Physical pulse lengths of the reference apparatus.  Metadata only: the
# engine treats every pulse as instantaneous.
WRI_PULSE_SECONDS = 0.45e-3
SRI_PULSE_SECONDS = 2.75e-3


class Frame(Enum):
    """Which interferometer drives a pulse."""

    W = "W"  # write/read
    S = "S"  # scramble/retrieve


@dataclass(frozen=True)
class Pulse:
    """Instantaneous rotation by ``area`` radians, driven by ``frame``."""

    frame: Frame
    area: float

    def __post_init__(self):
        if not isinstance(self.frame, Frame):
            raise InvalidTimelineError(f"frame must be a Frame member, got {self.frame!r}")
        area = float(self.area)
        if not np.isfinite(area):
            raise InvalidTimelineError("pulse area must be finite")
        object.__setattr__(self, "area", area)

    @classmethod
    def wri(cls, area: float) -> "Pulse":
        return cls(Frame.W, area)

    @classmethod
    def sri(cls, area: float) -> "Pulse":
        return cls(Frame.S, area)


@dataclass(frozen=True)
class Wait:
    """Free evolution for ``duration`` seconds."""

    duration: float

    def __post_init__(self):
        d = float(self.duration)
        if not np.isfinite(d) or d < 0.0:
            raise InvalidTimelineError(f"wait duration must be finite and >= 0, got {self.duration!r}")
        object.__setattr__(self, "duration", d)


SequenceEvent = Union[Pulse, Wait]


@dataclass(frozen=True)
class Timeline:
    """Ordered pulse/wait events.  May be empty (identity)."""

    events: tuple = ()

    def __post_init__(self):
        ev = tuple(self.events)
        for e in ev:
            if not isinstance(e, (Pulse, Wait)):
                raise InvalidTimelineError(f"timeline events must be Pulse or Wait, got {e!r}")
        object.__setattr__(self, "events", ev)

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    @property
    def duration(self) -> float:
        """Total wall-clock length: the sum of all wait durations."""
        return sum(e.duration for e in self.events if isinstance(e, Wait))

    def pulse_times(self) -> tuple:
        """Absolute fire time of each pulse, in event order."""
        t, out = 0.0, []
        for e in self.events:
            if isinstance(e, Wait):
                t += e.duration
            else:
                out.append(t)
        return tuple(out)


@dataclass
class FrameSet:
    """Detunings of the two frames and their relative phase for one shot.

    ``phi_s`` may be an array to sweep many shot phases in one simulate
    call; it is reduced to [0, 2*pi) on construction.
    """

    delta_w: float
    delta_s: float
    phi_s: object = 0.0

    def __post_init__(self):
        self.delta_w = float(self.delta_w)
        self.delta_s = float(self.delta_s)
        if not np.isfinite(self.delta_w) or not np.isfinite(self.delta_s):
            raise ValueError("detunings must be finite")
        phi = np.asarray(self.phi_s, dtype=float)
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi_s must be finite")
        self.phi_s = wrap_angle(phi) if phi.ndim else wrap_angle(float(phi))


def default_frames(phi_s: float = 0.0) -> FrameSet:
    """FrameSet at the reference detunings (both 2*pi*100 rad/s)."""
    return FrameSet(DELTA_W_REF, DELTA_S_REF, phi_s)


def sri_axis_angle(t: float, frames: FrameSet):
    """Rotation-axis azimuth of an S pulse fired at absolute time ``t``.

    eta(t) = (delta_w - delta_s) * t + phi_s, reduced to [0, 2*pi).
    """
    t = float(t)
    if not np.isfinite(t) or t < 0.0:
        raise ValueError(f"pulse time must be finite and >= 0, got {t!r}")
    return wrap_angle((frames.delta_w - frames.delta_s) * t + frames.phi_s)


def apply_event(state, event: SequenceEvent, time: float, frames: FrameSet):
    """Apply one event to ``state`` at absolute time ``time``."""
    if isinstance(event, Wait):
        return precess(state, frames.delta_w * event.duration)
    if isinstance(event, Pulse):
        if event.frame is Frame.W:
            return rotate_inplane(state, 0.0, event.area)
        return rotate_inplane(state, sri_axis_angle(time, frames), event.area)
    raise InvalidTimelineError(f"unknown event {event!r}")


def trajectory(timeline: Timeline, frames: FrameSet, state=GROUND) -> list:
    """States along a timeline.

    Element 0 is the initial state; element i is the state after event i.
    """
    v = validate_state(state)
    out = [v]
    t = 0.0
    for event in timeline:
        v = apply_event(v, event, t, frames)
        if isinstance(event, Wait):
            t += event.duration
        out.append(v)
    return out


def simulate(timeline: Timeline, frames: FrameSet, state=GROUND):
    """Final state of a timeline; equals ``trajectory(...)[-1]`` exactly."""
    return trajectory(timeline, frames, state)[-1]


def ramsey(interval: float) -> Timeline:
    """pi/2 write, free evolution for ``interval`` seconds, pi/2 read."""
    return Timeline((Pulse.wri(np.pi / 2), Wait(interval), Pulse.wri(np.pi / 2)))


def scrambled_ramsey(scramble_area: float, t1: float, interval: float) -> Timeline:
    """Write, hold t1, scramble, free evolution, read."""
    return Timeline(
        (
            Pulse.wri(np.pi / 2),
            Wait(t1),
            Pulse.sri(scramble_area),
            Wait(interval),
            Pulse.wri(np.pi / 2),
        )
    )


def retrieved_ramsey(scramble_area: float, t1: float, t2: float, interval: float) -> Timeline:
    """Write, hold t1, scramble, store t2, retrieve, free evolution, read."""
    return Timeline(
        (
            Pulse.wri(np.pi / 2),
            Wait(t1),
            Pulse.sri(scramble_area),
            Wait(t2),
            Pulse.sri(scramble_area),
            Wait(interval),
            Pulse.wri(np.pi / 2),
        )
    )
