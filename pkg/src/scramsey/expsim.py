"""Shot-by-shot experiment simulation and fringe fitting.

Bridges the noiseless engine and what a real run produces: a fresh shot
phase per measurement, optional phase jitter before the read pulse,
contrast decay with hold time, and finite-ensemble projection noise.
All randomness flows from one seed through per-trial child streams, so
every result is reproducible bit for bit.

Draw order within a shot is fixed: shot phase (only when the timeline
contains an S pulse and randomization is on), then phase jitter (only
when sigma > 0), then the projection sample (only with a finite atom
count).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .analysis import _as_intervals, _freeze
from .bloch import excitation_probability, precess
from .sequence import Frame, FrameSet, Pulse, Timeline, apply_event, default_frames, simulate


@dataclass(frozen=True)
class NoiseModel:
    """What is allowed to fluctuate, and the seed that drives it.

    atom_count None means an exact ensemble average (no projection
    noise); contrast_decay_tau is the 1/e time of the fringe envelope
    (inf disables decay); phase_jitter_sigma is the standard deviation
    of an extra precession angle picked up just before the last event.
    """

    seed: int = 0
    atom_count: int | None = None
    contrast_decay_tau: float = np.inf
    phase_jitter_sigma: float = 0.0

    def __post_init__(self):
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be an integer >= 0, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        if self.atom_count is not None:
            if int(self.atom_count) != self.atom_count or self.atom_count < 1:
                raise ValueError(f"atom_count must be a positive integer or None, got {self.atom_count!r}")
            object.__setattr__(self, "atom_count", int(self.atom_count))
        tau = float(self.contrast_decay_tau)
        if np.isnan(tau) or tau <= 0.0:
            raise ValueError(f"contrast_decay_tau must be positive (inf allowed), got {self.contrast_decay_tau!r}")
        object.__setattr__(self, "contrast_decay_tau", tau)
        sigma = float(self.phase_jitter_sigma)
        if not np.isfinite(sigma) or sigma < 0.0:
            raise ValueError(f"phase_jitter_sigma must be finite and >= 0, got {self.phase_jitter_sigma!r}")
        object.__setattr__(self, "phase_jitter_sigma", sigma)


def damp_contrast(p_e, hold_time, tau: float):
    """Pull excitation probabilities toward 1/2 by exp(-hold_time/tau).

    With tau = inf the input is returned unchanged (same object for
    arrays).
    """
    tau = float(tau)
    if np.isnan(tau) or tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    if np.isinf(tau):
        return p_e
    factor = np.exp(-np.asarray(hold_time, dtype=float) / tau)
    damped = 0.5 + (np.asarray(p_e, dtype=float) - 0.5) * factor
    if np.ndim(damped) == 0:
        return float(damped)
    return damped


def project_noise(p_e, atom_count: int, rng: np.random.Generator):
    """Replace probabilities by binomial excitation fractions of the ensemble."""
    if int(atom_count) != atom_count or atom_count < 1:
        raise ValueError(f"atom_count must be a positive integer, got {atom_count!r}")
    p = np.asarray(p_e, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    counts = rng.binomial(int(atom_count), p)
    fraction = counts / float(atom_count)
    if np.ndim(p_e) == 0 and np.ndim(fraction) == 0:
        return float(fraction)
    return fraction


@dataclass(frozen=True)
class TrialStats:
    """Per-trial readout samples over a common interval grid.

    samples has shape (trials, n_intervals).  std uses ddof=1 when at
    least two trials are present, otherwise it is identically zero.
    """

    intervals: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        intervals = _as_intervals(self.intervals)
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != intervals.shape[0]:
            raise ValueError(f"samples must have shape (trials, {intervals.shape[0]}), got {samples.shape}")
        if samples.shape[0] < 1:
            raise ValueError("need at least one trial")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "intervals", _freeze(intervals))
        object.__setattr__(self, "samples", _freeze(samples))

    @property
    def trials(self) -> int:
        return self.samples.shape[0]

    @property
    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        if self.trials < 2:
            return np.zeros(self.samples.shape[1])
        return self.samples.std(axis=0, ddof=1)


def _has_s_pulse(timeline: Timeline) -> bool:
    return any(isinstance(ev, Pulse) and ev.frame is Frame.S for ev in timeline.events)


def _run_shot(timeline: Timeline, frames: FrameSet, jitter: float):
    """Simulate one shot, with an extra precession just before the last event."""
    if jitter == 0.0 or len(timeline) == 0:
        return simulate(timeline, frames)
    head = Timeline(timeline.events[:-1])
    state = precess(simulate(head, frames), jitter)
    return apply_event(state, timeline.events[-1], head.duration, frames)


def run_trials(
    builder: Callable[[float], Timeline],
    frames: FrameSet | None,
    noise: NoiseModel,
    trials: int,
    intervals,
    randomize_phi: bool = True,
) -> TrialStats:
    """Measure builder(T) over the interval grid, ``trials`` times.

    builder maps an interval to a Timeline; frames supplies detunings
    and the baseline shot phase (None: reference frames).  When
    randomize_phi is set, shots whose timeline contains an S pulse get
    a fresh uniform shot phase each time.  Each trial consumes an
    independent child stream of noise.seed.
    """
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials!r}")
    if frames is None:
        frames = default_frames()
    intervals = _as_intervals(intervals)
    streams = np.random.SeedSequence(noise.seed).spawn(int(trials))
    samples = np.empty((int(trials), intervals.shape[0]))
    for i, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        for j, interval in enumerate(intervals):
            timeline = builder(float(interval))
            shot_frames = frames
            if randomize_phi and _has_s_pulse(timeline):
                shot_frames = replace(frames, phi_s=rng.uniform(0.0, 2.0 * np.pi))
            jitter = rng.normal(0.0, noise.phase_jitter_sigma) if noise.phase_jitter_sigma > 0.0 else 0.0
            p = excitation_probability(_run_shot(timeline, shot_frames, jitter))
            p = damp_contrast(p, timeline.duration, noise.contrast_decay_tau)
            if noise.atom_count is not None:
                p = project_noise(p, noise.atom_count, rng)
            samples[i, j] = p
    return TrialStats(intervals=intervals, samples=samples)


# ----------------------------------------------------------------- fitting


def damped_sinusoid(x, offset, amplitude, decay_time, angular_frequency, phase):
    """offset + amplitude * exp(-x/decay_time) * cos(angular_frequency*x + phase)"""
    x = np.asarray(x, dtype=float)
    envelope = np.exp(-x / decay_time) if np.isfinite(decay_time) else 1.0
    return offset + amplitude * envelope * np.cos(angular_frequency * x + phase)


@dataclass(frozen=True)
class FitResult:
    """Parameters of a damped-sinusoid fit and its diagnostics.

    degenerate_amplitude flags fits whose amplitude is not resolved
    above the residual noise (amplitude <= 3 * residual_rms); such a
    fringe should not be trusted, which is exactly the signature a
    scrambled record leaves in trial-averaged data.
    """

    offset: float
    amplitude: float
    decay_time: float
    angular_frequency: float
    phase: float
    residual_rms: float
    converged: bool
    degenerate_amplitude: bool

    def evaluate(self, x):
        return damped_sinusoid(x, self.offset, self.amplitude, self.decay_time, self.angular_frequency, self.phase)


def _wrap_phase(phase: float) -> float:
    return float((phase + np.pi) % (2.0 * np.pi) - np.pi)


def _validate_xy(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.shape != x.shape:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if x.shape[0] < 6:
        raise ValueError(f"need at least 6 samples to fit 5 parameters, got {x.shape[0]}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("x and y must be finite")
    if np.any(np.diff(x) <= 0.0):
        raise ValueError("x must be strictly increasing")
    return x, y


def initial_guess(x, y) -> tuple[float, float, float, float, float]:
    """Spectral starting point for :func:`fit_damped_sinusoid`.

    Frequency from the tallest nonzero rfft bin with parabolic
    refinement, phase from that bin's angle, decay time from a linear
    fit to the log envelope of block maxima.  Returns (offset,
    amplitude, decay_time, angular_frequency, phase).
    """
    x, y = _validate_xy(x, y)
    offset = float(y.mean())
    detrended = y - offset
    amplitude = float(np.ptp(y)) / 2.0
    span = float(x[-1] - x[0])

    spectrum = np.fft.rfft(detrended)
    magnitude = np.abs(spectrum)
    k = int(np.argmax(magnitude[1:])) + 1 if magnitude.shape[0] > 1 else 0
    refined = float(k)
    if 1 <= k < magnitude.shape[0] - 1:
        alpha, beta, gamma = magnitude[k - 1], magnitude[k], magnitude[k + 1]
        denom = alpha - 2.0 * beta + gamma
        if denom != 0.0:
            refined = k + 0.5 * float((alpha - gamma) / denom)
    step = span / (x.shape[0] - 1)
    omega = 2.0 * np.pi * refined / (x.shape[0] * step)
    phase = _wrap_phase(float(np.angle(spectrum[k])) - omega * float(x[0])) if k > 0 else 0.0

    blocks = min(8, max(2, x.shape[0] // 8))
    edges = np.array_split(np.arange(x.shape[0]), blocks)
    envelope = np.array([np.abs(detrended[idx]).max() for idx in edges])
    centers = np.array([x[idx].mean() for idx in edges])
    keep = envelope > 1e-15 * max(1.0, np.abs(y).max())
    decay_time = 10.0 * span
    if keep.sum() >= 2:
        slope = float(np.polyfit(centers[keep], np.log(envelope[keep]), 1)[0])
        if slope < 0.0:
            decay_time = min(-1.0 / slope, 1e3 * span)
    return offset, amplitude, decay_time, max(omega, 0.0), phase


def fit_damped_sinusoid(x, y, guess: Sequence[float] | None = None, max_iterations: int | None = None) -> FitResult:
    """Least-squares fit of a decaying cosine to (x, y).

    Non-convergence is reported through ``converged``, never raised.
    Constant data short-circuits to a zero-amplitude degenerate result.
    """
    x, y = _validate_xy(x, y)
    scale = max(1.0, float(np.abs(y).max()))
    if np.ptp(y) <= 1e-12 * scale:
        mean = float(y.mean())
        rms = float(np.sqrt(np.mean((y - mean) ** 2)))
        return FitResult(mean, 0.0, np.inf, 0.0, 0.0, rms, True, True)

    if guess is None:
        guess = initial_guess(x, y)
    elif len(guess) != 5:
        raise ValueError("guess must hold (offset, amplitude, decay_time, angular_frequency, phase)")
    offset, amplitude, decay_time, omega, phase = (float(g) for g in guess)

    def residual(params):
        return damped_sinusoid(x, *params) - y

    span = float(x[-1] - x[0])
    lower = [-np.inf, 0.0, span * 1e-9, 0.0, -np.inf]
    start = [
        offset,
        max(amplitude, 1e-12 * scale),
        float(np.clip(decay_time, span * 1e-6, 1e6 * span)),
        max(omega, 0.0),
        phase,
    ]
    result = least_squares(
        residual,
        start,
        bounds=(lower, np.inf),
        method="trf",
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
        max_nfev=max_iterations,
    )
    offset, amplitude, decay_time, omega, phase = (float(v) for v in result.x)
    rms = float(np.sqrt(np.mean(result.fun**2)))
    return FitResult(
        offset=offset,
        amplitude=amplitude,
        decay_time=decay_time,
        angular_frequency=omega,
        phase=_wrap_phase(phase),
        residual_rms=rms,
        converged=bool(result.status > 0),
        degenerate_amplitude=bool(amplitude <= 3.0 * rms),
    )
