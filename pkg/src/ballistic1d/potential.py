"""Piecewise-linear electrostatic potential on [0, L] and the device profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidProfileError

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class Segment:
    """``V(x) = coeff0 + coeff1 * (x - x_start)`` on ``[x_start, x_end]``."""

    x_start: float
    x_end: float
    coeff0: float
    coeff1: float = 0.0

    def value(self, x):
        return self.coeff0 + self.coeff1 * (x - self.x_start)

    @property
    def end_value(self):
        return self.value(self.x_end)

    @property
    def is_constant(self):
        return self.coeff1 == 0.0


@dataclass(frozen=True)
class PotentialProfile:
    length: float
    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not (self.length > 0 and math.isfinite(self.length)):
            raise InvalidProfileError(f"length must be positive, got {self.length}")
        if not segs:
            raise InvalidProfileError("profile needs at least one segment")
        if segs[0].x_start != 0.0:
            raise InvalidProfileError(f"first segment must start at 0, got {segs[0].x_start}")
        if segs[-1].x_end != self.length:
            raise InvalidProfileError(
                f"last segment must end at L={self.length}, got {segs[-1].x_end}"
            )
        for i, seg in enumerate(segs):
            if not seg.x_end > seg.x_start:
                raise InvalidProfileError(f"segment {i} has non-increasing bounds")
            if i and seg.x_start != segs[i - 1].x_end:
                raise InvalidProfileError(
                    f"segments {i - 1} and {i} leave a gap or overlap "
                    f"({segs[i - 1].x_end} vs {seg.x_start})"
                )
        if segs[0].coeff0 != 0.0:
            raise InvalidProfileError(f"V(0) must be 0, got {segs[0].coeff0}")

    @property
    def v0(self):
        return self.segments[0].coeff0

    @property
    def vL(self):
        return self.segments[-1].end_value

    @property
    def is_piecewise_constant(self):
        return all(seg.is_constant for seg in self.segments)

    def segment_index(self, x):
        """Right-continuous lookup; ``x = L`` belongs to the last segment."""
        if x < 0 or x > self.length:
            raise DomainError(f"x={x} outside [0, {self.length}]")
        starts = [seg.x_start for seg in self.segments]
        return max(0, int(np.searchsorted(starts, x, side="right")) - 1)

    def eval(self, x):
        """Potential in V; accepts a scalar or an array of positions."""
        if np.ndim(x) == 0:
            return self.segments[self.segment_index(float(x))].value(float(x))
        x = np.asarray(x, dtype=float)
        if x.size and (x.min() < 0 or x.max() > self.length):
            raise DomainError(f"positions outside [0, {self.length}]")
        starts = np.array([seg.x_start for seg in self.segments])
        idx = np.clip(np.searchsorted(starts, x, side="right") - 1, 0, None)
        c0 = np.array([seg.coeff0 for seg in self.segments])[idx]
        c1 = np.array([seg.coeff1 for seg in self.segments])[idx]
        return c0 + c1 * (x - starts[idx])

    __call__ = eval

    def breakpoints(self):
        """Interior positions where the segment polynomial changes."""
        return [seg.x_start for seg in self.segments[1:]]

    def sample_grid(self, n_samples=1000):
        """Uniform grid of ``n_samples`` points plus every breakpoint.

        Uniform points closer than ``1e-9 L`` to a breakpoint are dropped so
        the breakpoint itself is kept exactly.
        """
        uniform = np.linspace(0.0, self.length, max(int(n_samples), 2))
        bps = np.asarray(self.breakpoints(), dtype=float)
        if bps.size:
            near = np.min(np.abs(uniform[:, None] - bps[None, :]), axis=1) < 1e-9 * self.length
            uniform = uniform[~near]
        return np.unique(np.concatenate([uniform, bps]))


# Profile specifications -----------------------------------------------------


@dataclass(frozen=True)
class Step:
    v_l: float
    length: float = 135.0
    x_step: float | None = None  # defaults to L/2


@dataclass(frozen=True)
class SingleBarrier:
    a1: float = 20.0
    a2: float = 30.0
    v_b: float = -0.3
    length: float = 50.0


@dataclass(frozen=True)
class DoubleBarrier:
    a1: float = 60.0
    a2: float = 65.0
    a3: float = 70.0
    a4: float = 75.0
    v_b: float = -0.3
    length: float = 135.0


@dataclass(frozen=True)
class Rtd:
    """Double barrier on top of a linear ramp from 0 at ``a1`` to ``v_l`` at ``a6``."""

    v_l: float = 0.1
    a1: float = 50.0
    a2: float = 60.0
    a3: float = 65.0
    a4: float = 70.0
    a5: float = 75.0
    a6: float = 85.0
    v_b: float = -0.3
    length: float = 135.0


@dataclass(frozen=True)
class Custom:
    segments: tuple[Segment, ...]
    length: float | None = None


def _check_breakpoints(points, length):
    inner = list(points)
    if any(not (0.0 < p < length) for p in inner):
        raise InvalidProfileError(f"breakpoints {inner} must lie strictly inside (0, {length})")
    if any(b <= a for a, b in zip(inner, inner[1:])):
        raise InvalidProfileError(f"breakpoints {inner} must be strictly increasing")


def _constant_pieces(edges, values, length):
    _check_breakpoints(edges, length)
    xs = [0.0, *edges, float(length)]
    return tuple(Segment(float(x0), float(x1), float(v)) for x0, x1, v in zip(xs, xs[1:], values))


def build_profile(spec) -> PotentialProfile:
    if isinstance(spec, Step):
        x_step = spec.length / 2.0 if spec.x_step is None else spec.x_step
        segs = _constant_pieces([x_step], [0.0, spec.v_l], spec.length)
        return PotentialProfile(float(spec.length), segs)
    if isinstance(spec, SingleBarrier):
        segs = _constant_pieces([spec.a1, spec.a2], [0.0, spec.v_b, 0.0], spec.length)
        return PotentialProfile(float(spec.length), segs)
    if isinstance(spec, DoubleBarrier):
        edges = [spec.a1, spec.a2, spec.a3, spec.a4]
        segs = _constant_pieces(edges, [0.0, spec.v_b, 0.0, spec.v_b, 0.0], spec.length)
        return PotentialProfile(float(spec.length), segs)
    if isinstance(spec, Rtd):
        a = [float(spec.a1), spec.a2, spec.a3, spec.a4, spec.a5, float(spec.a6)]
        _check_breakpoints(a, spec.length)
        slope = spec.v_l / (a[5] - a[0])
        xs = [0.0, *a, float(spec.length)]
        barrier = [0.0, 0.0, spec.v_b, 0.0, spec.v_b, 0.0, 0.0]
        segs = [Segment(0.0, a[0], 0.0)]
        for i in range(1, 6):
            x0, x1 = float(xs[i]), float(xs[i + 1])
            segs.append(Segment(x0, x1, slope * (x0 - a[0]) + barrier[i], slope))
        segs.append(Segment(a[5], float(spec.length), float(spec.v_l)))
        return PotentialProfile(float(spec.length), tuple(segs))
    if isinstance(spec, Custom):
        segs = tuple(spec.segments)
        length = segs[-1].x_end if spec.length is None else spec.length
        return PotentialProfile(float(length), segs)
    raise InvalidProfileError(f"unknown profile spec {spec!r}")


def as_custom(profile: PotentialProfile) -> Custom:
    return Custom(profile.segments, profile.length)


def rtd_family(v_l, **geometry):
    """Profile factory for bias sweeps; module-level so it pickles."""
    return build_profile(Rtd(v_l=v_l, **geometry))


def step_family(v_l, **geometry):
    return build_profile(Step(v_l=v_l, **geometry))
