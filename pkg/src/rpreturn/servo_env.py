"""Simulated servo reacher.

A geared DC motor is integrated with explicit Euler steps of ``sim_step``
seconds. The agent only acts at coarse, randomly jittered decision times; the
voltage it chooses is held until the next decision. Between decisions the
environment also accumulates the discounted reward integral at simulation
resolution, which is the quantity control performance is measured by.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ._backend import kernels
from .quadrature import discount_factor

ANGLE_LIMIT = 1.306


class SimulationDivergedError(FloatingPointError):
    """The motor state became non-finite."""


class EpisodeFinishedError(RuntimeError):
    """``step`` was called after the episode terminated or was truncated."""


@dataclass(frozen=True)
class MotorParams:
    L_a: float = 2.05e-3    # armature inductance [H]
    R_a: float = 8.29       # armature resistance [Ohm]
    J_m: float = 8.67e-8    # rotor inertia [kg m^2]
    b_m: float = 8.87e-8    # rotor friction [N m s]
    K_t: float = 0.0107     # torque constant [N m / A]
    N: float = 200.0        # gear ratio
    eta: float = 0.836      # gear efficiency

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if not getattr(self, f.name) > 0.0:
                raise ValueError(f"motor parameter {f.name} must be positive")

    def as_tuple(self):
        return (self.L_a, self.R_a, self.J_m, self.b_m, self.K_t, self.N, self.eta)


@dataclass(frozen=True)
class IntervalNoiseModel:
    """Jittered decision intervals with rare very long "catastrophic" gaps."""

    target_mean: float = 0.040
    jitter_std: float = 0.010
    min_interval: float = 0.001
    catastrophe_prob: float = 0.01
    catastrophe_mean: float = 1.000
    catastrophe_std: float = 0.010

    def __post_init__(self):
        if not self.target_mean > 0.0:
            raise ValueError("target_mean must be positive")
        if not self.min_interval > 0.0:
            raise ValueError("min_interval must be positive")
        if not 0.0 <= self.catastrophe_prob <= 1.0:
            raise ValueError("catastrophe_prob must lie in [0, 1]")
        if self.jitter_std < 0.0 or self.catastrophe_std < 0.0:
            raise ValueError("standard deviations must be non-negative")

    @classmethod
    def constant(cls, interval: float) -> "IntervalNoiseModel":
        """Noise-free model that always returns ``interval``."""
        return cls(target_mean=interval, jitter_std=0.0, catastrophe_prob=0.0,
                   min_interval=min(interval, 0.001))


@dataclass(frozen=True)
class SimConfig:
    sim_step: float = 1e-4
    voltage_limit: float = 12.0
    angle_limit: float = ANGLE_LIMIT
    position_tolerance: float = 0.1
    velocity_tolerance: float = 0.1
    time_limit: float = 4.0
    gamma: float = 0.25
    literal_reward_sign: bool = False
    zero_velocity_on_clamp: bool = False

    def __post_init__(self):
        if not self.sim_step > 0.0:
            raise ValueError("sim_step must be positive")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")

    @property
    def reward_sign(self) -> float:
        return 1.0 if self.literal_reward_sign else -1.0


@dataclass
class MotorState:
    omega_m: float = 0.0
    i_a: float = 0.0
    theta: float = 0.0
    theta_dot: float = 0.0
    theta_target: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.omega_m, self.i_a, self.theta, self.theta_dot, self.theta_target], dtype=float)

    @classmethod
    def from_array(cls, x) -> "MotorState":
        return cls(*(float(v) for v in x))


class StepResult(NamedTuple):
    observation: np.ndarray
    reward: float
    elapsed: float
    terminated: bool
    truncated: bool
    integral_return_increment: float


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise SimulationDivergedError(f"non-finite motor state {x!r}")


def dynamics_derivative(state: MotorState, voltage: float, params: MotorParams = MotorParams()) -> MotorState:
    """Time derivative of the state vector under ``voltage``.

    The target angle has zero derivative. Returns a ``MotorState`` holding
    the derivative components.
    """
    p = params
    gear = p.J_m * p.N * p.eta
    w, i = state.omega_m, state.i_a
    return MotorState(
        omega_m=(-p.b_m / p.J_m) * w + (p.K_t / p.J_m) * i,
        i_a=(-p.K_t / p.L_a) * w + (-p.R_a / p.L_a) * i + (1.0 / p.L_a) * voltage,
        theta=state.theta_dot,
        theta_dot=(-p.b_m / gear) * w + (p.K_t / gear) * i,
        theta_target=0.0,
    )


def substep(state: MotorState, voltage: float, config: SimConfig = SimConfig(),
            params: MotorParams = MotorParams()) -> MotorState:
    """One Euler step of width ``config.sim_step`` followed by the angle clamp."""
    x = state.as_array()
    kernels.servo_advance(x, float(voltage), 1, config.sim_step, *params.as_tuple(),
                          config.angle_limit, config.zero_velocity_on_clamp, 1.0, 1.0, 0.0)
    _check_finite(x)
    return MotorState.from_array(x)


def sample_interval(noise: IntervalNoiseModel, rng: np.random.Generator) -> float:
    """Draw one decision interval in seconds.

    One uniform draw decides between the catastrophic and normal regime, one
    normal draw sets the length; the result is floored at ``min_interval``.
    """
    catastrophic = rng.random() < noise.catastrophe_prob
    if catastrophic:
        dt = noise.catastrophe_mean + noise.catastrophe_std * rng.standard_normal()
    else:
        dt = noise.target_mean + noise.jitter_std * rng.standard_normal()
    return max(noise.min_interval, float(dt))


class ServoReacher:
    """Gym-style environment: ``reset()`` then ``step(voltage)`` until done.

    Observations are ``(theta, theta_dot, theta_target)``. The per-decision
    reward is the negative absolute angle error at the end of the interval
    (``literal_reward_sign`` flips it). ``episode_integral_return`` holds the
    running discounted reward integral measured at simulation resolution.
    """

    def __init__(self, noise: IntervalNoiseModel | None = None, config: SimConfig | None = None,
                 params: MotorParams | None = None, rng: np.random.Generator | None = None):
        self.noise = noise if noise is not None else IntervalNoiseModel()
        self.config = config if config is not None else SimConfig()
        self.params = params if params is not None else MotorParams()
        if self.config.sim_step > self.noise.min_interval:
            raise ValueError("sim_step must not exceed the minimum decision interval")
        self.rng = rng if rng is not None else np.random.default_rng()
        self._x = np.zeros(5)
        self._log_gamma = math.log(self.config.gamma)
        self._disc_step = discount_factor(self.config.gamma, self.config.sim_step)
        self.active = False
        self.last_voltage = 0.0
        self._clear_clock()

    def _clear_clock(self):
        self.episode_substeps = 0
        self.overshoot = 0.0
        self.elapsed_total = 0.0
        self.episode_integral_return = 0.0

    @property
    def state(self) -> MotorState:
        return MotorState.from_array(self._x)

    @property
    def episode_time(self) -> float:
        """Simulated time since reset, in seconds."""
        return self.episode_substeps * self.config.sim_step

    def observation(self) -> np.ndarray:
        return self._x[2:5].copy()

    def reset(self, rng: np.random.Generator | None = None) -> np.ndarray:
        if rng is not None:
            self.rng = rng
        lim = self.config.angle_limit
        theta0 = self.rng.uniform(-lim, lim)
        target = self.rng.uniform(-lim, lim)
        self._x[:] = (0.0, 0.0, theta0, 0.0, target)
        self._clear_clock()
        self.active = True
        return self.observation()

    def set_state(self, state: MotorState) -> np.ndarray:
        """Start an episode from an explicit state (testing and replay)."""
        self._x[:] = state.as_array()
        self._clear_clock()
        self.active = True
        return self.observation()

    def _substeps_for(self, interval: float) -> int:
        # the 1e-9 slack stops representation error (0.04 / 1e-4 = 400.00000000000006)
        # from adding a spurious substep
        need = (interval - self.overshoot) / self.config.sim_step
        return max(1, math.ceil(need - 1e-9))

    def step(self, voltage: float, rng: np.random.Generator | None = None) -> StepResult:
        if not self.active:
            raise EpisodeFinishedError("episode is over; call reset()")
        cfg = self.config
        rng = rng if rng is not None else self.rng
        v = min(cfg.voltage_limit, max(-cfg.voltage_limit, float(voltage)))
        self.last_voltage = v

        interval = sample_interval(self.noise, rng)
        n_sub = self._substeps_for(interval)
        disc0 = 1.0 if cfg.gamma == 1.0 else math.exp(self.episode_time * self._log_gamma)
        increment, _ = kernels.servo_advance(
            self._x, v, n_sub, cfg.sim_step, *self.params.as_tuple(), cfg.angle_limit,
            cfg.zero_velocity_on_clamp, disc0, self._disc_step, cfg.reward_sign)
        if not (np.all(np.isfinite(self._x)) and math.isfinite(increment)):
            self.active = False
            raise SimulationDivergedError(f"non-finite motor state {self._x!r}")

        self.overshoot = n_sub * cfg.sim_step - (interval - self.overshoot)
        self.episode_substeps += n_sub
        self.elapsed_total += interval
        self.episode_integral_return += increment

        theta, theta_dot, target = self._x[2], self._x[3], self._x[4]
        error = abs(theta - target)
        reward = cfg.reward_sign * error
        terminated = bool(error < cfg.position_tolerance and abs(theta_dot) < cfg.velocity_tolerance)
        truncated = bool(not terminated and self.episode_time >= cfg.time_limit - 1e-12)
        if terminated or truncated:
            self.active = False
        return StepResult(self.observation(), float(reward), interval, terminated, truncated, float(increment))


def load_config(path) -> tuple[MotorParams, IntervalNoiseModel, SimConfig]:
    """Read ``[motor]``, ``[noise]`` and ``[sim]`` sections of an INI file.

    Missing sections or keys keep their defaults.
    """
    parser = configparser.ConfigParser()
    path = Path(path)
    with path.open() as fh:
        parser.read_file(fh)

    def build(cls, section):
        if not parser.has_section(section):
            return cls()
        kinds = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in parser.items(section):
            if key not in kinds:
                raise ValueError(f"unknown key {key!r} in [{section}]")
            if kinds[key] in (bool, "bool"):
                kwargs[key] = parser.getboolean(section, key)
            else:
                kwargs[key] = float(raw)
        return cls(**kwargs)

    # configparser lowercases keys; MotorParams uses mixed case
    motor = {}
    if parser.has_section("motor"):
        names = {f.name.lower(): f.name for f in dataclasses.fields(MotorParams)}
        for key, raw in parser.items("motor"):
            if key not in names:
                raise ValueError(f"unknown key {key!r} in [motor]")
            motor[names[key]] = float(raw)
    return MotorParams(**motor), build(IntervalNoiseModel, "noise"), build(SimConfig, "sim")


TRACE_FIELDS = ("time", "theta", "theta_dot", "action", "reward", "delta")


@dataclass
class EpisodeTrace:
    """Per-decision log of one episode, written as CSV rows."""

    rows: list = field(default_factory=list)

    def record(self, env: ServoReacher, action: float, result: StepResult):
        obs = result.observation
        self.rows.append((env.episode_time, float(obs[0]), float(obs[1]), float(action),
                          result.reward, result.elapsed))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_FIELDS)
            for row in self.rows:
                w.writerow([repr(v) for v in row])
