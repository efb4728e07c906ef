"""Online REINFORCE with eligibility traces for a Gaussian MLP policy.

Per decision, with ``g`` the score of the action just taken::

    z     <- z + g
    theta <- theta + alpha * R_eff * z
    z     <- gamma**delta * z

``R_eff = R * delta`` for the discrete-time return ("dtr") and
``R_eff = gamma**delta * R * delta`` for the right-point return ("rp").

Flat parameter layout (row-major): ``W1 (h1 x 3), b1 (h1), W2 (h2 x h1),
b2 (h2), w3 (h2), b3, s`` where ``s`` parameterizes the standard deviation.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .quadrature import discount_factor
from .servo_env import ANGLE_LIMIT, ServoReacher, SimulationDivergedError

STD_MODES = {"raw": kernels.STD_RAW, "softplus": kernels.STD_SOFTPLUS, "exp": kernels.STD_EXP}
# s such that softplus(s) == 1
SOFTPLUS_ONE = math.log(math.expm1(1.0))
DEFAULT_OBS_SCALE = (1.0 / ANGLE_LIMIT, 1.0 / 10.0, 1.0 / ANGLE_LIMIT)
SNAPSHOT_VERSION = 1


class PolicyDivergedError(FloatingPointError):
    """Policy parameters or outputs became non-finite (or std <= 0)."""


def _initial_std_param(mode: str) -> float:
    return {"raw": 1.0, "softplus": SOFTPLUS_ONE, "exp": 0.0}[mode]


def n_params(h1: int, h2: int) -> int:
    return 3 * h1 + h1 + h1 * h2 + h2 + h2 + 1 + 1


@dataclass
class PolicyNetwork:
    """Two tanh hidden layers; the output is the mean of a Gaussian.

    Observations are multiplied elementwise by ``obs_scale`` before the first
    layer. The standard deviation is a trainable scalar independent of the
    observation.
    """

    params: np.ndarray
    hidden: tuple[int, int] = (64, 64)
    std_mode: str = "softplus"
    obs_scale: tuple[float, float, float] = DEFAULT_OBS_SCALE

    def __post_init__(self):
        self.params = np.ascontiguousarray(self.params, dtype=float)
        if self.params.shape != (n_params(*self.hidden),):
            raise ValueError(f"expected {n_params(*self.hidden)} parameters, got {self.params.shape}")
        if self.std_mode not in STD_MODES:
            raise ValueError(f"unknown std_mode {self.std_mode!r}")
        self._scale = np.asarray(self.obs_scale, dtype=float)
        h1, h2 = self.hidden
        self._work = np.empty(self.params.size + h1 + 2 * h2)

    @classmethod
    def initialize(cls, rng: np.random.Generator, hidden=(64, 64), std_mode="softplus",
                   obs_scale=DEFAULT_OBS_SCALE) -> "PolicyNetwork":
        """Uniform fan-in init for hidden layers, zero output layer, std = 1."""
        h1, h2 = hidden
        k1 = 1.0 / math.sqrt(3)
        k2 = 1.0 / math.sqrt(h1)
        parts = [
            rng.uniform(-k1, k1, 3 * h1),
            rng.uniform(-k1, k1, h1),
            rng.uniform(-k2, k2, h1 * h2),
            rng.uniform(-k2, k2, h2),
            np.zeros(h2),
            [0.0],
            [_initial_std_param(std_mode)],
        ]
        return cls(np.concatenate(parts), tuple(hidden), std_mode, tuple(obs_scale))

    @property
    def mode_code(self) -> int:
        return STD_MODES[self.std_mode]

    def normalize(self, obs) -> np.ndarray:
        return np.asarray(obs, dtype=float) * self._scale

    def unpack(self) -> dict[str, np.ndarray]:
        h1, h2 = self.hidden
        p = self.params
        sizes = [("W1", (h1, 3)), ("b1", (h1,)), ("W2", (h2, h1)), ("b2", (h2,)),
                 ("w3", (h2,)), ("b3", ()), ("s", ())]
        out, pos = {}, 0
        for name, shape in sizes:
            size = int(np.prod(shape))
            out[name] = p[pos:pos + size].reshape(shape)
            pos += size
        return out

    def copy(self) -> "PolicyNetwork":
        return PolicyNetwork(self.params.copy(), self.hidden, self.std_mode, self.obs_scale)


def policy_forward(net: PolicyNetwork, obs) -> tuple[float, float]:
    mean, std = kernels.policy_forward(net.params, *net.hidden, net.normalize(obs), net.mode_code)
    if not (math.isfinite(mean) and math.isfinite(std) and std > 0.0):
        raise PolicyDivergedError(f"invalid policy output mean={mean} std={std}")
    return mean, std


def grad_log_pi(net: PolicyNetwork, obs, action: float) -> np.ndarray:
    """Gradient of ``log pi(action | obs)`` w.r.t. ``net.params``."""
    return np.asarray(kernels.grad_log_pi(net.params, *net.hidden, net.normalize(obs),
                                          float(action), net.mode_code))


def sample_action(net: PolicyNetwork, obs, rng: np.random.Generator) -> float:
    mean, std = policy_forward(net, obs)
    return mean + std * float(rng.standard_normal())


@dataclass(frozen=True)
class UpdateRule:
    variant: str
    alpha: float
    gamma: float

    def __post_init__(self):
        if self.variant not in ("dtr", "rp"):
            raise ValueError(f"variant must be 'dtr' or 'rp', got {self.variant!r}")
        if not self.alpha >= 0.0:
            raise ValueError("alpha must be non-negative")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")

    def effective_reward(self, reward: float, delta: float) -> float:
        scaled = reward * delta
        if self.variant == "rp":
            return discount_factor(self.gamma, delta) * scaled
        return scaled


def new_trace(net: PolicyNetwork) -> np.ndarray:
    return np.zeros_like(net.params)


def agent_step(net: PolicyNetwork, z: np.ndarray, rule: UpdateRule, obs, action: float,
               reward: float, delta: float) -> None:
    """Apply one online update in place to ``net.params`` and ``z``."""
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    if z.shape != net.params.shape:
        raise ValueError("trace shape does not match the network")
    scale = rule.alpha * rule.effective_reward(reward, delta)
    decay = discount_factor(rule.gamma, delta)
    ok = kernels.trace_step(net.params, z, *net.hidden, net.normalize(obs), float(action),
                            net.mode_code, scale, decay, net._work)
    if not ok:
        raise PolicyDivergedError("non-finite policy parameters after update")


# --- snapshots -------------------------------------------------------------

def save_snapshot(net: PolicyNetwork, path) -> None:
    """Text snapshot: a versioned header line then one parameter per line."""
    h1, h2 = net.hidden
    header = (f"rpreturn-policy v{SNAPSHOT_VERSION} hidden={h1},{h2} std_mode={net.std_mode} "
              f"obs_scale={','.join(repr(v) for v in net.obs_scale)} n={net.params.size}")
    buf = io.StringIO()
    np.savetxt(buf, net.params, fmt="%.17g")
    with open(path, "w") as fh:
        fh.write(header + "\n" + buf.getvalue())


def load_snapshot(path) -> PolicyNetwork:
    with open(path) as fh:
        header = fh.readline().split()
        if header[:2] != ["rpreturn-policy", f"v{SNAPSHOT_VERSION}"]:
            raise ValueError(f"unsupported snapshot header {' '.join(header)!r}")
        meta = dict(item.split("=", 1) for item in header[2:])
        params = np.loadtxt(fh, ndmin=1)
    if params.size != int(meta["n"]):
        raise ValueError("snapshot parameter count does not match header")
    hidden = tuple(int(v) for v in meta["hidden"].split(","))
    obs_scale = tuple(float(v) for v in meta["obs_scale"].split(","))
    return PolicyNetwork(params, hidden, meta["std_mode"], obs_scale)


# --- training loop ---------------------------------------------------------

@dataclass
class TrainingLog:
    """Completed episodes of one run: end time (simulated s) and integral return."""

    episode_end: list = field(default_factory=list)
    episode_return: list = field(default_factory=list)
    diverged: bool = False
    decisions: int = 0
    params_history: list | None = None

    def final_mean(self, budget: float, fraction: float = 0.2) -> float:
        """Mean return of episodes that ended in the last ``fraction`` of the budget."""
        ends = np.asarray(self.episode_end)
        rets = np.asarray(self.episode_return)
        mask = ends > (1.0 - fraction) * budget
        if not mask.any():
            return float("nan")
        return float(rets[mask].mean())


def train(env: ServoReacher, net: PolicyNetwork, rule: UpdateRule, budget: float,
          rng: np.random.Generator, record_params: bool = False) -> TrainingLog:
    """Train online for ``budget`` seconds of simulated time.

    ``rng`` drives action sampling; ``env`` owns its own stream for resets and
    decision intervals. Training stops at the first decision boundary at or
    past the budget, and the unfinished episode is dropped. Divergence of the
    simulator or the policy ends the run with ``diverged=True``.
    """
    log = TrainingLog(params_history=[] if record_params else None)
    clock = 0.0
    z = new_trace(net)
    obs = env.reset()
    episode_start = 0.0
    try:
        while clock < budget:
            action = sample_action(net, obs, rng)
            result = env.step(action)
            agent_step(net, z, rule, obs, action, result.reward, result.elapsed)
            log.decisions += 1
            if record_params:
                log.params_history.append(net.params.copy())
            obs = result.observation
            clock = episode_start + env.episode_time
            if result.terminated or result.truncated:
                log.episode_end.append(clock)
                log.episode_return.append(env.episode_integral_return)
                episode_start = clock
                z[:] = 0.0
                obs = env.reset()
    except (PolicyDivergedError, SimulationDivergedError):
        log.diverged = True
    return log
