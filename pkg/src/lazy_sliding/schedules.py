"""Step-size schedules for the accelerated sliding solvers.

Every schedule maps an outer iteration index k >= 1 plus a bundle of problem
constants to the step parameters (beta_k, gamma_k, eta_k, B_k, tau_k).  The
variants are named after the regime they cover rather than the symbols used
in any particular derivation:

- smooth_stochastic            anytime schedule, smooth f, mini-batch SFO
- smooth_stochastic_fixed_n    fixed-horizon schedule with distance estimate D_0
- smooth_deterministic         anytime schedule, exact gradients
- smooth_deterministic_fixed_n fixed-horizon schedule, exact gradients
- strongly_convex_det_phase    one restart phase s of the deterministic scheme
- strongly_convex_stoch_phase  one restart phase s of the stochastic scheme
- saddle_static                smoothed bilinear saddle, constant smoothing tau
- saddle_dynamic               smoothed bilinear saddle, tau_k ~ 1/sqrt(k)
- nonsmooth_stochastic         subgradient regime, unit batches
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .errors import ConfigError

DEFAULT_BATCH_CAP = 2 ** 20

SMOOTH_STOCHASTIC = "smooth_stochastic"
SMOOTH_STOCHASTIC_FIXED_N = "smooth_stochastic_fixed_n"
SMOOTH_DETERMINISTIC = "smooth_deterministic"
SMOOTH_DETERMINISTIC_FIXED_N = "smooth_deterministic_fixed_n"
STRONGLY_CONVEX_DET_PHASE = "strongly_convex_det_phase"
STRONGLY_CONVEX_STOCH_PHASE = "strongly_convex_stoch_phase"
SADDLE_STATIC = "saddle_static"
SADDLE_DYNAMIC = "saddle_dynamic"
NONSMOOTH_STOCHASTIC = "nonsmooth_stochastic"

VALID_TAGS = frozenset([
    SMOOTH_STOCHASTIC,
    SMOOTH_STOCHASTIC_FIXED_N,
    SMOOTH_DETERMINISTIC,
    SMOOTH_DETERMINISTIC_FIXED_N,
    STRONGLY_CONVEX_DET_PHASE,
    STRONGLY_CONVEX_STOCH_PHASE,
    SADDLE_STATIC,
    SADDLE_DYNAMIC,
    NONSMOOTH_STOCHASTIC,
])

_FIXED_N_TAGS = frozenset([
    SMOOTH_STOCHASTIC_FIXED_N,
    SMOOTH_DETERMINISTIC_FIXED_N,
    STRONGLY_CONVEX_DET_PHASE,
    STRONGLY_CONVEX_STOCH_PHASE,
    SADDLE_STATIC,
    NONSMOOTH_STOCHASTIC,
])

_PHASE_TAGS = frozenset([STRONGLY_CONVEX_DET_PHASE, STRONGLY_CONVEX_STOCH_PHASE])


@dataclass(frozen=True)
class ScheduleVariant:
    """A schedule tag plus the horizon N / phase index s it may need."""

    tag: str
    N: Optional[int] = None
    s: Optional[int] = None

    def __post_init__(self):
        if self.tag not in VALID_TAGS:
            raise ConfigError("unknown schedule tag %r" % (self.tag,))
        if self.tag in _FIXED_N_TAGS:
            if self.N is None or self.N < 1:
                raise ConfigError("schedule %r requires a horizon N >= 1" % (self.tag,))
        if self.tag in _PHASE_TAGS:
            if self.s is None or self.s < 1:
                raise ConfigError("schedule %r requires a phase index s >= 1" % (self.tag,))


@dataclass
class ProblemConstants:
    """Problem constants consumed by the schedules.

    All fields are optional; `schedule_eval` raises a ConfigError naming any
    constant the chosen variant needs but does not find.  mu defaults to 0
    (no strong convexity), alpha to 1 (exact weak separation).
    """

    L: Optional[float] = None
    mu: float = 0.0
    sigma2: Optional[float] = None
    M: Optional[float] = None
    D_X: Optional[float] = None
    D_0: Optional[float] = None
    A_norm: Optional[float] = None
    sigma_omega: Optional[float] = None
    D_YW: Optional[float] = None
    alpha: float = 1.0
    delta0: Optional[float] = None

    def __post_init__(self):
        for name in ("L", "sigma2", "M", "D_X", "D_0", "A_norm", "sigma_omega",
                     "D_YW", "delta0"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError("constant %s must be nonnegative, got %r" % (name, v))
        if self.mu < 0:
            raise ConfigError("mu must be nonnegative, got %r" % (self.mu,))
        if self.alpha < 1:
            raise ConfigError("alpha must be >= 1, got %r" % (self.alpha,))
        if self.D_X is not None and self.D_0 is not None and self.D_0 > self.D_X * (1 + 1e-12):
            raise ConfigError("D_0 must not exceed D_X (%r > %r)" % (self.D_0, self.D_X))


@dataclass(frozen=True)
class StepParams:
    beta: float
    gamma: float
    eta: float
    batch: int
    tau: float = 0.0


def _need(c, tag, *names):
    for name in names:
        v = getattr(c, name)
        if v is None:
            raise ConfigError("schedule %r requires constant %r" % (tag, name))
    return [getattr(c, name) for name in names]


def _batch(raw, cap):
    return max(1, min(int(math.ceil(raw)), cap))


def schedule_eval(variant, k, c, batch_cap=DEFAULT_BATCH_CAP):
    """Evaluate a schedule at outer iteration k.

    Parameters
    ----------
    variant : ScheduleVariant
    k : int
        Outer iteration index, 1-based.
    c : ProblemConstants
    batch_cap : int
        Upper bound applied to every mini-batch size (after the ceil), so a
        mis-measured variance cannot demand astronomically many samples.

    Returns
    -------
    StepParams
    """
    if k < 1:
        raise ValueError("iteration index k must be >= 1, got %r" % (k,))
    tag = variant.tag
    tau = 0.0

    if tag == SMOOTH_STOCHASTIC:
        L, sigma2, D = _need(c, tag, "L", "sigma2", "D_X")
        beta = 4.0 * L / (k + 2)
        gamma = 3.0 / (k + 2)
        eta = L * D * D / (k * (k + 1))
        batch = _batch(sigma2 * (k + 2) ** 3 / (L * L * D * D), batch_cap)

    elif tag == SMOOTH_STOCHASTIC_FIXED_N:
        L, sigma2, D0 = _need(c, tag, "L", "sigma2", "D_0")
        N = variant.N
        beta = 3.0 * L / k
        gamma = 2.0 / (k + 1)
        eta = 2.0 * L * D0 * D0 / (N * k)
        batch = _batch(sigma2 * N * (k + 1) ** 2 / (L * L * D0 * D0), batch_cap)

    elif tag == SMOOTH_DETERMINISTIC:
        L, D = _need(c, tag, "L", "D_X")
        beta = 3.0 * L / (k + 1)
        gamma = 3.0 / (k + 2)
        eta = L * D * D / (k * (k + 1))
        batch = 1

    elif tag == SMOOTH_DETERMINISTIC_FIXED_N:
        L, D0 = _need(c, tag, "L", "D_0")
        N = variant.N
        beta = 2.0 * L / k
        gamma = 2.0 / (k + 1)
        eta = 2.0 * L * D0 * D0 / (N * k)
        batch = 1

    elif tag == STRONGLY_CONVEX_DET_PHASE:
        L, delta0 = _need(c, tag, "L", "delta0")
        if c.mu <= 0:
            raise ConfigError("schedule %r requires constant 'mu' > 0" % (tag,))
        N, s = variant.N, variant.s
        beta = 2.0 * L / k
        gamma = 2.0 / (k + 1)
        eta = 8.0 * L * delta0 * 2.0 ** (-s) / (c.mu * N * k)
        batch = 1

    elif tag == STRONGLY_CONVEX_STOCH_PHASE:
        L, delta0, sigma2 = _need(c, tag, "L", "delta0", "sigma2")
        if c.mu <= 0:
            raise ConfigError("schedule %r requires constant 'mu' > 0" % (tag,))
        N, s = variant.N, variant.s
        beta = 3.0 * L / k
        gamma = 2.0 / (k + 1)
        eta = 8.0 * L * delta0 * 2.0 ** (-s) / (c.mu * N * k)
        batch = _batch(
            c.mu * sigma2 * N * (k + 1) ** 2 / (4.0 * L * L * delta0 * 2.0 ** (-s)),
            batch_cap,
        )

    elif tag in (SADDLE_STATIC, SADDLE_DYNAMIC):
        A, D, Dyw, sw = _need(c, tag, "A_norm", "D_X", "D_YW", "sigma_omega")
        if tag == SADDLE_STATIC:
            tau = 2.0 * A * D / (Dyw * math.sqrt(sw) * variant.N)
        else:
            tau = 2.0 * A * D / (Dyw * math.sqrt(sw * k))
        L_tau = A * A / (tau * sw)
        beta = 3.0 * L_tau / (k + 1)
        gamma = 3.0 / (k + 2)
        eta = L_tau * D * D / (k * k)
        batch = 1

    elif tag == NONSMOOTH_STOCHASTIC:
        M, sigma2, D = _need(c, tag, "M", "sigma2", "D_X")
        N = variant.N
        beta = math.sqrt(N * (sigma2 + M * M)) / D
        gamma = 1.0 / k
        eta = D * math.sqrt(sigma2 + M * M) / math.sqrt(N)
        batch = 1

    else:  # pragma: no cover - guarded by ScheduleVariant validation
        raise ConfigError("unknown schedule tag %r" % (tag,))

    return StepParams(beta=beta, gamma=gamma, eta=eta, batch=batch, tau=tau)


def gamma_product(gammas: Sequence[float]) -> float:
    """Cumulative weight Gamma_k: Gamma_1 = 1, Gamma_k = Gamma_{k-1} (1 - gamma_k).

    The first element of the sequence is gamma_1 and, per the recursion,
    never enters the product.
    """
    if len(gammas) == 0:
        raise ValueError("gamma_product needs at least one gamma")
    out = 1.0
    for g in gammas[1:]:
        out *= (1.0 - g)
    return out


def restart_phase_plan(c, stochastic, eps) -> Tuple[int, int]:
    """Phase length N and phase count S for the strongly convex restart scheme.

    N = ceil(2 sqrt(6 L / mu)) in the deterministic regime and
    N = ceil(4 sqrt(2 L / mu)) in the stochastic one; S = ceil(log2 max(1, delta0/eps))
    phases then guarantee a final gap of at most eps.
    """
    if c.L is None:
        raise ConfigError("restart plan requires constant 'L'")
    if c.mu is None or c.mu <= 0:
        raise ConfigError("restart plan requires constant 'mu' > 0")
    if c.delta0 is None:
        raise ConfigError("restart plan requires constant 'delta0'")
    if eps <= 0:
        raise ValueError("target accuracy eps must be positive, got %r" % (eps,))
    if stochastic:
        N = int(math.ceil(4.0 * math.sqrt(2.0 * c.L / c.mu)))
    else:
        N = int(math.ceil(2.0 * math.sqrt(6.0 * c.L / c.mu)))
    S = int(math.ceil(math.log2(max(1.0, c.delta0 / eps))))
    return N, S
