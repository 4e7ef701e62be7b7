"""Closed-form persistence exponent φ(x, b) and asymmetry estimation.

For a barrier slope x ∈ [0, 1) and relative asymmetry b > 0::

    ψ̄(b)    = (b² - 1) / (b² + 1)
    κ(x, b) = (√(1-x)·b - √(1+x)) / (√(1-x)·b + √(1+x))
    φ(x, b) = (1/π)·arccos((ψ̄ - x) / (1 - ψ̄x))
            = 1/2 - (2/π)·arctan κ(x, b)

The two φ expressions are algebraically identical; both are implemented and
the agreement (to 1e-12 over a wide (x, b) grid) is part of the acceptance
suite.  φ is strictly increasing in x, strictly decreasing in b, and maps
onto (0, 1].  :func:`invert_phi` solves φ(x, b) = φ* for b in closed form.

Two empirical estimators of a walk's b are provided — they share no
machinery and are cross-reported so a defect in either shows up as
disagreement:

* :func:`estimate_b_tail` fits the half-excursion duration-tail constants
  C± in P(τ± > n) ≈ C±·n^(-1/2) and returns b̂ = C⁺/C⁻;
* :func:`estimate_b_q` estimates q = P(W_n < 0) from excursion pairs and
  inverts the closed form, b̂ = invert_phi(q̂, x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import engine
from .errors import InsufficientTail, OutOfDomain, Unattainable
from .increments import IncrementDistribution
from .rng import RandomStream, trial_keys, uniform_at


def _check_domain(x: float, b: float) -> None:
    if not 0.0 <= x < 1.0:
        raise OutOfDomain(f"x={x} outside [0, 1)")
    if not b > 0.0:
        raise OutOfDomain(f"b={b} must be > 0")


def psi_bar_of(b: float) -> float:
    """ψ̄ = (b² - 1)/(b² + 1) ∈ (-1, 1)."""
    if not b > 0.0:
        raise OutOfDomain(f"b={b} must be > 0")
    return (b * b - 1.0) / (b * b + 1.0)


def kappa_of(x: float, b: float) -> float:
    """κ(x, b) = (√(1-x)·b - √(1+x)) / (√(1-x)·b + √(1+x)) ∈ (-1, 1)."""
    _check_domain(x, b)
    u = math.sqrt(1.0 - x) * b
    v = math.sqrt(1.0 + x)
    return (u - v) / (u + v)


def phi(x: float, b: float) -> float:
    """Persistence exponent via the arccos form (primary definition)."""
    _check_domain(x, b)
    psi = psi_bar_of(b)
    w = (psi - x) / (1.0 - psi * x)
    return math.acos(max(-1.0, min(1.0, w))) / math.pi


def phi_arctan(x: float, b: float) -> float:
    """The same exponent via 1/2 - (2/π)·arctan κ(x, b) (consistency route)."""
    return 0.5 - 2.0 * math.atan(kappa_of(x, b)) / math.pi


def invert_phi(phi_target: float, x: float) -> float:
    """The b > 0 with phi(x, b) = phi_target, or :class:`Unattainable`."""
    if not 0.0 < phi_target < 1.0:
        raise Unattainable(f"phi={phi_target} outside (0, 1)")
    if not 0.0 <= x < 1.0:
        raise OutOfDomain(f"x={x} outside [0, 1)")
    w = math.cos(math.pi * phi_target)
    psi = (w + x) / (1.0 + w * x)
    if not -1.0 < psi < 1.0:
        raise Unattainable(f"phi={phi_target} unattainable at x={x} (psi_bar={psi})")
    return math.sqrt((1.0 + psi) / (1.0 - psi))


@dataclass(frozen=True)
class AsymmetryModel:
    """The (x, b) → (κ, ψ̄, φ) bundle for reporting."""

    x: float
    b: float
    kappa: float
    psi_bar: float
    phi: float


def model(x: float, b: float) -> AsymmetryModel:
    return AsymmetryModel(x=float(x), b=float(b), kappa=kappa_of(x, b),
                          psi_bar=psi_bar_of(b), phi=phi(x, b))


# ---------------------------------------------------------------------------
# empirical estimation of b
# ---------------------------------------------------------------------------

@dataclass
class AsymmetryEstimate:
    """b̂ with its method tag, bootstrap/propagated stderr and diagnostics."""

    b_hat: float
    method: str  # 'tail-ratio' | 'q-inversion'
    stderr: float
    diagnostics: dict = field(default_factory=dict)


def _fixed_slope_constant(durations: np.ndarray, grid: np.ndarray) -> float:
    """LS fit of C in P(τ > n) = C·n^(-1/2) over the grid (log scale)."""
    n = len(durations)
    exceed = np.array([(durations > g).sum() for g in grid], dtype=np.float64)
    p = exceed / n
    return float(np.exp(np.mean(np.log(p) + 0.5 * np.log(grid))))


def _tail_grid(durations: np.ndarray, window: tuple[float, float],
               cap: int, points: int) -> np.ndarray:
    lo = float(np.quantile(durations, window[0]))
    hi = float(np.quantile(durations, window[1]))
    hi = min(hi, cap / 2.0)  # keep the window inside the uncensored range
    if hi <= lo + 1:
        raise InsufficientTail(
            f"degenerate tail window [{lo:.0f}, {hi:.0f}] — need longer runs "
            "or a larger step cap")
    grid = np.unique(np.round(np.exp(np.linspace(np.log(lo), np.log(hi),
                                                 points))).astype(np.int64))
    if len(grid) < 8:
        raise InsufficientTail(f"only {len(grid)} distinct grid points in "
                               f"[{lo:.0f}, {hi:.0f}]")
    return grid


def estimate_b_tail(dist: IncrementDistribution, n_excursions: int, seed: int, *,
                    step_cap: int = 2 ** 22, window: tuple[float, float] = (0.90, 0.999),
                    grid_points: int = 12, bootstrap: int = 200,
                    min_tail: int = 100) -> AsymmetryEstimate:
    """Tail-ratio estimator of b from paired half-excursion durations.

    Simulates ``n_excursions`` complete excursions, fits the n^(-1/2) tail
    constants of the positive and negative stretch durations over the
    (90th, 99.9th)-percentile window (≥ 8 log-spaced grid points) and
    returns b̂ = C⁺/C⁻.  The stderr is a pair-resampling bootstrap, which
    keeps the within-excursion correlation of (τ⁺, τ⁻).

    Durations exceeding ``step_cap`` are right-censored: they still count as
    "> n" for every grid point (the window is clipped below the cap, so the
    fit itself never sees a censored value as finite).  Raises
    :class:`InsufficientTail` when fewer than ``min_tail`` stretches of
    either sign exceed the lower window edge.
    """
    if n_excursions < 1:
        raise ValueError("n_excursions must be >= 1")
    tau_pos, tau_neg, info = engine.collect_duration_pairs(
        dist, n_excursions, seed, step_cap=step_cap)

    grids = {}
    consts = {}
    for label, tau in (("pos", tau_pos), ("neg", tau_neg)):
        grid = _tail_grid(tau, window, step_cap, grid_points)
        n_beyond = int((tau > grid[0]).sum())
        if n_beyond < min_tail:
            raise InsufficientTail(
                f"{n_beyond} {label} stretches beyond the fit window "
                f"(need {min_tail}); increase n_excursions")
        grids[label] = grid
        consts[label] = _fixed_slope_constant(tau, grid)

    b_hat = consts["pos"] / consts["neg"]

    # pair bootstrap over excursions, windows held fixed
    boot_stream = RandomStream(seed, stream_id=2 ** 62 + 1)
    n = len(tau_pos)
    bvals = np.empty(bootstrap, dtype=np.float64)
    keys = np.full(n, np.uint64(boot_stream.key), dtype=np.uint64)
    for bi in range(bootstrap):
        counters = np.arange(bi * n, (bi + 1) * n, dtype=np.uint64)
        idx = (uniform_at(keys, counters) * n).astype(np.int64)
        cp = _fixed_slope_constant(tau_pos[idx], grids["pos"])
        cm = _fixed_slope_constant(tau_neg[idx], grids["neg"])
        bvals[bi] = cp / cm
    stderr = float(np.std(bvals, ddof=1))

    diag = {
        "c_plus": consts["pos"],
        "c_minus": consts["neg"],
        "window_pos": (int(grids["pos"][0]), int(grids["pos"][-1])),
        "window_neg": (int(grids["neg"][0]), int(grids["neg"][-1])),
        "n_excursions": n,
        "bootstrap": bootstrap,
    }
    diag.update(info)
    return AsymmetryEstimate(b_hat=b_hat, method="tail-ratio", stderr=stderr,
                             diagnostics=diag)


@dataclass
class QEstimate:
    """q̂ = fraction of decided trials with W_n < 0, plus cap bookkeeping."""

    q_hat: float
    stderr: float
    n_pairs: int
    trials: int
    decided: int
    negative: int
    undecided: int
    capped_draws: int
    engine: str

    def as_dict(self) -> dict:
        return dict(q_hat=self.q_hat, stderr=self.stderr, n_pairs=self.n_pairs,
                    trials=self.trials, decided=self.decided,
                    negative=self.negative, undecided=self.undecided,
                    capped_draws=self.capped_draws, engine=self.engine)


def estimate_q(dist: IncrementDistribution, x, n: int, trials: int, seed: int, *,
               engine_kind: str = "auto", workers: int = 1) -> QEstimate:
    """Estimate q(n) = P(W_n < 0), W_n = Σ_{i≤n} [(1-x)τ⁺_i - (1+x)τ⁻_i].

    Each trial simulates n complete excursions (an initial negative stretch,
    possible when the first step is negative, is discarded before pairing).
    The exponent theory says q(n) → φ(x, b) as n → ∞, so q̂ at finite n
    carries an O(n^(-1/2))-flavored bias; callers wanting a drift diagnostic
    run two horizons (see :func:`estimate_b_q`).

    For the simple walk, durations come from the exact passage-time law and
    W is accumulated in integers; draws hitting the duration cap make a
    trial *undecided* unless the sign of W is already forced, and undecided
    trials are retried at geometrically growing caps, then excluded (and
    reported) if still open.  Other walks use excursion-level duration
    tables (exact to the table horizon, √-law beyond), where every trial is
    decided.
    """
    x = Fraction(x)
    if not (0 <= x < 1):
        raise OutOfDomain(f"x={x} outside [0, 1)")
    res = engine.run_xi_trials(dist, x, n, trials, seed,
                               record_ns=(n,), engine_kind=engine_kind,
                               workers=workers, want_final=True)
    decided = res.decided
    negative = res.negative_final
    q_hat = negative / decided if decided else float("nan")
    stderr = math.sqrt(q_hat * (1 - q_hat) / decided) if decided else float("nan")
    return QEstimate(q_hat=q_hat, stderr=stderr, n_pairs=n, trials=trials,
                     decided=decided, negative=negative,
                     undecided=trials - decided, capped_draws=res.capped_draws,
                     engine=res.engine)


def estimate_b_q(dist: IncrementDistribution, x, n: int, trials: int, seed: int, *,
                 engine_kind: str = "auto", workers: int = 1) -> AsymmetryEstimate:
    """q-inversion estimator: b̂ = invert_phi(q̂, x) with q̂ taken at 4n.

    Runs q̂ at horizons n and 4n (independent trial banks); the larger
    horizon provides the estimate and the difference is reported (and folded
    into the stderr) as the finite-n drift allowance.
    """
    x = Fraction(x)
    q_short = estimate_q(dist, x, n, trials, seed,
                         engine_kind=engine_kind, workers=workers)
    q_long = estimate_q(dist, x, 4 * n, trials, seed + 1,
                        engine_kind=engine_kind, workers=workers)
    q_hat = q_long.q_hat
    drift = q_long.q_hat - q_short.q_hat
    b_hat = invert_phi(q_hat, float(x))
    # delta method: |db/dq| at q_hat, against MC error and drift jointly
    eps = 1e-6
    dbdq = (invert_phi(q_hat + eps, float(x)) - invert_phi(q_hat - eps, float(x))) / (2 * eps)
    stderr = abs(dbdq) * math.hypot(q_long.stderr, drift)
    diag = {
        "q_hat": q_hat,
        "q_stderr": q_long.stderr,
        "q_hat_short": q_short.q_hat,
        "n_short": n,
        "n_long": 4 * n,
        "drift": drift,
        "undecided": (q_short.undecided, q_long.undecided),
        "capped_draws": (q_short.capped_draws, q_long.capped_draws),
        "engine": q_long.engine,
    }
    return AsymmetryEstimate(b_hat=b_hat, method="q-inversion", stderr=stderr,
                             diagnostics=diag)


def estimate_b(dist: IncrementDistribution, method: str, seed: int, *,
               n_excursions: int = 50_000, x=Fraction(0), n_pairs: int = 250,
               trials: int = 50_000, workers: int = 1, **kwargs) -> AsymmetryEstimate:
    """Dispatch to one of the two b estimators by method name."""
    if method in ("tail", "tail-ratio"):
        return estimate_b_tail(dist, n_excursions, seed, **kwargs)
    if method in ("q", "q-inversion"):
        return estimate_b_q(dist, x, n_pairs, trials, seed, workers=workers, **kwargs)
    raise ValueError(f"unknown method {method!r} (expected 'tail' or 'q')")
