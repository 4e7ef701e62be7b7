"""Vectorized Monte Carlo trial engines.

RNG contract
------------
Trial ``i`` of a run draws exclusively from the counter stream keyed by
``(seed, trial_offset + i)``; each engine consumes stream positions in a
fixed documented order.  Results therefore depend only on (seed, trial
index), never on batching, compaction, or how trials are split across
workers — per-horizon counters merge by integer addition.

Engines
-------
``stepped_*``
    The reference engines: advance every live trial one step at a time,
    maintaining position, carried sign and running sign-sum, and test the
    barrier q·G_s vs p·s in int64 arithmetic at every step.  One uniform
    per step per trial.

``srw_excursion_*``
    Exact fast engines for the simple walk.  Stretch durations come from
    the closed-form passage law (:mod:`.durations`), and because the sign
    is constant on a stretch the sign-sum is piecewise linear in s, so the
    first barrier violation inside a stretch is a two-line integer
    computation instead of a walk:

    * up stretch from (t₀, G₀): the margin q·G_s - p·s strictly increases,
      so only the entry point s = t₀ + 1 can violate;
    * down stretch: G_s = G₀ - (s - t₀), so violation ⇔
      s ≥ q·(G₀ + t₀)/(p + q); the earliest offender is the ceiling of that
      ratio (strict mode) or one past its floor (weak mode).

    Consumption: one uniform for the first-step sign, then two per stretch.

``run_xi_trials``
    Excursion-pair runs for W_n = Σ (1-x)τ⁺ - (1+x)τ⁻: exact durations for
    the simple walk (integer W, cap-aware decided/undecided logic with
    deterministic retries), duration tables for general walks (float W,
    always decided).  Consumption: one uniform for the first step, two per
    discarded leading negative stretch, then per pair 4 uniforms (simple)
    or 2+2 (tables: duration and exit per stretch).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import durations as dur
from .increments import IncrementDistribution, steps_from_uniforms
from .rng import trial_keys, uniform_at

_SENTINEL_STREAM = 1 << 61  # stream-id base for non-trial streams


def _carry_signs(pos: np.ndarray, prev_sign: np.ndarray) -> np.ndarray:
    return np.where(pos > 0, 1, np.where(pos < 0, -1, prev_sign)).astype(prev_sign.dtype)


# ---------------------------------------------------------------------------
# stepped engines (any dist)
# ---------------------------------------------------------------------------

def stepped_first_violation(dist: IncrementDistribution, x: Fraction, t_max: int,
                            trials: int, seed: int, *, mode: str = "strict",
                            trial_offset: int = 0) -> np.ndarray:
    """First violation time per trial; t_max + 1 means the trial survived."""
    p, q = x.numerator, x.denominator
    strict = mode == "strict"
    keys = trial_keys(seed, np.arange(trial_offset, trial_offset + trials,
                                      dtype=np.uint64))
    idx = np.arange(trials, dtype=np.int64)
    ctr = np.zeros(trials, dtype=np.uint64)
    pos = np.zeros(trials, dtype=np.int64)
    sgn = np.ones(trials, dtype=np.int64)
    g = np.zeros(trials, dtype=np.int64)
    tstar = np.full(trials, t_max + 1, dtype=np.int64)

    for s in range(1, t_max + 1):
        if not idx.size:
            break
        u = uniform_at(keys, ctr)
        ctr += 1
        pos += steps_from_uniforms(dist, u)
        sgn = _carry_signs(pos, sgn)
        g += sgn
        viol = (q * g <= p * s) if strict else (q * g < p * s)
        if viol.any():
            tstar[idx[viol]] = s
            live = ~viol
            idx, keys, ctr, pos, sgn, g = (a[live] for a in (idx, keys, ctr,
                                                             pos, sgn, g))
    return tstar


def stepped_a_progress(dist: IncrementDistribution, x: Fraction, k_max: int,
                       trials: int, seed: int, *, mode: str = "weak",
                       step_cap: int = 10 ** 9, trial_offset: int = 0
                       ) -> tuple[np.ndarray, int]:
    """Complete excursions survived per trial (capped at k_max), plus the
    number of trials that hit the per-stretch step cap (these are counted
    as surviving to k_max — the documented upward-bias convention)."""
    p, q = x.numerator, x.denominator
    strict = mode == "strict"
    keys = trial_keys(seed, np.arange(trial_offset, trial_offset + trials,
                                      dtype=np.uint64))
    idx = np.arange(trials, dtype=np.int64)
    ctr = np.zeros(trials, dtype=np.uint64)
    pos = np.zeros(trials, dtype=np.int64)
    sgn = np.ones(trials, dtype=np.int64)
    g = np.zeros(trials, dtype=np.int64)
    m = np.zeros(trials, dtype=np.int64)          # crossings seen
    stretch_len = np.zeros(trials, dtype=np.int64)
    mstar = np.zeros(trials, dtype=np.int64)
    capped = 0

    s = 0
    while idx.size:
        s += 1
        u = uniform_at(keys, ctr)
        ctr += 1
        pos += steps_from_uniforms(dist, u)
        new_sgn = _carry_signs(pos, sgn)
        crossed = new_sgn != sgn
        if s == 1:
            crossed[:] = False  # time 0 is not an eligible crossing
        sgn = new_sgn
        m += crossed
        stretch_len = np.where(crossed, 1, stretch_len + 1)
        g += sgn
        # the 2k-th crossing closes the event before this step's barrier test
        done = m >= 2 * k_max
        viol = ((q * g <= p * s) if strict else (q * g < p * s)) & ~done
        over = (stretch_len > step_cap) & ~done & ~viol
        if done.any():
            mstar[idx[done]] = k_max
        if viol.any():
            mstar[idx[viol]] = m[viol] // 2
        if over.any():
            mstar[idx[over]] = k_max
            capped += int(over.sum())
        drop = done | viol | over
        if drop.any():
            live = ~drop
            idx, keys, ctr, pos, sgn, g, m, stretch_len = (
                a[live] for a in (idx, keys, ctr, pos, sgn, g, m, stretch_len))
    return mstar, capped


# ---------------------------------------------------------------------------
# exact excursion engines (simple walk)
# ---------------------------------------------------------------------------

def _up_entry_violation(g, t, p, q, strict):
    lhs = q * (g + 1)
    rhs = p * (t + 1)
    return lhs <= rhs if strict else lhs < rhs


def _down_first_violation(g, t, p, q, strict):
    """Earliest violating s on a down stretch entered from state (t, G)."""
    a = q * (g + t)  # nonnegative whenever the trial is still alive
    if strict:
        sstar = -(-a // (p + q))
    else:
        sstar = a // (p + q) + 1
    return np.maximum(sstar, t + 1)


def srw_excursion_first_violation(x: Fraction, t_max: int, trials: int, seed: int, *,
                                  mode: str = "strict", trial_offset: int = 0,
                                  cap_exp: int = dur.DEFAULT_PASSAGE_CAP_EXP
                                  ) -> tuple[np.ndarray, int]:
    """Exact first-violation times for the simple walk, one stretch at a time."""
    p, q = x.numerator, x.denominator
    strict = mode == "strict"
    keys = trial_keys(seed, np.arange(trial_offset, trial_offset + trials,
                                      dtype=np.uint64))
    idx = np.arange(trials, dtype=np.int64)
    tstar = np.full(trials, t_max + 1, dtype=np.int64)
    t = np.zeros(trials, dtype=np.int64)
    g = np.zeros(trials, dtype=np.int64)
    ctr = np.zeros(trials, dtype=np.uint64)

    u0 = uniform_at(keys, ctr)
    ctr += 1
    up = u0 >= 0.5  # matches the sampler's atom order (-1 below 1/2)
    capped_draws = 0

    while idx.size:
        u1 = uniform_at(keys, ctr)
        u2 = uniform_at(keys, ctr + 1)
        ctr += 2
        tau, cap = dur.srw_tau_from_uniform_pairs(u1, u2, cap_exp=cap_exp)
        capped_draws += int(cap.sum())

        dead = np.empty(idx.shape, dtype=bool)
        when = np.empty(idx.shape, dtype=np.int64)
        dead[up] = _up_entry_violation(g[up], t[up], p, q, strict)
        when[up] = t[up] + 1
        dn = ~up
        sstar = _down_first_violation(g[dn], t[dn], p, q, strict)
        dead[dn] = sstar <= np.minimum(t[dn] + tau[dn], t_max)
        when[dn] = sstar

        if dead.any():
            tstar[idx[dead]] = when[dead]
        t = t + tau
        g = np.where(up, g + tau, g - tau)
        survived = ~dead & (t >= t_max)
        keep = ~dead & ~survived
        if not keep.all():
            idx, t, g, keys, ctr, up = (a[keep] for a in (idx, t, g, keys, ctr, up))
        up = ~up
    return tstar, capped_draws


def srw_excursion_a_progress(x: Fraction, k_max: int, trials: int, seed: int, *,
                             mode: str = "weak", trial_offset: int = 0,
                             cap_exp: int = dur.DEFAULT_PASSAGE_CAP_EXP
                             ) -> tuple[np.ndarray, int]:
    """Exact excursion-event progress for the simple walk.

    mstar[i] = number of complete excursions through which trial i kept
    q·G_s vs p·s on the right side (weak mode by default), capped at k_max.
    """
    p, q = x.numerator, x.denominator
    strict = mode == "strict"
    keys = trial_keys(seed, np.arange(trial_offset, trial_offset + trials,
                                      dtype=np.uint64))
    idx = np.arange(trials, dtype=np.int64)
    mstar = np.zeros(trials, dtype=np.int64)
    t = np.zeros(trials, dtype=np.int64)
    g = np.zeros(trials, dtype=np.int64)
    ctr = np.zeros(trials, dtype=np.uint64)

    u0 = uniform_at(keys, ctr)
    ctr += 1
    up = u0 >= 0.5
    capped_draws = 0

    for stretch in range(2 * k_max):
        if not idx.size:
            break
        u1 = uniform_at(keys, ctr)
        u2 = uniform_at(keys, ctr + 1)
        ctr += 2
        tau, cap = dur.srw_tau_from_uniform_pairs(u1, u2, cap_exp=cap_exp)
        capped_draws += int(cap.sum())

        dead = np.empty(idx.shape, dtype=bool)
        dead[up] = _up_entry_violation(g[up], t[up], p, q, strict)
        dn = ~up
        sstar = _down_first_violation(g[dn], t[dn], p, q, strict)
        dead[dn] = sstar <= t[dn] + tau[dn]

        if dead.any():
            mstar[idx[dead]] = stretch // 2
        t = t + tau
        g = np.where(up, g + tau, g - tau)
        keep = ~dead
        if not keep.all():
            idx, t, g, keys, ctr, up = (a[keep] for a in (idx, t, g, keys, ctr, up))
        up = ~up
    if idx.size:
        mstar[idx] = k_max
    return mstar, capped_draws


# ---------------------------------------------------------------------------
# excursion-pair runs: W_n = sum of (1-x) tau+ - (1+x) tau-
# ---------------------------------------------------------------------------

@dataclass
class XiRunResult:
    """Counts from a batch of excursion-pair trials.

    ``alive_counts[j]`` trials had W_m >= 0 for every m <= record_ns[j];
    ``neg_counts[j]`` trials had W_{record_ns[j]} < 0 (marginal, not
    running-minimum).  ``decided`` / ``negative_final`` summarize the sign
    of W at the last recorded n after cap-retry resolution.
    """
    record_ns: tuple[int, ...]
    trials: int
    alive_counts: np.ndarray
    neg_counts: np.ndarray
    decided: int
    negative_final: int
    undecided: int
    capped_draws: int
    retries_used: int
    engine: str

    @staticmethod
    def merge(parts: list["XiRunResult"]) -> "XiRunResult":
        first = parts[0]
        return XiRunResult(
            record_ns=first.record_ns,
            trials=sum(p.trials for p in parts),
            alive_counts=np.sum([p.alive_counts for p in parts], axis=0),
            neg_counts=np.sum([p.neg_counts for p in parts], axis=0),
            decided=sum(p.decided for p in parts),
            negative_final=sum(p.negative_final for p in parts),
            undecided=sum(p.undecided for p in parts),
            capped_draws=sum(p.capped_draws for p in parts),
            retries_used=max(p.retries_used for p in parts),
            engine=first.engine,
        )


def _srw_xi_single(key: np.uint64, n_pairs: int, wp: int, wm: int,
                   cap_exp: int) -> tuple[int, bool, bool]:
    """Replay one trial's W_n serially at a (possibly raised) duration cap."""
    keys = np.array([key], dtype=np.uint64)
    c = 0
    u0 = float(uniform_at(keys, np.array([c], dtype=np.uint64))[0])
    c += 1
    if u0 < 0.5:  # leading negative stretch: burn its two draws
        c += 2
    w = 0
    cap_pos = cap_neg = False
    for _ in range(n_pairs):
        u = uniform_at(keys.repeat(4), np.arange(c, c + 4, dtype=np.uint64))
        c += 4
        tp, cp = dur.srw_tau_from_uniform_pairs(u[0:1], u[1:2], cap_exp=cap_exp)
        tm, cm = dur.srw_tau_from_uniform_pairs(u[2:3], u[3:4], cap_exp=cap_exp)
        w += wp * int(tp[0]) - wm * int(tm[0])
        cap_pos |= bool(cp[0])
        cap_neg |= bool(cm[0])
    return w, cap_pos, cap_neg


def _srw_xi_chunk(x: Fraction, n_pairs: int, trials: int, seed: int,
                  record_ns: tuple[int, ...], trial_offset: int,
                  cap_exp: int = dur.DEFAULT_PASSAGE_CAP_EXP,
                  max_retries: int = 3) -> XiRunResult:
    p, q = x.numerator, x.denominator
    wp, wm = q - p, q + p  # q * xi = wp * tau+ - wm * tau-
    keys = trial_keys(seed, np.arange(trial_offset, trial_offset + trials,
                                      dtype=np.uint64))
    ctr = np.zeros(trials, dtype=np.uint64)
    u0 = uniform_at(keys, ctr)
    ctr += 1
    down = u0 < 0.5
    if down.any():
        # leading negative stretch is not part of any pair: burn its draws
        ctr[down] += 2

    w = np.zeros(trials, dtype=np.int64)
    alive = np.ones(trials, dtype=bool)
    cap_pos = np.zeros(trials, dtype=bool)
    cap_neg = np.zeros(trials, dtype=bool)
    capped_draws = 0
    rec = sorted(record_ns)
    alive_counts = np.zeros(len(rec), dtype=np.int64)
    neg_counts = np.zeros(len(rec), dtype=np.int64)
    ri = 0

    for m in range(1, n_pairs + 1):
        u1 = uniform_at(keys, ctr)
        u2 = uniform_at(keys, ctr + 1)
        tp, cp = dur.srw_tau_from_uniform_pairs(u1, u2, cap_exp=cap_exp)
        u1 = uniform_at(keys, ctr + 2)
        u2 = uniform_at(keys, ctr + 3)
        tm, cm = dur.srw_tau_from_uniform_pairs(u1, u2, cap_exp=cap_exp)
        ctr += 4
        w += wp * tp - wm * tm
        cap_pos |= cp
        cap_neg |= cm
        capped_draws += int(cp.sum()) + int(cm.sum())
        alive &= w >= 0
        while ri < len(rec) and rec[ri] == m:
            alive_counts[ri] = int(alive.sum())
            neg_counts[ri] = int((w < 0).sum())
            ri += 1

    # A capped duration was recorded as a lower bound, so a trial's final
    # sign is only trustworthy when no cap opposes it.
    neg = w < 0
    undecided_mask = (neg & cap_pos) | (~neg & cap_neg)
    retries = 0
    for r in range(1, max_retries + 1):
        if not undecided_mask.any():
            break
        retries = r
        for i in np.flatnonzero(undecided_mask):
            wi, cpi, cmi = _srw_xi_single(keys[i], n_pairs, wp, wm,
                                          cap_exp + 2 * r)
            neg[i] = wi < 0
            undecided_mask[i] = (wi < 0 and cpi) or (wi >= 0 and cmi)
    undecided = int(undecided_mask.sum())
    decided_mask = ~undecided_mask
    return XiRunResult(
        record_ns=tuple(rec), trials=trials,
        alive_counts=alive_counts, neg_counts=neg_counts,
        decided=int(decided_mask.sum()),
        negative_final=int((neg & decided_mask).sum()),
        undecided=undecided, capped_draws=capped_draws,
        retries_used=retries, engine="exact-excursion",
    )


def _table_xi_chunk(dist: IncrementDistribution, x: Fraction, n_pairs: int,
                    trials: int, seed: int, record_ns: tuple[int, ...],
                    trial_offset: int, n_table: int = dur.DEFAULT_TABLE_SIZE
                    ) -> XiRunResult:
    tables = dur.excursion_tables(dist, n_table)
    wp = float(Fraction(1, 1) - x)
    wm = float(Fraction(1, 1) + x)
    keys = trial_keys(seed, np.arange(trial_offset, trial_offset + trials,
                                      dtype=np.uint64))
    ctr = np.zeros(trials, dtype=np.uint64)

    u0 = uniform_at(keys, ctr)
    ctr += 1
    first = steps_from_uniforms(dist, u0)
    pos_idx = np.zeros(trials, dtype=np.int64)
    up_start = first >= 0
    for v in dist.values():
        m = first == v
        if not m.any():
            continue
        if v >= 0:
            pos_idx[m] = tables.pos_index[int(v)]
        else:
            pos_idx[m] = tables.neg_index[int(v)]
    dn = ~up_start
    if dn.any():
        # leading negative stretch: draw its duration and exit, discard tau
        ut = uniform_at(keys[dn], ctr[dn])
        ctr[dn] += 1
        tau0, tail0 = tables.sample_tau("neg", pos_idx[dn], ut)
        ue = uniform_at(keys[dn], ctr[dn])
        ctr[dn] += 1
        pos_idx[dn] = tables.sample_exit("neg", pos_idx[dn], tau0, tail0, ue)

    w = np.zeros(trials, dtype=np.float64)
    alive = np.ones(trials, dtype=bool)
    tail_draws = 0
    rec = sorted(record_ns)
    alive_counts = np.zeros(len(rec), dtype=np.int64)
    neg_counts = np.zeros(len(rec), dtype=np.int64)
    ri = 0

    for m in range(1, n_pairs + 1):
        ut = uniform_at(keys, ctr)
        tau_p, tp_tail = tables.sample_tau("pos", pos_idx, ut)
        ue = uniform_at(keys, ctr + 1)
        neg_idx = tables.sample_exit("pos", pos_idx, tau_p, tp_tail, ue)
        ut = uniform_at(keys, ctr + 2)
        tau_m, tm_tail = tables.sample_tau("neg", neg_idx, ut)
        ue = uniform_at(keys, ctr + 3)
        pos_idx = tables.sample_exit("neg", neg_idx, tau_m, tm_tail, ue)
        ctr += 4
        tail_draws += int(tp_tail.sum()) + int(tm_tail.sum())
        w += wp * tau_p - wm * tau_m
        alive &= w >= 0.0
        while ri < len(rec) and rec[ri] == m:
            alive_counts[ri] = int(alive.sum())
            neg_counts[ri] = int((w < 0.0).sum())
            ri += 1

    neg = w < 0.0
    return XiRunResult(
        record_ns=tuple(rec), trials=trials,
        alive_counts=alive_counts, neg_counts=neg_counts,
        decided=trials, negative_final=int(neg.sum()),
        undecided=0, capped_draws=tail_draws,
        retries_used=0, engine="duration-table",
    )


def pick_engine(dist: IncrementDistribution, engine_kind: str = "auto") -> str:
    if engine_kind == "auto":
        return "exact-excursion" if dist.is_simple else "duration-table"
    if engine_kind in ("exact-excursion", "exact"):
        if not dist.is_simple:
            raise ValueError("exact excursion engine requires the simple walk")
        return "exact-excursion"
    if engine_kind in ("duration-table", "table"):
        return "duration-table"
    if engine_kind == "stepped":
        return "stepped"
    raise ValueError(f"unknown engine kind: {engine_kind!r}")


def run_xi_trials(dist: IncrementDistribution, x: Fraction, n: int, trials: int,
                  seed: int, *, record_ns: tuple[int, ...] | None = None,
                  engine_kind: str = "auto", workers: int = 1,
                  want_final: bool = True) -> XiRunResult:
    """Simulate `trials` excursion-pair sequences of length n.

    Returns merged counts; bit-identical for any `workers` split.
    """
    if record_ns is None:
        record_ns = (n,)
    record_ns = tuple(sorted(set(int(r) for r in record_ns)))
    if record_ns and record_ns[-1] > n:
        raise ValueError("record_ns beyond n")
    kind = pick_engine(dist, engine_kind)
    if kind == "exact-excursion":
        fn = _srw_xi_worker
        args = (x, n, seed, record_ns)
    else:
        fn = _table_xi_worker
        args = (dist, x, n, seed, record_ns)
        dur.excursion_tables(dist)  # build once before any fork
    parts = _run_in_chunks(fn, args, trials, workers)
    return XiRunResult.merge(parts)


def _srw_xi_worker(args, trials, offset):
    x, n, seed, record_ns = args
    return _srw_xi_chunk(x, n, trials, seed, record_ns, offset)


def _table_xi_worker(args, trials, offset):
    dist, x, n, seed, record_ns = args
    return _table_xi_chunk(dist, x, n, trials, seed, record_ns, offset)


# ---------------------------------------------------------------------------
# stretch-duration collection (tail-fitting inputs)
# ---------------------------------------------------------------------------

def collect_duration_pairs(dist: IncrementDistribution, n_excursions: int,
                           seed: int, *, step_cap: int = 1 << 22,
                           lanes: int = 2048
                           ) -> tuple[np.ndarray, np.ndarray, dict]:
    """(tau_plus, tau_minus, info) for ~n_excursions excursions.

    For the simple walk the durations come from the exact passage law so
    the arrays are plain iid draws (cap ~2^40, flagged in info).  For other
    walks, `lanes` independent walks are stepped and their alternating
    stretch durations harvested; a stretch still running once `step_cap`
    steps have elapsed (checked every 64 steps, so completed durations can
    reach step_cap + 63) is right-censored at step_cap + 1 — it still
    counts as "> n" for every grid point the tail fit uses — and the lane
    restarts fresh.  A fresh
    walk's leading negative stretch is discarded so that stretch slot i
    is always a positive-stretch / negative-stretch pair.
    """
    if dist.is_simple:
        ids = np.arange(n_excursions, dtype=np.uint64) + np.uint64(_SENTINEL_STREAM)
        keys = trial_keys(seed, ids)
        z = np.zeros(n_excursions, dtype=np.uint64)
        tau_p, cp = dur.srw_tau_from_uniform_pairs(
            uniform_at(keys, z), uniform_at(keys, z + 1))
        tau_m, cm = dur.srw_tau_from_uniform_pairs(
            uniform_at(keys, z + 2), uniform_at(keys, z + 3))
        info = {"engine": "exact-excursion", "censored_pos": int(cp.sum()),
                "censored_neg": int(cm.sum()), "cap": (1 << 41) + 2,
                "lanes": 0, "restarts": 0}
        return tau_p, tau_m, info

    lanes = int(min(lanes, max(1, n_excursions)))
    quota = -(-n_excursions // lanes)
    keys = trial_keys(seed, np.arange(lanes, dtype=np.uint64)
                      + np.uint64(_SENTINEL_STREAM))
    ctr = np.zeros(lanes, dtype=np.uint64)
    lane = np.arange(lanes, dtype=np.int64)
    pos = np.zeros(lanes, dtype=np.int64)
    sgn = np.ones(lanes, dtype=np.int64)
    t = np.zeros(lanes, dtype=np.int64)
    last_cross = np.zeros(lanes, dtype=np.int64)
    fresh = np.ones(lanes, dtype=bool)
    first_step = np.ones(lanes, dtype=bool)
    got_p = np.zeros(lanes, dtype=np.int64)
    got_m = np.zeros(lanes, dtype=np.int64)
    out_p = np.zeros((lanes, quota), dtype=np.int64)
    out_m = np.zeros((lanes, quota), dtype=np.int64)
    restarts = 0
    censored = [0, 0]

    def _record(lanes_sel, durs, signs):
        for arr, got, mask in ((out_p, got_p, signs > 0),
                               (out_m, got_m, signs < 0)):
            sel, d = lanes_sel[mask], durs[mask]
            room = got[sel] < quota
            sel, d = sel[room], d[room]
            arr[sel, got[sel]] = d
            got[sel] += 1

    block = 64  # steps advanced per vector pass; bookkeeping is per-column
    cols = np.arange(1, block + 1, dtype=np.int64)
    while lane.size:
        k = lane.size
        u = uniform_at(np.repeat(keys, block),
                       (np.repeat(ctr, block)
                        + np.tile(cols.astype(np.uint64) - 1, k)))
        ctr += block
        steps = steps_from_uniforms(dist, u).reshape(k, block)
        pos_blk = pos[:, None] + np.cumsum(steps, axis=1)
        raw = np.sign(pos_blk).astype(np.int64)
        # forward-fill zero signs from the carried sign (column 0)
        nz = np.where(raw != 0, cols, 0)
        run = np.maximum.accumulate(nz, axis=1)
        carried = np.concatenate([sgn[:, None], raw], axis=1)
        sign_blk = np.take_along_axis(carried, run, axis=1)
        flips = sign_blk != np.concatenate([sgn[:, None], sign_blk[:, :-1]],
                                           axis=1)
        flips[first_step, 0] = False  # time 0 is not an eligible crossing
        first_step[:] = False
        for j in range(block):
            crossed = flips[:, j]
            if not crossed.any():
                continue
            cross_t = t[crossed] + j  # the flip is between times t+j and t+j+1
            dur_done = cross_t - last_cross[crossed]
            sign_done = (sign_blk[crossed, j - 1] if j else sgn[crossed])
            skip = fresh[crossed] & (sign_done < 0)
            _record(lane[crossed][~skip], dur_done[~skip], sign_done[~skip])
            fresh[crossed] = False
            last_cross[crossed] = cross_t
        t += block
        pos = pos_blk[:, -1]
        sgn = sign_blk[:, -1]
        # censor stretches that outgrew the cap (checked at block ends, so a
        # censored stretch is cap..cap+block long; recorded as cap + 1)
        over = (t - last_cross) >= step_cap
        if over.any():
            sign_over = sgn[over]
            drop = fresh[over] & (sign_over < 0)
            rec = ~drop
            if rec.any():
                censored[0] += int((sign_over[rec] > 0).sum())
                censored[1] += int((sign_over[rec] < 0).sum())
                _record(lane[over][rec],
                        np.full(int(rec.sum()), step_cap + 1, dtype=np.int64),
                        sign_over[rec])
            restarts += int(over.sum())
            pos[over] = 0
            sgn[over] = 1
            t[over] = 0
            last_cross[over] = 0
            fresh[over] = True
            first_step[over] = True
        done = (got_p[lane] >= quota) & (got_m[lane] >= quota)
        if done.any():
            live = ~done
            (lane, keys, ctr, pos, sgn, t, last_cross, fresh, first_step) = (
                a[live] for a in (lane, keys, ctr, pos, sgn, t, last_cross,
                                  fresh, first_step))

    info = {"engine": "stepped-lanes", "censored_pos": censored[0],
            "censored_neg": censored[1], "cap": step_cap + 1,
            "lanes": int(out_p.shape[0]), "restarts": restarts}
    return out_p.ravel(), out_m.ravel(), info


# ---------------------------------------------------------------------------
# survival-count workers (used by the montecarlo layer)
# ---------------------------------------------------------------------------

@dataclass
class SurvivalCounts:
    grid: tuple[int, ...]
    trials: int
    survivors: np.ndarray   # survivors at each grid horizon
    capped: int
    engine: str

    @staticmethod
    def merge(parts: list["SurvivalCounts"]) -> "SurvivalCounts":
        first = parts[0]
        return SurvivalCounts(
            grid=first.grid,
            trials=sum(p.trials for p in parts),
            survivors=np.sum([p.survivors for p in parts], axis=0),
            capped=sum(p.capped for p in parts),
            engine=first.engine,
        )


def _counts_from_times(times: np.ndarray, grid: tuple[int, ...]) -> np.ndarray:
    """survivors[j] = #{times > grid[j]} via a sorted search."""
    s = np.sort(times)
    return times.size - np.searchsorted(s, np.asarray(grid), side="right")


def _atilde_worker(args, trials, offset):
    dist, x, t_max, seed, grid, mode, kind = args
    if kind == "exact-excursion":
        tstar, capped = srw_excursion_first_violation(
            x, t_max, trials, seed, mode=mode, trial_offset=offset)
    else:
        tstar = stepped_first_violation(dist, x, t_max, trials, seed,
                                        mode=mode, trial_offset=offset)
        capped = 0
    return SurvivalCounts(grid=grid, trials=trials,
                          survivors=_counts_from_times(tstar, grid),
                          capped=capped, engine=kind)


def _a_worker(args, trials, offset):
    dist, x, k_max, seed, grid, mode, kind, step_cap = args
    if kind == "exact-excursion":
        mstar, capped = srw_excursion_a_progress(
            x, k_max, trials, seed, mode=mode, trial_offset=offset)
    else:
        mstar, capped = stepped_a_progress(dist, x, k_max, trials, seed,
                                           mode=mode, step_cap=step_cap,
                                           trial_offset=offset)
    survivors = np.array([(mstar >= k).sum() for k in grid], dtype=np.int64)
    return SurvivalCounts(grid=grid, trials=trials, survivors=survivors,
                          capped=capped, engine=kind)


def atilde_counts(dist: IncrementDistribution, x: Fraction, t_max: int,
                  trials: int, seed: int, grid: tuple[int, ...], *,
                  mode: str = "strict", engine_kind: str = "auto",
                  workers: int = 1) -> SurvivalCounts:
    kind = pick_engine(dist, engine_kind)
    if kind == "duration-table":
        kind = "stepped"  # step-indexed events need the stepped engine
    args = (dist, x, t_max, seed, tuple(grid), mode, kind)
    return SurvivalCounts.merge(_run_in_chunks(_atilde_worker, args, trials,
                                               workers))


def a_counts(dist: IncrementDistribution, x: Fraction, k_max: int,
             trials: int, seed: int, grid: tuple[int, ...], *,
             mode: str = "weak", engine_kind: str = "auto",
             step_cap: int = 10 ** 9, workers: int = 1) -> SurvivalCounts:
    kind = pick_engine(dist, engine_kind)
    if kind == "duration-table":
        kind = "stepped"
    args = (dist, x, k_max, seed, tuple(grid), mode, kind, step_cap)
    return SurvivalCounts.merge(_run_in_chunks(_a_worker, args, trials, workers))


# ---------------------------------------------------------------------------
# chunked execution
# ---------------------------------------------------------------------------

def chunk_bounds(trials: int, workers: int) -> list[tuple[int, int]]:
    """Contiguous (offset, count) chunks covering range(trials)."""
    workers = max(1, min(workers, trials)) if trials else 1
    base, rem = divmod(trials, workers)
    bounds = []
    off = 0
    for i in range(workers):
        cnt = base + (1 if i < rem else 0)
        if cnt:
            bounds.append((off, cnt))
        off += cnt
    return bounds or [(0, 0)]


def _call_chunk(fn, args, count, offset):
    return fn(args, count, offset)


def _run_in_chunks(fn, args, trials: int, workers: int) -> list:
    """Run fn(args, count, offset) over contiguous chunks, serial or pooled.

    Stream keys depend only on the global trial index, so the merged
    result is independent of the chunking.
    """
    bounds = chunk_bounds(trials, workers)
    if len(bounds) == 1 or workers <= 1:
        return [fn(args, cnt, off) for off, cnt in bounds]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(_call_chunk, fn, args, cnt, off)
                for off, cnt in bounds]
        return [f.result() for f in futs]

