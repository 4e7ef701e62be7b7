"""Half-excursion duration laws.

Simple walk (exact)
-------------------
Under the carried-sign rule a half-excursion of the ±1 walk starts one unit
past zero and ends when the walk first reaches the opposite unit, so its
duration is the sum of two independent unit passage times T with

    P(T > 2j - 1) = P(T > 2j) = q_j = (2j-1)!!/(2j)!!  (q_0 = 1).

``q_j`` obeys q_j = q_{j-1}·(2j-1)/(2j); a cumulative-product table covers
j ≤ 2^19 and the Wallis expansion

    ln q_j = -½·ln(πj) + ln1p(-1/(8j) + 1/(128j²))

takes over beyond it (relative error ~ (1/j)³, far below float precision at
the table edge).  Draws are inverse-CDF: a table search in the bulk, a
40-step integer bisection on the expansion in the tail, capped at
j = 2^39 (T = 2^40 + 1) with capped draws flagged — their probability per
draw is about 7.6e-7, and callers account for them explicitly.

General walks (tables)
----------------------
For other step laws the duration of a stretch depends on its entry position
(the first value past zero), and E[τ] = ∞ makes per-step simulation of long
excursion sequences infeasible.  :class:`ExcursionTables` builds, for every
reachable entry state on each side, the exact (float, deterministic) law of
(τ, exit value) up to a table horizon N by dynamic programming over
positions, then extends the tail by the exact √-law shape:
u = P(τ > n) ≈ P(τ > N)·(N/n)^(1/2) inverts to n = N·(P(τ > N)/u)².  The
exit-value split in the tail uses the empirical split over the second half
of the table, which has converged to the tail limit at the table's accuracy.
Tail draws are counted so consumers can report how much of a run leaned on
the extension.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .increments import IncrementDistribution

_TABLE_BITS = 19
_TABLE_LEN = 1 << _TABLE_BITS
DEFAULT_PASSAGE_CAP_EXP = 39  # cap j at 2^39, i.e. T at 2^40 + 1
DEFAULT_TABLE_SIZE = 1 << 15


@lru_cache(maxsize=1)
def _q_table() -> np.ndarray:
    """q_j for j = 0..2^19 by cumulative product (exactly monotone)."""
    j = np.arange(1, _TABLE_LEN + 1, dtype=np.float64)
    q = np.empty(_TABLE_LEN + 1, dtype=np.float64)
    q[0] = 1.0
    np.cumprod((2.0 * j - 1.0) / (2.0 * j), out=q[1:])
    q.setflags(write=False)
    return q


def _log_q(j) -> np.ndarray:
    """ln q_j by the Wallis expansion (valid for large j; used past the table)."""
    j = np.asarray(j, dtype=np.float64)
    return -0.5 * np.log(np.pi * j) + np.log1p(-1.0 / (8.0 * j) + 1.0 / (128.0 * j * j))


def unit_passage_from_uniforms(u: np.ndarray, *, cap_exp: int = DEFAULT_PASSAGE_CAP_EXP
                               ) -> tuple[np.ndarray, np.ndarray]:
    """Invert uniforms to unit passage times T (odd ints), vectorized.

    Returns ``(T, capped)``; where ``capped`` is True the true T exceeds
    2^(cap_exp + 1) and the reported value is that cap + 1.
    """
    u = np.asarray(u, dtype=np.float64)
    q = _q_table()
    jmax = 1 << cap_exp
    # j(u) = #{i >= 1 : q_i >= u}; descending table searched via negation
    j = np.searchsorted(-q, -u, side="right").astype(np.int64) - 1

    if jmax <= _TABLE_LEN:
        # cap inside the exact table: clamp directly, no asymptotics needed
        capped = j >= jmax
        return 2 * np.minimum(j, jmax) + 1, capped

    capped = np.zeros(u.shape, dtype=bool)
    in_tail = j >= _TABLE_LEN
    if np.any(in_tail):
        ut = u[in_tail]
        log_ut = np.log(ut)
        deep = _log_q(jmax) >= log_ut
        lo = np.full(ut.shape, _TABLE_LEN, dtype=np.int64)   # q_lo >= u holds
        hi = np.full(ut.shape, jmax, dtype=np.int64)         # q_hi < u (where not deep)
        # integer bisection for the largest j with q_j >= u
        while True:
            gap = hi - lo
            if not np.any(gap > 1):
                break
            mid = lo + gap // 2
            ge = _log_q(mid) >= log_ut
            lo = np.where(ge, mid, lo)
            hi = np.where(ge, hi, mid)
        jt = np.where(deep, jmax, lo)
        j[in_tail] = jt
        capped[in_tail] = deep
    return 2 * j + 1, capped


def srw_tau_from_uniform_pairs(u1: np.ndarray, u2: np.ndarray, *,
                               cap_exp: int = DEFAULT_PASSAGE_CAP_EXP
                               ) -> tuple[np.ndarray, np.ndarray]:
    """Half-excursion durations τ = T + T' from two uniform banks."""
    t1, c1 = unit_passage_from_uniforms(u1, cap_exp=cap_exp)
    t2, c2 = unit_passage_from_uniforms(u2, cap_exp=cap_exp)
    return t1 + t2, c1 | c2


def srw_halfexcursion_survival(n) -> np.ndarray:
    """Exact P(τ > n) for the simple walk (n within the table range).

    τ = T + T' with the unit-passage law above; computed by convolving the
    exact pmf, for use as a reference curve in tests and diagnostics.
    """
    n = np.asarray(n, dtype=np.int64)
    nmax = int(n.max())
    q = _q_table()
    if nmax // 2 + 2 >= len(q):
        raise ValueError("n beyond the exact table range")
    # pmf of T at odd arguments: P(T = 2j+1) = q_j - q_{j+1}
    jmax = nmax // 2 + 1
    pmf_t = q[:jmax + 1] - q[1:jmax + 2]
    # τ = T + T' is even; P(τ = 2m+2) = Σ_j pmf_t[j]·pmf_t[m-j]
    pmf_tau = np.convolve(pmf_t, pmf_t)[:jmax + 1]
    surv = 1.0 - np.cumsum(pmf_tau)
    # τ = 2m+2 for m = 0..; P(τ > n) = P(τ > 2⌊n/2⌋) = surv at m = ⌊n/2⌋ - 1
    m = np.maximum(n // 2, 1) - 1
    out = np.where(n < 2, 1.0, surv[m])
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# duration tables for general walks
# ---------------------------------------------------------------------------

@dataclass
class SideTables:
    """Per-entry-state duration/exit tables for one side of zero.

    ``entries`` are entry positions as *distances from zero* (always
    positive here; the caller mirrors the negative side).  For entry index
    e: ``neg_surv[e][n] = -P(τ > n)`` (negated so the array ascends, ready
    for searchsorted), ``exit_cum[e][n, k]`` the cumulative split over
    ``exit_values`` given τ = n, ``tail_cum[e]`` the split given τ > N,
    and ``tail_p[e] = P(τ > N)``.
    """

    entries: list[int]
    exit_values: list[int]  # signed landing positions on the other side
    neg_surv: list[np.ndarray]
    exit_cum: list[np.ndarray]
    tail_cum: list[np.ndarray]
    tail_p: list[float]
    n_table: int


def _one_sided_tables(dist: IncrementDistribution, entries: list[int],
                      n_table: int, sigma_pad: float = 8.0) -> SideTables:
    """DP tables for stretches on the nonnegative side of ``dist``.

    The stretch lives on positions ≥ 0 (zero carries the stretch's sign) and
    ends the step it lands strictly below 0; the landing position is the
    next stretch's entry on the other side.
    """
    values = [int(v) for v in dist.values()]
    probs = [float(p) for p in dist.probabilities()]
    down = [(-v, p) for v, p in zip(values, probs) if v < 0]  # depth, prob
    max_down = max(d for d, _ in down)
    exit_values = [-d for d in range(1, max_down + 1)]  # signed landings -1..-max
    p_max = int(np.ceil(sigma_pad * float(dist.variance()) ** 0.5 * n_table ** 0.5))
    p_max = max(p_max, max(entries) + 1, dist.max_step + 1)

    neg_surv, exit_cum, tail_cum, tail_p = [], [], [], []
    for entry in entries:
        alive = np.zeros(p_max + 1, dtype=np.float64)
        alive[entry] = 1.0
        surv = np.empty(n_table + 1, dtype=np.float64)
        surv[0] = 1.0
        absorb = np.zeros((n_table + 1, max_down), dtype=np.float64)
        escaped = 0.0
        buf = np.zeros(p_max + 1, dtype=np.float64)
        for n in range(1, n_table + 1):
            buf[:] = 0.0
            for v, p in zip(values, probs):
                if v >= 0:
                    # shift up; mass pushed past p_max escapes (it cannot be
                    # absorbed again within the horizon at any relevant rate)
                    if v == 0:
                        buf += p * alive
                    else:
                        buf[v:] += p * alive[:p_max + 1 - v]
                        escaped += p * alive[p_max + 1 - v:].sum()
                else:
                    d = -v
                    buf[:p_max + 1 - d] += p * alive[d:]
                    # positions j < d land at j - d in [-d, -1]
                    for jpos in range(min(d, p_max + 1)):
                        absorb[n, d - jpos - 1] += p * alive[jpos]
            alive, buf = buf, alive
            surv[n] = surv[n - 1] - absorb[n].sum()
        # exit split given τ = n (rows with no mass are never sampled)
        row_tot = absorb.sum(axis=1, keepdims=True)
        safe = np.where(row_tot > 0, row_tot, 1.0)
        exit_c = np.cumsum(absorb / safe, axis=1)
        exit_c[row_tot[:, 0] == 0] = 1.0
        # tail split: absorptions over the second half of the table
        tail_counts = absorb[n_table // 2:].sum(axis=0)
        tot = tail_counts.sum()
        tail_c = (np.cumsum(tail_counts / tot) if tot > 0
                  else np.linspace(1.0 / max_down, 1.0, max_down))
        neg_surv.append(-surv)
        exit_cum.append(exit_c)
        tail_cum.append(tail_c)
        tail_p.append(float(surv[n_table]))
    return SideTables(entries=entries, exit_values=exit_values,
                      neg_surv=neg_surv, exit_cum=exit_cum,
                      tail_cum=tail_cum, tail_p=tail_p, n_table=n_table)


@dataclass
class ExcursionTables:
    """Both sides' tables plus the entry-state indexing for chain sampling."""

    dist: IncrementDistribution
    pos: SideTables              # stretches above zero; entries are +values
    neg: SideTables              # stretches below zero, mirrored; entries are |values|
    pos_index: dict[int, int]    # entry position (> 0) -> index into pos tables
    neg_index: dict[int, int]    # entry position (< 0) -> index into neg tables
    n_table: int

    def sample_tau(self, side: str, entry_idx: np.ndarray, u: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray]:
        """Durations for a batch of stretches (float64), plus tail-draw flags."""
        tables = self.pos if side == "pos" else self.neg
        tau = np.empty(u.shape, dtype=np.float64)
        tail = np.zeros(u.shape, dtype=bool)
        for e in range(len(tables.entries)):
            m = entry_idx == e
            if not np.any(m):
                continue
            um = u[m]
            ns = tables.neg_surv[e]
            t = np.searchsorted(ns, -um, side="right").astype(np.float64)
            pt = tables.tail_p[e]
            deep = um <= pt
            if np.any(deep):
                t[deep] = np.ceil(self.n_table * (pt / um[deep]) ** 2)
            tau[m] = t
            tail[m] = deep
        return tau, tail

    def sample_exit(self, side: str, entry_idx: np.ndarray, tau: np.ndarray,
                    tail: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Next entry indices (on the opposite side) for a batch of stretches."""
        tables = self.pos if side == "pos" else self.neg
        other_index = self.neg_index if side == "pos" else self.pos_index
        land_sign = -1 if side == "pos" else 1  # a pos stretch lands below zero
        kcols = len(tables.exit_values)
        # landing depth k+1 on this side is entry land_sign*(k+1) on the other
        trans = np.array([other_index[land_sign * d] for d in range(1, kcols + 1)],
                         dtype=np.int64)
        out = np.empty(u.shape, dtype=np.int64)
        for e in range(len(tables.entries)):
            m = entry_idx == e
            if not np.any(m):
                continue
            um = u[m]
            cums = np.empty((um.size, kcols), dtype=np.float64)
            bulk = ~tail[m]
            if np.any(bulk):
                cums[bulk] = tables.exit_cum[e][tau[m][bulk].astype(np.int64)]
            if np.any(~bulk):
                cums[~bulk] = tables.tail_cum[e]
            kidx = (um[:, None] > cums).sum(axis=1)
            out[m] = trans[kidx]
        return out


def _entry_closure(dist: IncrementDistribution) -> tuple[list[int], list[int]]:
    """All reachable entry positions: initial steps plus cross-side landings."""
    pos = {int(v) for v in dist.values() if v > 0}
    neg = {int(v) for v in dist.values() if v < 0}
    max_up = max(pos)
    max_down = -min(neg)
    pos |= set(range(1, max_up + 1))
    neg |= {-d for d in range(1, max_down + 1)}
    if 0 in (int(v) for v in dist.values()):
        pos.add(0)  # a first step of 0 starts a positive stretch at height 0
    return sorted(pos), sorted(neg)


_TABLE_CACHE: dict = {}


def excursion_tables(dist: IncrementDistribution, n_table: int = DEFAULT_TABLE_SIZE
                     ) -> ExcursionTables:
    """Build (or fetch cached) duration tables for a general walk."""
    key = (dist.atoms, n_table)
    hit = _TABLE_CACHE.get(key)
    if hit is not None:
        return hit
    pos_entries, neg_entries = _entry_closure(dist)
    pos_tables = _one_sided_tables(dist, pos_entries, n_table)
    # the negative side is the positive side of the mirrored walk
    neg_tables = _one_sided_tables(dist.mirrored(), [-e for e in neg_entries], n_table)
    tables = ExcursionTables(
        dist=dist,
        pos=pos_tables,
        neg=neg_tables,
        pos_index={e: i for i, e in enumerate(pos_entries)},
        neg_index={e: i for i, e in enumerate(neg_entries)},
        n_table=n_table,
    )
    _TABLE_CACHE[key] = tables
    return tables
