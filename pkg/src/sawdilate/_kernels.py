"""Jitted inner loops for the pivot chain.

Everything here is a twin of the pure-Python reference in ``walk.py``:
the same two RNG draws per attempt, the same pivot-site/symmetry mapping,
the same tail-transform semantics, so both paths produce bit-identical
chains from equal seeds.  The speed comes from an open-addressing occupancy
table and from scanning only one arm of the walk per proposal.

Occupancy table: insert-only with validity-on-read.  An entry (key, idx) is
live iff site ``idx`` currently packs to ``key``; stale entries from earlier
configurations are skipped during probes and cleared by a full rebuild once
insertions exceed half the table.  Self-avoidance of the current walk
guarantees at most one live entry per position.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
U64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
U64_MIX2 = np.uint64(0x94D049BB133111EB)
U64_EMPTY = np.uint64(0)
PACK_OFFSET = np.int64(1) << np.int64(31)

# inverse symmetry ids; must match walk.SYMMETRIES ordering
_SYM_INV = np.array([2, 1, 0, 3, 4, 5, 6], dtype=np.int64)

# domain codes for the sample filter
DOM_NONE = -1
DOM_STRIP_CHORDAL = 0
DOM_STRIP_RADIAL = 1
DOM_TRIANGLE = 2
DOM_CIRCLE_CENTERED = 3
DOM_CIRCLE_GENERIC = 4


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * U64_MIX1
    z = (z ^ (z >> np.uint64(27))) * U64_MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _pack(x, y):
    return (np.uint64(x + PACK_OFFSET) << np.uint64(32)) | np.uint64(y + PACK_OFFSET)


@njit(cache=True, inline="always")
def _slot(key, mask):
    # Fibonacci hashing: one multiply, middle-high product bits index the
    # table.  Collision handling is by linear probe, so weak avalanche only
    # costs probes, never correctness.
    return np.int64(((key * U64_GOLDEN) >> np.uint64(29)) & np.uint64(mask))


@njit(cache=True, inline="always")
def _apply_sym(s, dx, dy):
    if s == 0:
        return -dy, dx
    if s == 1:
        return -dx, -dy
    if s == 2:
        return dy, -dx
    if s == 3:
        return dx, -dy
    if s == 4:
        return -dx, dy
    if s == 5:
        return dy, dx
    return -dy, -dx


@njit(cache=True, inline="always")
def _occupied_by_fixed(keys, idxs, mask, xs, ys, key, k, tail_moving):
    """Does a site of the non-moving part occupy position ``key``?"""
    j = _slot(key, mask)
    while keys[j] != U64_EMPTY:
        if keys[j] == key:
            idx = idxs[j]
            if _pack(xs[idx], ys[idx]) == key:
                if tail_moving:
                    return idx <= k
                return idx >= k
        j = (j + 1) & mask
    return False


@njit(cache=True)
def _rebuild_table(keys, idxs, mask, xs, ys):
    keys[:] = U64_EMPTY
    n1 = xs.shape[0]
    for i in range(n1):
        key = _pack(xs[i], ys[i])
        j = _slot(key, mask)
        while keys[j] != U64_EMPTY:
            j = (j + 1) & mask
        keys[j] = key
        idxs[j] = i
    return n1


@njit(cache=True, inline="always")
def _insert_tail(keys, idxs, mask, xs, ys, lo, inserted):
    n = xs.shape[0] - 1
    count = n - lo + 1
    if inserted + count > (mask + 1) // 2:
        return _rebuild_table(keys, idxs, mask, xs, ys)
    for i in range(lo, n + 1):
        key = _pack(xs[i], ys[i])
        j = _slot(key, mask)
        while keys[j] != U64_EMPTY:
            j = (j + 1) & mask
        keys[j] = key
        idxs[j] = i
    return inserted + count


@njit(cache=True)
def _attempt(xs, ys, keys, idxs, mask, inserted, halfplane, r1, r2, sx, sy):
    """One pivot attempt.  Returns (accepted, inserted).

    The pivot site is uniform on 0..N-1 (site 0 included, else the first
    bond would freeze) and the tail beyond it is transformed."""
    n = xs.shape[0] - 1
    if n < 1:
        return False, inserted
    k = np.int64(r1 % np.uint64(n))
    s = np.int64(r2 % np.uint64(7))
    px = xs[k]
    py = ys[k]
    tail_len = n - k

    if halfplane or tail_len <= k:
        # scan the transformed tail outward from the pivot
        for t in range(tail_len):
            i = k + 1 + t
            tx, ty = _apply_sym(s, xs[i] - px, ys[i] - py)
            nx = px + tx
            ny = py + ty
            if halfplane and ny < 0:
                return False, inserted
            if _occupied_by_fixed(keys, idxs, mask, xs, ys, _pack(nx, ny), k, True):
                return False, inserted
            sx[t] = nx
            sy[t] = ny
        for t in range(tail_len):
            xs[k + 1 + t] = sx[t]
            ys[k + 1 + t] = sy[t]
    else:
        # head is shorter: the walk obtained by the inverse symmetry on the
        # head is an isometric image of the proposal, so the self-avoidance
        # verdict transfers; the stored state is still the transformed tail.
        sinv = _SYM_INV[s]
        for i in range(k - 1, -1, -1):
            tx, ty = _apply_sym(sinv, xs[i] - px, ys[i] - py)
            if _occupied_by_fixed(
                keys, idxs, mask, xs, ys, _pack(px + tx, py + ty), k, False
            ):
                return False, inserted
        for i in range(k + 1, n + 1):
            tx, ty = _apply_sym(s, xs[i] - px, ys[i] - py)
            xs[i] = px + tx
            ys[i] = py + ty

    inserted = _insert_tail(keys, idxs, mask, xs, ys, k + 1, inserted)
    return True, inserted


@njit(cache=True, nogil=True)
def advance(xs, ys, keys, idxs, mask, inserted, halfplane, seed, draws, n_attempts, sx, sy):
    """Run n_attempts pivot attempts.  Returns (accepted, draws, inserted)."""
    st = seed + np.uint64(draws) * U64_GOLDEN
    acc = 0
    for _ in range(n_attempts):
        st += U64_GOLDEN
        r1 = _mix64(st)
        st += U64_GOLDEN
        r2 = _mix64(st)
        ok, inserted = _attempt(xs, ys, keys, idxs, mask, inserted, halfplane, r1, r2, sx, sy)
        if ok:
            acc += 1
    return acc, draws + 2 * n_attempts, inserted


@njit(cache=True, inline="always")
def _sqrt3_sign(a, b):
    """Sign of a + b*sqrt(3) for int64 a, b (exact; a^2 = 3 b^2 only at 0,0)."""
    if a >= 0:
        if b >= 0:
            if a == 0 and b == 0:
                return 0
            return 1
        return 1 if a * a > 3 * b * b else -1
    if b <= 0:
        return -1
    return 1 if 3 * b * b > a * a else -1


@njit(cache=True, inline="always")
def _triangle_dpair(side, x, y):
    """(a, b) with 2 z . n_side = a + b*sqrt(3) for the unit-circumradius
    triangle with vertices at polar angles 0, 120, 240."""
    if side == 0:  # normal at 60 degrees
        return x, y
    if side == 1:  # normal at 180 degrees
        return -2 * x, np.int64(0)
    return x, -y  # normal at 300 degrees


@njit(cache=True)
def _filter_sample(dcode, ip, fp, xs, ys):
    """Dilation + strict-interior test for the current walk.

    Returns (passed, lam).  "Not passed" covers undefined dilations as well
    as strict-interior failures; window conditioning on the boundary
    parameter happens later, outside the kernel.
    """
    n = xs.shape[0] - 1
    xe = xs[n]
    ye = ys[n]

    if dcode == DOM_STRIP_CHORDAL:
        if ye <= 0:
            return False, 0.0
        for i in range(1, n):
            yi = ys[i]
            if yi < 1 or yi > ye - 1:
                return False, 0.0
        return True, float(ye)

    if dcode == DOM_STRIP_RADIAL:
        hp = ip[0]
        hq = ip[1]
        if ye == 0:
            return False, 0.0
        if ye > 0:
            # upper boundary at (1 - h) * lam
            for i in range(1, n):
                yi = ys[i]
                if yi >= ye:
                    return False, 0.0
                if yi * (hq - hp) + ye * hp <= 0:
                    return False, 0.0
            return True, float(ye) * hq / (hq - hp)
        for i in range(1, n):
            yi = ys[i]
            if yi <= ye:
                return False, 0.0
            if yi * hp + ye * (hq - hp) >= 0:
                return False, 0.0
        return True, -float(ye) * hq / hp

    if dcode == DOM_TRIANGLE:
        # endpoint side: the one maximizing the doubled normal dot
        best = 0
        ba, bb = _triangle_dpair(0, xe, ye)
        for side in range(1, 3):
            a, b = _triangle_dpair(side, xe, ye)
            if _sqrt3_sign(a - ba, b - bb) > 0:
                best = side
                ba, bb = a, b
        for i in range(1, n):
            xi = xs[i]
            yi = ys[i]
            for side in range(3):
                a, b = _triangle_dpair(side, xi, yi)
                if _sqrt3_sign(a - ba, b - bb) >= 0:
                    return False, 0.0
        # endpoint on the scaled side: 2 z.n = lam * (2 * inradius) = lam
        return True, ba + bb * np.sqrt(3.0)

    if dcode == DOM_CIRCLE_CENTERED:
        rre = xe * xe + ye * ye
        for i in range(1, n):
            if xs[i] * xs[i] + ys[i] * ys[i] >= rre:
                return False, 0.0
        return True, np.sqrt(float(rre))

    # DOM_CIRCLE_GENERIC: unit circle centered at (cx, cy)
    cx = fp[0]
    cy = fp[1]
    cc = cx * cx + cy * cy
    tangent = ip[0] == 1
    need_ypos = ip[1] == 1
    fxe = float(xe)
    fye = float(ye)
    dc = fxe * cx + fye * cy
    rr = fxe * fxe + fye * fye
    if tangent:
        if dc <= 0.0:
            return False, 0.0
        lam = rr / (2.0 * dc)
    else:
        lam = (np.sqrt(dc * dc + (1.0 - cc) * rr) - dc) / (1.0 - cc)
    if lam <= 0.0:
        return False, 0.0
    lam2 = lam * lam * (1.0 - cc)
    for i in range(1, n):
        if need_ypos and ys[i] < 1:
            return False, 0.0
        fx = float(xs[i])
        fy = float(ys[i])
        if fx * fx + fy * fy - 2.0 * lam * (fx * cx + fy * cy) >= lam2:
            return False, 0.0
    return True, lam


@njit(cache=True, nogil=True)
def collect_samples(
    xs, ys, keys, idxs, mask, inserted, halfplane, seed, draws,
    n_attempts, interval, phase, sample_base,
    dcode, ip, fp,
    out_ord, out_x, out_y, out_lam,
    sx, sy,
):
    """Advance the chain, extracting a sample every ``interval`` attempts and
    keeping those whose dilation is defined and strict-interior test passes.

    Returns (n_pass, n_samples, accepted, draws, inserted, phase).
    """
    st = seed + np.uint64(draws) * U64_GOLDEN
    acc = 0
    npass = 0
    nsamp = 0
    for _ in range(n_attempts):
        st += U64_GOLDEN
        r1 = _mix64(st)
        st += U64_GOLDEN
        r2 = _mix64(st)
        ok, inserted = _attempt(xs, ys, keys, idxs, mask, inserted, halfplane, r1, r2, sx, sy)
        if ok:
            acc += 1
        phase += 1
        if phase == interval:
            phase = 0
            keep, lam = _filter_sample(dcode, ip, fp, xs, ys)
            if keep:
                out_ord[npass] = sample_base + nsamp
                out_x[npass] = xs[xs.shape[0] - 1]
                out_y[npass] = ys[ys.shape[0] - 1]
                out_lam[npass] = lam
                npass += 1
            nsamp += 1
    return npass, nsamp, acc, draws + 2 * n_attempts, inserted, phase


@njit(cache=True, inline="always")
def _one_side_indicator(xs, ys, exact, p, q, sin_t, cos_t):
    """All sites except site 0 strictly above the line through the origin."""
    n = xs.shape[0] - 1
    if exact:
        for i in range(1, n + 1):
            if q * ys[i] - p * xs[i] <= 0:
                return False
        return True
    for i in range(1, n + 1):
        if float(ys[i]) * cos_t - float(xs[i]) * sin_t <= 0.0:
            return False
    return True


@njit(cache=True, nogil=True)
def count_one_side(
    xs, ys, keys, idxs, mask, inserted, halfplane, seed, draws,
    n_attempts, interval, phase,
    exact, p, q, sin_t, cos_t,
    sx, sy,
):
    """Advance the chain counting samples that stay strictly above the line.

    Returns (hits, n_samples, accepted, draws, inserted, phase).
    """
    st = seed + np.uint64(draws) * U64_GOLDEN
    acc = 0
    hits = 0
    nsamp = 0
    for _ in range(n_attempts):
        st += U64_GOLDEN
        r1 = _mix64(st)
        st += U64_GOLDEN
        r2 = _mix64(st)
        ok, inserted = _attempt(xs, ys, keys, idxs, mask, inserted, halfplane, r1, r2, sx, sy)
        if ok:
            acc += 1
        phase += 1
        if phase == interval:
            phase = 0
            if _one_side_indicator(xs, ys, exact, p, q, sin_t, cos_t):
                hits += 1
            nsamp += 1
    return hits, nsamp, acc, draws + 2 * n_attempts, inserted, phase


def table_capacity(n_steps: int) -> int:
    cap = 1
    while cap < 16 * (n_steps + 1):
        cap *= 2
    return cap


def new_table(n_steps: int):
    cap = table_capacity(n_steps)
    return np.zeros(cap, dtype=np.uint64), np.zeros(cap, dtype=np.int64)
