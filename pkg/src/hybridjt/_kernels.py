"""Range kernels over flat row-major potential tables.

Every kernel processes destination entries ``[begin, end)`` independently of
every other entry, so a table can be split into ranges and the ranges run on
different threads. All kernels release the GIL.

Tables are addressed by a flat float64 buffer plus an offset. Index mappings
are per-variable stride recipes: a destination entry is decomposed into its
mixed-radix digits once per range and advanced with an odometer afterwards.
"""

import numpy as np
from numba import njit

_JIT = dict(nogil=True, cache=True)

# task kinds
MARG = 0
ABSORB = 1
REDUCE = 2

# error codes
OK = 0
POSITIVE_OVER_ZERO = 1


@njit(inline="always", **_JIT)
def _start_digits(begin, meta, c0, n, digits):
    # mixed-radix digits of ``begin`` for the cards meta[c0:c0 + n]
    rem = begin
    for j in range(n - 1, -1, -1):
        card = meta[c0 + j]
        digits[j] = rem % card
        rem //= card


@njit(inline="always", **_JIT)
def _advance(meta, c0, s0, n, digits, idx):
    # odometer step over cards meta[c0:c0 + n] with strides meta[s0:s0 + n]
    j = n - 1
    while j >= 0:
        digits[j] += 1
        idx += meta[s0 + j]
        if digits[j] < meta[c0 + j]:
            return idx
        idx -= meta[c0 + j] * meta[s0 + j]
        digits[j] = 0
        j -= 1
    return idx


@njit(inline="always", **_JIT)
def _marg(src, src_off, dst, dst_off, meta, kc, ks, nk, sc, ss, ns, begin, end, kd, sd):
    for j in range(ns):
        sd[j] = 0
    _start_digits(begin, meta, kc, nk, kd)
    base = 0
    for j in range(nk):
        base += kd[j] * meta[ks + j]
    inner = 1
    for j in range(ns):
        inner *= meta[sc + j]
    for d in range(begin, end):
        total = 0.0
        idx = base
        for _ in range(inner):
            total += src[src_off + idx]
            idx = _advance(meta, sc, ss, ns, sd, idx)
        dst[dst_off + d] = total
        base = _advance(meta, kc, ks, nk, kd, base)


@njit(inline="always", **_JIT)
def _multiply(dst, dst_off, factor, f_off, meta, dc, fs, n, begin, end, digits):
    _start_digits(begin, meta, dc, n, digits)
    idx = 0
    for j in range(n):
        idx += digits[j] * meta[fs + j]
    top = 0.0
    for i in range(begin, end):
        v = dst[dst_off + i] * factor[f_off + idx]
        dst[dst_off + i] = v
        if v > top:
            top = v
        idx = _advance(meta, dc, fs, n, digits, idx)
    return top


@njit(**_JIT)
def marg_range(src, src_off, dst, dst_off, kcards, kstrides, scards, sstrides, begin, end):
    """dst[d] = sum of src entries that agree with destination entry d.

    ``kcards``/``kstrides``: kept variables in destination order with their
    source strides. ``scards``/``sstrides``: summed-out variables in source
    order. Each sum runs over ascending source indices.
    """
    nk = kcards.shape[0]
    ns = scards.shape[0]
    meta = np.concatenate((kcards, kstrides, scards, sstrides))
    kd = np.empty(nk, np.int64)
    sd = np.empty(ns, np.int64)
    _marg(src, src_off, dst, dst_off, meta, 0, nk, nk, 2 * nk, 2 * nk + ns, ns, begin, end, kd, sd)


@njit(**_JIT)
def extend_range(src, src_off, dst, dst_off, dcards, sstrides, begin, end):
    """dst[i] = src[projection of i]; ``sstrides`` is 0 for variables absent from src."""
    n = dcards.shape[0]
    meta = np.concatenate((dcards, sstrides))
    digits = np.empty(n, np.int64)
    _start_digits(begin, meta, 0, n, digits)
    idx = 0
    for j in range(n):
        idx += digits[j] * sstrides[j]
    for i in range(begin, end):
        dst[dst_off + i] = src[src_off + idx]
        idx = _advance(meta, 0, n, n, digits, idx)


@njit(**_JIT)
def multiply_range(dst, dst_off, factor, f_off, dcards, fstrides, begin, end):
    """dst[i] *= factor[projection of i]. Returns the largest resulting entry."""
    n = dcards.shape[0]
    meta = np.concatenate((dcards, fstrides))
    digits = np.empty(n, np.int64)
    return _multiply(dst, dst_off, factor, f_off, meta, 0, n, n, begin, end, digits)


@njit(**_JIT)
def reduce_range(vals, off, ev_strides, ev_cards, ev_states, begin, end):
    """Zero every entry whose digit for an observed variable differs from its state."""
    m = ev_strides.shape[0]
    for i in range(begin, end):
        for k in range(m):
            if (i // ev_strides[k]) % ev_cards[k] != ev_states[k]:
                vals[off + i] = 0.0
                break


@njit(**_JIT)
def divide_range(numer, n_off, denom, d_off, out, o_off, begin, end):
    """out[i] = numer[i] / denom[i] with 0/0 = 0. Returns an error code."""
    for i in range(begin, end):
        den = denom[d_off + i]
        num = numer[n_off + i]
        if den == 0.0:
            if num != 0.0:
                return POSITIVE_OVER_ZERO
            out[o_off + i] = 0.0
        else:
            out[o_off + i] = num / den
    return OK


# Recipe blob layout for a (separator, endpoint clique) pair, starting at its offset:
#   nk, ns, nc,
#   kept cards[nk], kept clique strides[nk],      separator variables
#   summed cards[ns], summed clique strides[ns],  clique-only variables
#   clique cards[nc], separator strides[nc]       0 where the clique variable is not in the separator


@njit(inline="always", **_JIT)
def _run_task(values, ratio, node_off, ratio_off, recipes, aux, tasks, t, d1, d2):
    kind = tasks[t, 0]
    node = tasks[t, 1]
    begin = tasks[t, 2]
    end = tasks[t, 3]
    a = tasks[t, 4]
    if kind == MARG:
        r = aux[a]
        src = aux[a + 1]
        nk = recipes[r]
        ns = recipes[r + 1]
        kc = r + 3
        sc = kc + 2 * nk
        sep_off = node_off[node]
        rof = ratio_off[node]
        _marg(values, node_off[src], ratio, rof, recipes, kc, kc + nk, nk, sc, sc + ns, ns, begin, end, d1, d2)
        # ratio holds the new separator table; swap it in and keep new/old in ratio
        for d in range(begin, end):
            new = ratio[rof + d]
            old = values[sep_off + d]
            values[sep_off + d] = new
            if old == 0.0:
                if new != 0.0:
                    return POSITIVE_OVER_ZERO, 0.0
                ratio[rof + d] = 0.0
            else:
                ratio[rof + d] = new / old
        return OK, 0.0
    if kind == ABSORB:
        k = aux[a]
        off = node_off[node]
        top = 0.0
        for q in range(k):
            r = aux[a + 1 + 2 * q]
            sep = aux[a + 2 + 2 * q]
            nc = recipes[r + 2]
            p = r + 3 + 2 * recipes[r] + 2 * recipes[r + 1]
            top = _multiply(values, off, ratio, ratio_off[sep], recipes, p, p + nc, nc, begin, end, d1)
        if k == 0:
            for i in range(begin, end):
                if values[off + i] > top:
                    top = values[off + i]
        return OK, top
    # REDUCE: aux holds m (stride, card, state) triples
    m = aux[a]
    off = node_off[node]
    for i in range(begin, end):
        for q in range(m):
            e = a + 1 + 3 * q
            if (i // aux[e]) % aux[e + 1] != aux[e + 2]:
                values[off + i] = 0.0
                break
    return OK, 0.0


@njit(**_JIT)
def run_tasks(values, ratio, node_off, ratio_off, recipes, aux, tasks, start, step, task_max, err, width):
    """Run tasks ``start, start + step, ...``; writes per-task maxima and error codes.

    ``width`` bounds the scope length of every table touched, sizing the
    odometer scratch shared by all tasks of this call.
    """
    d1 = np.empty(width, np.int64)
    d2 = np.empty(width, np.int64)
    for t in range(start, tasks.shape[0], step):
        code, top = _run_task(values, ratio, node_off, ratio_off, recipes, aux, tasks, t, d1, d2)
        task_max[t] = top
        if code != OK:
            err[t] = code
            return code
    return OK
