"""Moment evaluation for zero-mean Gaussian twin-beam states.

Computes normal-ordered factorial moments

    E(n, m) = < prod_j s+(x_j) prod_k i+(y_k) prod_k i(y_k) prod_j s(x_j) >

summed over all frequency arguments, given the three second-moment
kernels of the state.  Wick's theorem turns the expectation into a sum
over perfect pairings of the 2(n+m) operators; because every creator
stands left of every annihilator, no commutator terms appear and the
only nonzero contractions are

    < s+(x) s(x') >  = ns[x', x]
    < i+(y) i(y') >  = ni[y', y]
    < i(y)  s(x)  >  = m[x, y]
    < s+(x) i+(y) >  = conj(m)[x, y]

(both number kernels are stored with the annihilator argument on the
rows, the usual first-order-coherence orientation).

Each operator argument appears in exactly two operators, so every
pairing factorizes into closed index cycles, and each cycle is the
trace of an ordered product of the kernels (possibly transposed).  The
pairing/cycle structure depends only on (n, m) and is cached; cycle
traces are memoized per call under a canonical key invariant to
rotation and reversal of the cycle.

Everything is enumerated and summed in a fixed order, so results are
bit-reproducible for identical inputs.
"""

from __future__ import annotations

import numpy as np

__all__ = ["matching_moment", "MAX_TOTAL_ORDER"]

# hard guard: pairing count grows factorially with n+m
MAX_TOTAL_ORDER = 5

# operator species, in slot order: signal/idler creators, then
# idler/signal annihilators (normal order)
_SC, _IC, _IA, _SA = 0, 1, 2, 3

# kernel ids
_NS, _NI, _M, _MC = 0, 1, 2, 3

# unordered species pairs with a nonzero contraction
_OK = np.zeros((4, 4), dtype=bool)
for _a, _b in ((_SC, _SA), (_IC, _IA), (_IA, _SA), (_SC, _IC)):
    _OK[_a, _b] = _OK[_b, _a] = True

# (species at tail, species at head) -> (kernel, transposed?) such that
# row index of the used matrix belongs to the tail slot's argument
_EDGE = {
    (_SC, _SA): (_NS, True),
    (_SA, _SC): (_NS, False),
    (_IC, _IA): (_NI, True),
    (_IA, _IC): (_NI, False),
    (_SA, _IA): (_M, False),
    (_IA, _SA): (_M, True),
    (_SC, _IC): (_MC, False),
    (_IC, _SC): (_MC, True),
}

# (n, m) -> tuple of pairings, each a tuple of canonical cycles
_STRUCTURE: dict = {}


def _slots(n: int, m: int):
    """Slot list [(species, variable)]; variables 0..n-1 signal, n..n+m-1 idler."""
    out = []
    out += [(_SC, j) for j in range(n)]
    out += [(_IC, n + k) for k in range(m)]
    out += [(_IA, n + k) for k in range(m)]
    out += [(_SA, j) for j in range(n)]
    return out


def _pairings(species):
    total = len(species)
    partner = [-1] * total
    found = []

    def rec(i):
        while i < total and partner[i] >= 0:
            i += 1
        if i == total:
            found.append(tuple(partner))
            return
        for j in range(i + 1, total):
            if partner[j] < 0 and _OK[species[i], species[j]]:
                partner[i] = j
                partner[j] = i
                rec(i + 1)
                partner[i] = -1
                partner[j] = -1

    rec(0)
    return found


def _canonical(cycle):
    """Cheapest representative over rotations and orientation reversal."""
    best = None
    rev = tuple((k, not t) for k, t in reversed(cycle))
    for cand in (cycle, rev):
        for r in range(len(cand)):
            rot = cand[r:] + cand[:r]
            if best is None or rot < best:
                best = rot
    return best


def _cycles(slots, partner, var_slots):
    visited = [False] * len(slots)
    cycles = []
    for start in range(len(slots)):
        if visited[start]:
            continue
        path = []
        cur = start
        while not visited[cur]:
            visited[cur] = True
            nxt = partner[cur]
            path.append(_EDGE[(slots[cur][0], slots[nxt][0])])
            visited[nxt] = True
            a, b = var_slots[slots[nxt][1]]
            cur = b if a == nxt else a
        cycles.append(_canonical(tuple(path)))
    return tuple(sorted(cycles))


def _structure(n: int, m: int):
    key = (n, m)
    if key not in _STRUCTURE:
        slots = _slots(n, m)
        species = [s for s, _ in slots]
        var_slots = {}
        for idx, (_, var) in enumerate(slots):
            var_slots.setdefault(var, []).append(idx)
        _STRUCTURE[key] = tuple(
            _cycles(slots, p, var_slots) for p in _pairings(species)
        )
    return _STRUCTURE[key]


def _cycle_trace(cycle, mats):
    first, flag = cycle[0]
    acc = mats[first].T if flag else mats[first]
    for kern, t in cycle[1:]:
        acc = acc @ (mats[kern].T if t else mats[kern])
    return complex(np.trace(acc))


def matching_moment(ns, ni, m, n: int, order_m: int) -> complex:
    """Normal-ordered moment E(n, order_m) from the three kernels."""
    if n < 0 or order_m < 0 or n + order_m < 1:
        raise ValueError("need non-negative orders with n + m >= 1")
    if n + order_m > MAX_TOTAL_ORDER:
        raise ValueError(
            f"moment order n + m = {n + order_m} exceeds the supported "
            f"maximum {MAX_TOTAL_ORDER} (pairing count grows factorially)"
        )
    mats = {
        _NS: np.asarray(ns),
        _NI: np.asarray(ni),
        _M: np.asarray(m),
        _MC: np.conj(np.asarray(m)),
    }
    trace_cache: dict = {}
    total = 0.0 + 0.0j
    for pairing in _structure(n, order_m):
        term = 1.0 + 0.0j
        for cyc in pairing:
            tr = trace_cache.get(cyc)
            if tr is None:
                tr = _cycle_trace(cyc, mats)
                trace_cache[cyc] = tr
            term *= tr
        total += term
    return total
