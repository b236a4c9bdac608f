"""Reference implementations written independently of the package code.

They favour plainness over speed: exact rational arithmetic, acos instead of
atan2, and a line-numbered interpreter for the hop-count steering routine.
"""

from __future__ import annotations

import math
from fractions import Fraction

E_ELEC = 5e-6
EPS_AMP = 1e-9


def tx(k, dist):
    return k * E_ELEC + k * EPS_AMP * dist * dist


def rx(k):
    return k * E_ELEC


def offset_deg(u, v, d):
    ax, ay = v[0] - u[0], v[1] - u[1]
    bx, by = d[0] - u[0], d[1] - u[1]
    cos = (ax * bx + ay * by) / (math.hypot(ax, ay) * math.hypot(bx, by))
    return math.degrees(math.acos(max(-1.0, min(1.0, cos))))


def compass_ladder(cands, u, d, start=30, step=10, stop=180, need=2):
    """Try every alpha of the ladder in turn; ``cands`` are ``(id, pos)`` pairs."""
    if not cands:
        return None
    alphas = list(range(start, stop, step)) + [stop]
    chosen = set()
    for alpha in alphas:
        chosen = {cid for cid, pos in cands if offset_deg(u, pos, d) <= alpha}
        if len(chosen) >= need:
            return chosen, alpha
    return (chosen, stop) if chosen else None


def mean_index(scores):
    """1-based position of the score closest to the mean, first one on ties."""
    q = [Fraction(s) for s in scores]
    mean = sum(q, Fraction(0)) / len(q)
    ranked = sorted(range(len(q)), key=lambda i: (abs(q[i] - mean), i))
    return ranked[0] + 1


# Hop-count steering, one entry per pseudocode line. ``regs`` holds the
# registers; each line returns the next program counter or None to stop.
_PROGRAM = {
    1: lambda r: 2 if r["known"] else 3,
    2: lambda r: 6,
    3: lambda r: r.update(out=1) or 4,
    4: lambda r: r.update(H=r["hops"], j=mean_index(r["scores"])) or None,
    6: lambda r: r.update(H=r["H0"], j=r["j0"]) or 7,
    7: lambda r: r.update(dh=r["H"] - r["hops"]) or 8,
    8: lambda r: r.update(index=r["j"] + r["dh"]) or 10,
    10: lambda r: 11 if r["index"] <= 0 else 14,
    11: lambda r: r.update(H=r["H"] - r["index"] + 1) or 12,
    12: lambda r: r.update(index=1) or 14,
    14: lambda r: 15 if r["index"] > r["m"] else 18,
    15: lambda r: r.update(H=r["H"] - r["index"] + r["m"]) or 16,
    16: lambda r: r.update(index=r["m"]) or 18,
    18: lambda r: r.update(out=r["index"]) or 19,
    19: lambda r: r.update(j=mean_index(r["scores"])) or None,
}


def steer(state, hops, scores):
    """Returns ``(chosen 1-based index, (H, j))`` for the stored ``state``."""
    regs = {"known": state is not None, "hops": hops, "scores": list(scores), "m": len(scores)}
    if state is not None:
        regs["H0"], regs["j0"] = state
    pc = 1
    while pc is not None:
        pc = _PROGRAM[pc](regs)
    return regs["out"], (regs["H"], regs["j"])


def gabriel_keep(u, pts: dict):
    """Brute-force Gabriel test using the angle criterion: v is dropped when
    some w sees segment uv at an obtuse (or right-plus) angle from inside."""
    kept = []
    for vid, v in pts.items():
        ok = True
        for wid, w in pts.items():
            if wid == vid:
                continue
            a = (u[0] - w[0], u[1] - w[1])
            b = (v[0] - w[0], v[1] - w[1])
            if a[0] * b[0] + a[1] * b[1] < 0:
                ok = False
                break
        if ok:
            kept.append(vid)
    return sorted(kept)


def proper_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    return (orient(p1, p2, q1) * orient(p1, p2, q2) < 0
            and orient(q1, q2, p1) * orient(q1, q2, p2) < 0)
