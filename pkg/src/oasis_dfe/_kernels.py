"""Compiled inner loop of the dual ratio test, used when numba is installed.

:func:`oasis_dfe.lp._crossings_numpy` is the reference this must agree with.
"""

from __future__ import annotations

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None


def _scan(g, h, tight, loose, zero):
    G, d = g.shape
    lam = np.full(G, np.inf)
    lam_loose = np.full(G, np.inf)
    start = np.zeros(G)
    slope = np.zeros(G)
    flips = np.empty(d)
    gains = np.empty(d)
    for i in range(G):
        f = 0.0
        s = 0.0
        k = 0
        for b in range(d):
            gb = g[i, b]
            hb = h[i, b]
            f += abs(gb)
            s += abs(hb)
            if hb != 0.0:
                t = -gb / hb
                if t > 0.0:
                    # opposite signs: contributes -|h| until the flip at t
                    s -= 2.0 * abs(hb)
                    j = k
                    while j > 0 and flips[j - 1] > t:
                        flips[j] = flips[j - 1]
                        gains[j] = gains[j - 1]
                        j -= 1
                    flips[j] = t
                    gains[j] = 2.0 * abs(hb)
                    k += 1
        at = 0.0
        found_tight = False
        for seg in range(k + 1):
            end = flips[seg] if seg < k else np.inf
            cap = end * (1.0 + 1e-12) + 1e-15
            if s > zero:
                if not found_tight:
                    x = at + max(tight[i] - f, 0.0) / s
                    if x <= cap:
                        lam[i] = x
                        start[i] = at
                        slope[i] = s
                        found_tight = True
                x = at + max(loose[i] - f, 0.0) / s
                if x <= cap:
                    lam_loose[i] = x
                    break
            if seg < k:
                f += s * (end - at)
                at = end
                s += gains[seg]
    return lam, lam_loose, start, slope


def _signs(g, h, at):
    d = g.shape[0]
    out = np.empty(d)
    for b in range(d):
        gb = g[b]
        hb = h[b]
        if hb != 0.0 and -gb / hb > 0.0 and -gb / hb <= at:
            out[b] = 1.0 if hb > 0.0 else -1.0
        elif gb != 0.0:
            out[b] = 1.0 if gb > 0.0 else -1.0
        else:
            out[b] = 1.0 if hb >= 0.0 else -1.0
    return out


if numba is not None:
    scan = numba.njit(cache=True, nogil=True)(_scan)
    signs = numba.njit(cache=True, nogil=True)(_signs)
else:  # pragma: no cover
    scan = signs = None
