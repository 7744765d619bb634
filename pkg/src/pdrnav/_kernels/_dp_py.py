"""Pure-numpy DP kernels for DTW and discrete Frechet cost matrices.

Fallback twin of the compiled extension; identical cell semantics. The fill
runs over anti-diagonals so each sweep is a vectorized gather / scatter
instead of a per-cell Python loop.

Banded layout: row i stores columns j with |i - j| <= w at col = j - i + w,
width 2w+1, unreachable cells +inf.
"""

import numpy as np

BACKEND = "python"

_INF = np.inf


def _sweep(a, b, w, kind):
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    n, m = a.shape[0], b.shape[0]
    banded = w is not None
    W = (2 * w + 1) if banded else m
    D = np.full((n, W), _INF)
    Df = D.ravel()

    def col0(i, j):
        return j - i + w if banded else j

    D[0, col0(0, 0)] = float(np.sqrt(np.sum((a[0] - b[0]) ** 2)))

    for k in range(1, n + m - 1):
        i_lo = max(0, k - m + 1)
        i_hi = min(n - 1, k)
        if banded:
            i_lo = max(i_lo, -((w - k) // 2))  # ceil((k-w)/2)
            i_hi = min(i_hi, (k + w) // 2)
        if i_lo > i_hi:
            continue
        i = np.arange(i_lo, i_hi + 1)
        j = k - i
        d = np.sqrt(np.sum((a[i] - b[j]) ** 2, axis=1))
        col = (j - i + w) if banded else j
        idx = i * W + col

        if banded:
            ok_up = (i >= 1) & (col + 1 <= 2 * w)
            ok_left = (j >= 1) & (col - 1 >= 0)
        else:
            ok_up = i >= 1
            ok_left = j >= 1
        ok_diag = (i >= 1) & (j >= 1)

        up = Df[np.where(ok_up, idx - W + (1 if banded else 0), 0)]
        up[~ok_up] = _INF
        left = Df[np.where(ok_left, idx - 1, 0)]
        left[~ok_left] = _INF
        diag = Df[np.where(ok_diag, idx - W - (0 if banded else 1), 0)]
        diag[~ok_diag] = _INF

        best = np.minimum(np.minimum(up, left), diag)
        if kind == "dtw":
            Df[idx] = d + best
        else:
            Df[idx] = np.maximum(d, best)
    return D


def dtw_full(a, b):
    return _sweep(a, b, None, "dtw")


def dtw_banded(a, b, w):
    return _sweep(a, b, int(w), "dtw")


def frechet_full(a, b):
    return _sweep(a, b, None, "frechet")


def frechet_banded(a, b, w):
    return _sweep(a, b, int(w), "frechet")
