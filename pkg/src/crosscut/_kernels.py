"""Hot numeric kernels: numba-jitted loops with pure-numpy fallbacks.

The jitted path is used by default.  Setting the environment variable
``CROSSCUT_DISABLE_NUMBA=1`` (before import) selects the numpy fallbacks,
which produce identical results.  ``benchmarks/bench_kernels.py`` compares
the two paths; both are exported here under explicit ``*_nb`` / ``*_np``
names so the benchmark does not need to re-import the package.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("CROSSCUT_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag not in ("", "0", "false", "no")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by CROSSCUT_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # identity decorator so the _nb names stay importable
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


# cap on reported candidate pairs; overflow signals a retraced arc upstream
_PAIR_CAP_FACTOR = 64


def _circ_sep(i: int, j: int, n: int) -> int:
    d = j - i
    if d < 0:
        d = -d
    return min(d, n - d)


# ---------------------------------------------------------------------------
# segment-pair candidate search (fast path of the double-point detector)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _pt_seg_d2(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 <= 0.0:
        ex = px - ax
        ey = py - ay
        return ex * ex + ey * ey
    t = ((px - ax) * dx + (py - ay) * dy) / l2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    ex = px - (ax + t * dx)
    ey = py - (ay + t * dy)
    return ex * ex + ey * ey


@njit(cache=True)
def _seg_candidates_nb_impl(x, y, arc, total_arc, arc_excl, prox):
    n = x.shape[0]
    cap = _PAIR_CAP_FACTOR * n
    ii = np.empty(cap, dtype=np.int64)
    jj = np.empty(cap, dtype=np.int64)
    kk = np.empty(cap, dtype=np.int64)
    m = 0
    prox2 = prox * prox
    for i in range(n):
        i2 = (i + 1) % n
        ax0 = x[i]
        ay0 = y[i]
        ax1 = x[i2]
        ay1 = y[i2]
        bxlo = min(ax0, ax1) - prox
        bxhi = max(ax0, ax1) + prox
        bylo = min(ay0, ay1) - prox
        byhi = max(ay0, ay1) + prox
        for j in range(i + 1, n):
            da = arc[j] - arc[i]
            if da > total_arc - da:
                da = total_arc - da
            if da <= arc_excl:
                continue
            j2 = (j + 1) % n
            bx0 = x[j]
            by0 = y[j]
            bx1 = x[j2]
            by1 = y[j2]
            if max(bx0, bx1) < bxlo or min(bx0, bx1) > bxhi:
                continue
            if max(by0, by1) < bylo or min(by0, by1) > byhi:
                continue
            # proper crossing via orientation signs
            rx = ax1 - ax0
            ry = ay1 - ay0
            sx = bx1 - bx0
            sy = by1 - by0
            d1 = sx * (ay0 - by0) - sy * (ax0 - bx0)
            d2 = sx * (ay1 - by0) - sy * (ax1 - bx0)
            d3 = rx * (by0 - ay0) - ry * (bx0 - ax0)
            d4 = rx * (by1 - ay0) - ry * (bx1 - ax0)
            kind = 0
            if d1 * d2 < 0.0 and d3 * d4 < 0.0:
                kind = 1
            else:
                dmin = _pt_seg_d2(ax0, ay0, bx0, by0, bx1, by1)
                t = _pt_seg_d2(ax1, ay1, bx0, by0, bx1, by1)
                if t < dmin:
                    dmin = t
                t = _pt_seg_d2(bx0, by0, ax0, ay0, ax1, ay1)
                if t < dmin:
                    dmin = t
                t = _pt_seg_d2(bx1, by1, ax0, ay0, ax1, ay1)
                if t < dmin:
                    dmin = t
                if dmin < prox2:
                    kind = 2
            if kind > 0:
                if m >= cap:
                    return ii, jj, kk, cap + 1
                ii[m] = i
                jj[m] = j
                kk[m] = kind
                m += 1
    return ii, jj, kk, m


def segment_candidates_nb(points: np.ndarray, excl: int, prox: float):
    x = np.ascontiguousarray(points[:, 0], dtype=np.float64)
    y = np.ascontiguousarray(points[:, 1], dtype=np.float64)
    ii, jj, kk, m = _seg_candidates_nb_impl(x, y, int(excl), float(prox))
    if m > ii.shape[0]:
        return None  # overflow: treat as retraced arc
    return ii[:m].copy(), jj[:m].copy(), kk[:m].copy()


def _exact_pair_tests(points: np.ndarray, ii, jj, prox: float):
    """Vectorized crossing/proximity classification of candidate pairs."""
    n = len(points)
    a0 = points[ii]
    a1 = points[(ii + 1) % n]
    b0 = points[jj]
    b1 = points[(jj + 1) % n]
    r = a1 - a0
    s = b1 - b0

    def cross(u, v):
        return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]

    d1 = cross(s, a0 - b0)
    d2 = cross(s, a1 - b0)
    d3 = cross(r, b0 - a0)
    d4 = cross(r, b1 - a0)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)

    def pt_seg_d2(p, a, b):
        d = b - a
        l2 = np.einsum("ij,ij->i", d, d)
        l2 = np.where(l2 <= 0, 1.0, l2)
        t = np.clip(np.einsum("ij,ij->i", p - a, d) / l2, 0.0, 1.0)
        e = p - (a + t[:, None] * d)
        return np.einsum("ij,ij->i", e, e)

    dmin = np.minimum.reduce(
        [
            pt_seg_d2(a0, b0, b1),
            pt_seg_d2(a1, b0, b1),
            pt_seg_d2(b0, a0, a1),
            pt_seg_d2(b1, a0, a1),
        ]
    )
    near = dmin < prox * prox
    kind = np.where(proper, 1, np.where(near, 2, 0))
    keep = kind > 0
    return ii[keep], jj[keep], kind[keep]


def segment_candidates_np(points: np.ndarray, excl: int, prox: float):
    """Grid-bucket pruning plus vectorized exact tests (numpy fallback)."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    nxt = np.roll(pts, -1, axis=0)
    mids = 0.5 * (pts + nxt)
    seg_len = np.linalg.norm(nxt - pts, axis=1)
    h = max(float(seg_len.max()), prox, 1e-300) * 1.5
    cells = np.floor(mids / h).astype(np.int64)
    buckets: dict[tuple[int, int], list[int]] = {}
    for idx, (cx, cy) in enumerate(map(tuple, cells)):
        buckets.setdefault((cx, cy), []).append(idx)
    cand_i: list[int] = []
    cand_j: list[int] = []
    offsets = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)]
    for (cx, cy), members in buckets.items():
        neigh: list[int] = []
        for dx, dy in offsets:
            neigh.extend(buckets.get((cx + dx, cy + dy), ()))
        for a in members:
            for b in neigh:
                if b <= a:
                    continue
                d = b - a
                if min(d, n - d) <= excl:
                    continue
                cand_i.append(a)
                cand_j.append(b)
    if not cand_i:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    ii = np.asarray(cand_i, dtype=np.int64)
    jj = np.asarray(cand_j, dtype=np.int64)
    # dedupe (a pair can be gathered from two cells)
    key = ii * n + jj
    _, order = np.unique(key, return_index=True)
    ii, jj = ii[order], jj[order]
    if len(ii) > _PAIR_CAP_FACTOR * n:
        return None
    out = _exact_pair_tests(pts, ii, jj, prox)
    if len(out[0]) > _PAIR_CAP_FACTOR * n:
        return None
    return out


# ---------------------------------------------------------------------------
# coincidence fraction (retraced-arc screen)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _near_fraction_nb_impl(x, y, excl, radius):
    n = x.shape[0]
    r2 = radius * radius
    hits = 0
    for i in range(n):
        found = False
        for j in range(n):
            d = j - i
            if d < 0:
                d = -d
            if d > n - d:
                d = n - d
            if d <= excl:
                continue
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx * dx + dy * dy < r2:
                found = True
                break
        if found:
            hits += 1
    return hits / n


def near_fraction_nb(points: np.ndarray, excl: int, radius: float) -> float:
    x = np.ascontiguousarray(points[:, 0], dtype=np.float64)
    y = np.ascontiguousarray(points[:, 1], dtype=np.float64)
    return float(_near_fraction_nb_impl(x, y, int(excl), float(radius)))


def near_fraction_np(points: np.ndarray, excl: int, radius: float) -> float:
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    r2 = radius * radius
    hits = 0
    idx = np.arange(n)
    block = 512
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        d2 = ((pts[lo:hi, None, :] - pts[None, :, :]) ** 2).sum(-1)
        sep = np.abs(idx[lo:hi, None] - idx[None, :])
        sep = np.minimum(sep, n - sep)
        d2[sep <= excl] = np.inf
        hits += int(np.any(d2 < r2, axis=1).sum())
    return hits / n


# ---------------------------------------------------------------------------
# symmetric Hausdorff distance between planar point sets
# ---------------------------------------------------------------------------


@njit(cache=True)
def _directed_hausdorff_nb(ax, ay, bx, by):
    na = ax.shape[0]
    nb = bx.shape[0]
    worst = 0.0
    for i in range(na):
        best = np.inf
        for j in range(nb):
            dx = ax[i] - bx[j]
            dy = ay[i] - by[j]
            d2 = dx * dx + dy * dy
            if d2 < best:
                best = d2
                if best <= worst:  # cannot raise the running max
                    break
        if best > worst:
            worst = best
    return np.sqrt(worst)


def hausdorff_nb(a: np.ndarray, b: np.ndarray) -> float:
    ax = np.ascontiguousarray(a[:, 0], dtype=np.float64)
    ay = np.ascontiguousarray(a[:, 1], dtype=np.float64)
    bx = np.ascontiguousarray(b[:, 0], dtype=np.float64)
    by = np.ascontiguousarray(b[:, 1], dtype=np.float64)
    return float(
        max(_directed_hausdorff_nb(ax, ay, bx, by), _directed_hausdorff_nb(bx, by, ax, ay))
    )


def _directed_hausdorff_np(a: np.ndarray, b: np.ndarray) -> float:
    worst = 0.0
    block = 512
    for lo in range(0, len(a), block):
        hi = min(lo + block, len(a))
        d2 = ((a[lo:hi, None, :] - b[None, :, :]) ** 2).sum(-1)
        worst = max(worst, float(d2.min(axis=1).max()))
    return float(np.sqrt(worst))


def hausdorff_np(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return max(_directed_hausdorff_np(a, b), _directed_hausdorff_np(b, a))


# ---------------------------------------------------------------------------
# selected implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    segment_candidates = segment_candidates_nb
    near_fraction = near_fraction_nb
    hausdorff = hausdorff_nb
else:
    segment_candidates = segment_candidates_np
    near_fraction = near_fraction_np
    hausdorff = hausdorff_np
