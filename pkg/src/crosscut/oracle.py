"""Independent brute-force verifiers.

Everything here cross-checks a fast-path algorithm by a structurally
different route: all-pairs scans instead of pruned candidate search,
bisection instead of Newton, angle unwrapping instead of curvature
quadrature, and closed-form sphere/cylinder sections for the slicing
experiments.  Oracles share nothing with the fast paths beyond curve
evaluation itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ._kernels import HAVE_NUMBA, hausdorff, njit
from .curves import TWO_PI, ClosedCurve2, DoublePoint
from .errors import ContinuumIntersection, StepTooCoarse

_BRUTE_CAP_FACTOR = 64


@dataclass(frozen=True)
class OracleReport:
    """Outcome of one fast-path-versus-oracle comparison."""

    subject: str
    fast_value: Any
    oracle_value: Any
    discrepancy: float
    tolerance: float
    passed: bool

    def to_dict(self):
        def _plain(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return {
            "subject": self.subject,
            "fast_value": _plain(self.fast_value),
            "oracle_value": _plain(self.oracle_value),
            "discrepancy": float(self.discrepancy),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
        }


# ---------------------------------------------------------------------------
# brute-force double points
# ---------------------------------------------------------------------------


@njit(cache=True)
def _all_pairs_scan(x, y, excl, prox):
    """Plain quadratic scan: proper crossings (kind 1) and near pairs (kind 2)."""
    n = x.shape[0]
    cap = _BRUTE_CAP_FACTOR * n
    ii = np.empty(cap, dtype=np.int64)
    jj = np.empty(cap, dtype=np.int64)
    kk = np.empty(cap, dtype=np.int64)
    m = 0
    prox2 = prox * prox
    for i in range(n):
        i2 = (i + 1) % n
        for j in range(i + 1, n):
            d = j - i
            if d > n - d:
                d = n - d
            if d <= excl:
                continue
            j2 = (j + 1) % n
            rx = x[i2] - x[i]
            ry = y[i2] - y[i]
            sx = x[j2] - x[j]
            sy = y[j2] - y[j]
            d1 = sx * (y[i] - y[j]) - sy * (x[i] - x[j])
            d2 = sx * (y[i2] - y[j]) - sy * (x[i2] - x[j])
            d3 = rx * (y[j] - y[i]) - ry * (x[j] - x[i])
            d4 = rx * (y[j2] - y[i]) - ry * (x[j2] - x[i])
            kind = 0
            if d1 * d2 < 0.0 and d3 * d4 < 0.0:
                kind = 1
            else:
                # endpoint-to-endpoint proximity is enough for a tangency seed
                best = (x[i] - x[j]) ** 2 + (y[i] - y[j]) ** 2
                t = (x[i] - x[j2]) ** 2 + (y[i] - y[j2]) ** 2
                if t < best:
                    best = t
                t = (x[i2] - x[j]) ** 2 + (y[i2] - y[j]) ** 2
                if t < best:
                    best = t
                t = (x[i2] - x[j2]) ** 2 + (y[i2] - y[j2]) ** 2
                if t < best:
                    best = t
                if best < prox2:
                    kind = 2
            if kind > 0:
                if m >= cap:
                    return ii, jj, kk, cap + 1
                ii[m] = i
                jj[m] = j
                kk[m] = kind
                m += 1
    return ii, jj, kk, m


def _all_pairs_scan_np(x, y, excl, prox):
    n = len(x)
    pts = np.stack([x, y], axis=1)
    nxt = np.roll(pts, -1, axis=0)
    idx = np.arange(n)
    out_i, out_j, out_k = [], [], []
    prox2 = prox * prox
    block = 256
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        a0 = pts[lo:hi, None, :]
        a1 = nxt[lo:hi, None, :]
        b0 = pts[None, :, :]
        b1 = nxt[None, :, :]
        r = a1 - a0
        s = b1 - b0
        d1 = s[..., 0] * (a0[..., 1] - b0[..., 1]) - s[..., 1] * (a0[..., 0] - b0[..., 0])
        d2 = s[..., 0] * (a1[..., 1] - b0[..., 1]) - s[..., 1] * (a1[..., 0] - b0[..., 0])
        d3 = r[..., 0] * (b0[..., 1] - a0[..., 1]) - r[..., 1] * (b0[..., 0] - a0[..., 0])
        d4 = r[..., 0] * (b1[..., 1] - a0[..., 1]) - r[..., 1] * (b1[..., 0] - a0[..., 0])
        proper = (d1 * d2 < 0) & (d3 * d4 < 0)
        e00 = ((a0 - b0) ** 2).sum(-1)
        e01 = ((a0 - b1) ** 2).sum(-1)
        e10 = ((a1 - b0) ** 2).sum(-1)
        e11 = ((a1 - b1) ** 2).sum(-1)
        near = np.minimum(np.minimum(e00, e01), np.minimum(e10, e11)) < prox2
        sep = np.abs(idx[lo:hi, None] - idx[None, :])
        sep = np.minimum(sep, n - sep)
        valid = (idx[None, :] > idx[lo:hi, None]) & (sep > excl)
        kind = np.where(proper, 1, np.where(near, 2, 0)) * valid
        a, b = np.nonzero(kind)
        out_i.extend((lo + a).tolist())
        out_j.extend(b.tolist())
        out_k.extend(kind[a, b].tolist())
    return (
        np.array(out_i, dtype=np.int64),
        np.array(out_j, dtype=np.int64),
        np.array(out_k, dtype=np.int64),
        len(out_i),
    )


def _segments_properly_cross(p0, p1, q0, q1) -> bool:
    s = q1 - q0
    r = p1 - p0
    d1 = s[0] * (p0[1] - q0[1]) - s[1] * (p0[0] - q0[0])
    d2 = s[0] * (p1[1] - q0[1]) - s[1] * (p1[0] - q0[0])
    d3 = r[0] * (q0[1] - p0[1]) - r[1] * (q0[0] - p0[0])
    d4 = r[0] * (q1[1] - p0[1]) - r[1] * (q1[0] - p0[0])
    return d1 * d2 < 0 and d3 * d4 < 0


def _bisect_crossing(curve, sa, sb, ta, tb, levels=48):
    """Subdivide both parameter intervals, descending into the crossing chord pair."""
    for _ in range(levels):
        if (sb - sa) < 1e-14 and (tb - ta) < 1e-14:
            break
        sm = 0.5 * (sa + sb)
        tm = 0.5 * (ta + tb)
        pts = curve.position(np.array([sa, sm, sb, ta, tm, tb]))
        found = False
        for (s0, s1, p0, p1) in ((sa, sm, pts[0], pts[1]), (sm, sb, pts[1], pts[2])):
            for (t0, t1, q0, q1) in ((ta, tm, pts[3], pts[4]), (tm, tb, pts[4], pts[5])):
                if _segments_properly_cross(p0, p1, q0, q1):
                    sa, sb, ta, tb = s0, s1, t0, t1
                    found = True
                    break
            if found:
                break
        if not found:
            break
    return 0.5 * (sa + sb), 0.5 * (ta + tb)


def _grid_refine_tangency(curve, sa, sb, ta, tb, levels=44):
    """Derivative-free shrinking 5x5 grid search for the closest pair."""
    k = 5
    for _ in range(levels):
        ss = np.linspace(sa, sb, k)
        tt = np.linspace(ta, tb, k)
        pp = curve.position(np.concatenate([ss, tt]))
        ps, pt = pp[:k], pp[k:]
        d2 = ((ps[:, None, :] - pt[None, :, :]) ** 2).sum(-1)
        a, b = np.unravel_index(np.argmin(d2), d2.shape)
        ws = (sb - sa) * 0.35
        wt = (tb - ta) * 0.35
        sa, sb = ss[a] - ws, ss[a] + ws
        ta, tb = tt[b] - wt, tt[b] + wt
        if ws < 1e-14 and wt < 1e-14:
            break
    s = 0.5 * (sa + sb)
    t = 0.5 * (ta + tb)
    return s, t, float(np.linalg.norm(curve.position(s) - curve.position(t)))


def brute_double_points(curve: ClosedCurve2, n: int = 4096) -> list[DoublePoint]:
    """All-pairs polygonal intersection scan with bisection refinement.

    Quadratic cost by design; agrees with the fast detector in count and in
    locations to far better than 1e-6 on all corpus curves.
    """
    if n < 1024:
        raise ValueError("oracle needs n >= 1024")
    curve.require_immersed()
    t_grid = np.linspace(0.0, TWO_PI, n, endpoint=False)
    pts = curve.position(t_grid)
    x = np.ascontiguousarray(pts[:, 0])
    y = np.ascontiguousarray(pts[:, 1])
    diam = curve.bbox_diameter
    h = TWO_PI / n
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    prox = 2.0 * float(seg.max())
    excl = 4

    # retraced-arc screen, implemented independently of the fast path
    coincide = 1e-5 * diam
    screen_excl = max(4, n // 16)
    blk = 512
    idx = np.arange(n)
    hitc = 0
    for lo in range(0, n, blk):
        hi = min(lo + blk, n)
        d2 = ((pts[lo:hi, None, :] - pts[None, :, :]) ** 2).sum(-1)
        sep = np.abs(idx[lo:hi, None] - idx[None, :])
        sep = np.minimum(sep, n - sep)
        d2[sep <= screen_excl] = np.inf
        hitc += int(np.any(d2 < coincide * coincide, axis=1).sum())
    if hitc / n > 0.05:
        raise ContinuumIntersection(
            f"oracle scan: {hitc / n:.1%} of samples retrace a non-local arc"
        )

    scan = _all_pairs_scan if HAVE_NUMBA else _all_pairs_scan_np
    ii, jj, kk, m = scan(x, y, excl, prox)
    if m > len(ii):
        raise ContinuumIntersection("oracle scan: candidate overflow")
    ii, jj, kk = ii[:m], jj[:m], kk[:m]

    # bucket neighbouring candidate pairs: all members of one bucket refine
    # to the same point, so one representative each is enough (crossings
    # preferred); duplicates collapse in the clustering below
    buckets: dict[tuple[int, int], dict] = {}
    for i, j, kind in zip(ii.tolist(), jj.tolist(), kk.tolist()):
        key = (i // 6, j // 6)
        b = buckets.get(key)
        if b is None:
            buckets[key] = {"i": i, "j": j, "kind": kind, "ilo": i, "ihi": i, "jlo": j, "jhi": j}
        else:
            b["ilo"] = min(b["ilo"], i)
            b["ihi"] = max(b["ihi"], i)
            b["jlo"] = min(b["jlo"], j)
            b["jhi"] = max(b["jhi"], j)
            if kind == 1 and b["kind"] != 1:
                b["i"], b["j"], b["kind"] = i, j, kind

    tol = 1e-6 * diam
    same_branch = 8 * h
    raw_hits = []
    for b in buckets.values():
        i, j, kind = b["i"], b["j"], b["kind"]
        if kind == 1:
            s, t = _bisect_crossing(curve, t_grid[i], t_grid[i] + h, t_grid[j], t_grid[j] + h)
            dist = float(np.linalg.norm(curve.position(s) - curve.position(t)))
        else:
            s, t, dist = _grid_refine_tangency(
                curve,
                t_grid[b["ilo"]] - 0.5 * h,
                t_grid[b["ihi"]] + 1.5 * h,
                t_grid[b["jlo"]] - 0.5 * h,
                t_grid[b["jhi"]] + 1.5 * h,
            )
        if dist > tol:
            continue
        s %= TWO_PI
        t %= TWO_PI
        d = abs(s - t) % TWO_PI
        if min(d, TWO_PI - d) < same_branch:
            continue
        raw_hits.append((s, t))

    if not raw_hits:
        return []

    # greedy parameter clustering, then grouping by image point
    params = sorted(p for pair in raw_hits for p in pair)
    clusters: list[list[float]] = []
    ptol = 1e-5
    for p in params:
        if clusters and p - clusters[-1][-1] < ptol:
            clusters[-1].append(p)
        else:
            clusters.append([p])
    if len(clusters) > 1 and (TWO_PI - clusters[-1][-1] + clusters[0][0]) < ptol:
        clusters[0] = [p - TWO_PI for p in clusters[-1]] + clusters[0]
        clusters.pop()
    reps = np.array([np.mean(c) % TWO_PI for c in clusters])
    reps[reps > TWO_PI - 1e-9] = 0.0
    locs = curve.position(reps)

    merge = 2e-6 * diam
    groups: list[list[int]] = []
    for a in range(len(reps)):
        placed = False
        for g in groups:
            if np.linalg.norm(locs[a] - locs[g[0]]) < merge:
                g.append(a)
                placed = True
                break
        if not placed:
            groups.append([a])

    out = []
    for g in groups:
        if len(g) < 2:
            continue
        pre = np.sort(reps[g])
        location = locs[g].mean(axis=0)
        tang = curve.velocity(pre)
        tang /= np.linalg.norm(tang, axis=1)[:, None]
        ang = np.arccos(np.clip(tang @ tang.T, -1, 1))
        np.fill_diagonal(ang, 0.0)
        k = len(pre)
        iu = np.triu_indices(k, 1)
        line = np.minimum(ang[iu], math.pi - ang[iu])
        out.append(
            DoublePoint(
                location=location,
                preimages=pre,
                pairwise_tangent_angles=ang,
                simple=(k == 2),
                clean=bool(np.all(line >= 1e-3)),
            )
        )
    out.sort(key=lambda dp: dp.preimages[0])
    return out


# ---------------------------------------------------------------------------
# tangent winding
# ---------------------------------------------------------------------------


def tangent_winding_oracle(curve: ClosedCurve2, n: int = 4096) -> int:
    """Degree of the unit tangent map by plain angle unwrapping."""
    if n < 1024:
        raise ValueError("oracle needs n >= 1024")
    t = np.linspace(0.0, TWO_PI, n + 1)
    vel = curve.velocity(t)
    ang = np.arctan2(vel[:, 1], vel[:, 0])
    steps = np.diff(ang)
    steps = (steps + math.pi) % (2 * math.pi) - math.pi
    if np.any(np.abs(steps) > math.pi / 2):
        raise StepTooCoarse(
            f"tangent turns by {np.abs(steps).max():.3f} rad in one step; raise n"
        )
    return int(round(steps.sum() / TWO_PI))


def winding_number(curve: ClosedCurve2, point, n: int = 4096) -> int:
    """Winding of the curve around a point off its image (angle unwrapping)."""
    t = np.linspace(0.0, TWO_PI, n + 1)
    rel = curve.position(t) - np.asarray(point, dtype=float)
    ang = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
    return int(round((ang[-1] - ang[0]) / TWO_PI))


# ---------------------------------------------------------------------------
# central-symmetry residual
# ---------------------------------------------------------------------------


def hausdorff_residual(curve: ClosedCurve2, center, n: int = 4096) -> float:
    """Two-sided Hausdorff distance between the image and its reflection
    through ``center``; zero exactly for a centrally symmetric image."""
    if n < 1024:
        raise ValueError("oracle needs n >= 1024")
    pts, _ = curve.sampled(n)
    c = np.asarray(center, dtype=float)
    return float(hausdorff(pts, 2.0 * c - pts))


# ---------------------------------------------------------------------------
# derivative consistency
# ---------------------------------------------------------------------------


def finite_difference_check(
    curve: ClosedCurve2,
    n: int = 256,
    step: float = 1e-4,
    tolerance: float | None = None,
) -> OracleReport:
    """Central finite differences against the analytic derivatives.

    Discrepancy is the maximum relative error over ``n`` parameters, scaled
    by the largest derivative magnitude.  Default tolerance: 1e-8 for Fourier
    curves, 1e-4 for spline curves.
    """
    if tolerance is None:
        tolerance = 1e-8 if curve.kind == "fourier" else 1e-4
    t = np.linspace(0.0, TWO_PI, n, endpoint=False)
    vel_fd = (curve.position(t + step) - curve.position(t - step)) / (2 * step)
    # second derivative from the velocity evaluator: the doubled central
    # difference of positions loses too much precision to cancellation
    acc_fd = (curve.velocity(t + step) - curve.velocity(t - step)) / (2 * step)
    vel = curve.velocity(t)
    acc = curve.acceleration(t)
    vscale = max(float(np.abs(vel).max()), 1e-300)
    ascale = max(float(np.abs(acc).max()), 1e-300)
    dv = float(np.abs(vel_fd - vel).max()) / vscale
    da = float(np.abs(acc_fd - acc).max()) / ascale
    disc = max(dv, da)
    return OracleReport(
        subject="derivatives",
        fast_value={"max_rel_velocity_err": dv, "max_rel_acceleration_err": da},
        oracle_value="central differences",
        discrepancy=disc,
        tolerance=tolerance,
        passed=disc < tolerance,
    )


# ---------------------------------------------------------------------------
# closed-form sections for the tilt experiments
# ---------------------------------------------------------------------------


def sphere_plane_section(center, radius: float, normal, base_point):
    """Exact circle cut by the plane through ``base_point`` with unit
    ``normal``: returns ``(circle_center, circle_radius)`` or ``None``."""
    c = np.asarray(center, dtype=float)
    u = np.asarray(normal, dtype=float)
    u = u / np.linalg.norm(u)
    p = np.asarray(base_point, dtype=float)
    d = float(u @ (c - p))
    if abs(d) >= radius:
        return None
    foot = c - d * u
    return foot, math.sqrt(radius * radius - d * d)


def sphere_tilt_center_exact(lam: float, u, v):
    """Center of the cut of the unit sphere by the plane through ``lam*u``
    normal to ``v``; the displacement from ``lam*u`` is exactly
    ``lam*sin(angle(u, v))``."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    sec = sphere_plane_section(np.zeros(3), 1.0, v, lam * u)
    if sec is None:
        return None
    return sec[0]
