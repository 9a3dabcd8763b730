"""Closed C2 plane curves: representation, curvature, rotation index,
centroid, double-points, cleanness and lifts.

A :class:`ClosedCurve2` is parametrized over ``[0, 2*pi)`` and carries one
of two representations:

``fourier``
    ``alpha(t) = sum_n c_n * exp(i*n*t)`` with complex coefficients over
    integer frequencies ``-K..K``.  Position, velocity and acceleration are
    evaluated exactly.
``samples``
    ``N`` uniformly spaced points interpolated by a periodic cubic spline;
    derivatives come from the interpolant.

All operations in this module are pure functions of immutable inputs and
safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import minimize_scalar

from . import _kernels
from .errors import (
    ContinuumIntersection,
    IndexUnresolved,
    NonImmersed,
    NotNormalized,
)

TWO_PI = 2.0 * math.pi

# module-wide numeric policy
DEFAULT_QUAD_SAMPLES = 4096   # quadrature grid (even)
DEFAULT_GRID = 2048           # coarse grid for double-point search
ANGLE_TOLERANCE = 1e-3        # rad between tangent lines; below counts as tangency
MERGE_RADIUS_FACTOR = 1e-6    # times bounding-box diameter
CONTINUUM_FRACTION = 0.05     # coincident-sample fraction that flags a retraced arc
RICHARDSON_TOL = 1e-8
INDEX_SNAP_TOL = 0.05


def _as_xy(z: np.ndarray) -> np.ndarray:
    return np.stack([z.real, z.imag], axis=-1)


class ClosedCurve2:
    """Twice-differentiable closed plane curve on ``[0, 2*pi)``."""

    __slots__ = (
        "kind",
        "freqs",
        "coeffs",
        "points",
        "name",
        "_spl",
        "_spl_d1",
        "_spl_d2",
        "_cache",
    )

    def __init__(self, kind, *, freqs=None, coeffs=None, points=None, name=None):
        self.kind = kind
        self.name = name
        self._cache = {}
        if kind == "fourier":
            freqs = np.asarray(freqs, dtype=np.int64)
            coeffs = np.asarray(coeffs, dtype=np.complex128)
            if freqs.shape != coeffs.shape or freqs.ndim != 1:
                raise ValueError("freqs and coeffs must be matching 1-d arrays")
            order = np.argsort(freqs)
            self.freqs = freqs[order]
            self.coeffs = coeffs[order]
            self.points = None
            self._spl = self._spl_d1 = self._spl_d2 = None
        elif kind == "samples":
            pts = np.asarray(points, dtype=np.float64)
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 8:
                raise ValueError("points must be an (N, 2) array with N >= 8")
            self.points = pts
            self.freqs = self.coeffs = None
            grid = np.linspace(0.0, TWO_PI, len(pts) + 1)
            closed = np.vstack([pts, pts[:1]])
            self._spl = CubicSpline(grid, closed, bc_type="periodic", axis=0)
            self._spl_d1 = self._spl.derivative(1)
            self._spl_d2 = self._spl.derivative(2)
        else:
            raise ValueError(f"unknown representation {kind!r}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_fourier(cls, coeffs, name=None) -> "ClosedCurve2":
        """Build from ``{frequency: complex coefficient}`` or (freqs, coeffs)."""
        if isinstance(coeffs, dict):
            freqs = np.array(sorted(coeffs), dtype=np.int64)
            vals = np.array([coeffs[int(f)] for f in freqs], dtype=np.complex128)
        else:
            freqs, vals = coeffs
        return cls("fourier", freqs=freqs, coeffs=vals, name=name)

    @classmethod
    def from_samples(cls, points, name=None) -> "ClosedCurve2":
        return cls("samples", points=points, name=name)

    @classmethod
    def from_callable(cls, fn, n=4096, name=None) -> "ClosedCurve2":
        """Sample ``fn: t -> (x, y)`` on a uniform grid (sample representation)."""
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return cls.from_samples(np.asarray(fn(t), dtype=np.float64).reshape(n, 2), name=name)

    # -- evaluation --------------------------------------------------------

    def _fourier_deriv(self, t, order):
        t = np.mod(np.asarray(t, dtype=np.float64), TWO_PI)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        phases = np.exp(1j * tt[:, None] * self.freqs[None, :])
        c = self.coeffs * (1j * self.freqs) ** order
        z = phases @ c
        out = _as_xy(z)
        return out[0] if scalar else out

    def position(self, t):
        if self.kind == "fourier":
            return self._fourier_deriv(t, 0)
        return self._spl(np.mod(t, TWO_PI))

    def velocity(self, t):
        if self.kind == "fourier":
            return self._fourier_deriv(t, 1)
        return self._spl_d1(np.mod(t, TWO_PI))

    def acceleration(self, t):
        if self.kind == "fourier":
            return self._fourier_deriv(t, 2)
        return self._spl_d2(np.mod(t, TWO_PI))

    def evaluate(self, t):
        """Return the triple ``(position, velocity, acceleration)`` at ``t``."""
        return self.position(t), self.velocity(t), self.acceleration(t)

    # -- cached bulk samples ------------------------------------------------

    def grid(self, n: int) -> np.ndarray:
        return np.linspace(0.0, TWO_PI, n, endpoint=False)

    def sampled(self, n: int = DEFAULT_QUAD_SAMPLES):
        """Positions and velocities on the uniform ``n``-grid (memoized)."""
        key = ("sampled", n)
        if key not in self._cache:
            t = self.grid(n)
            self._cache[key] = (self.position(t), self.velocity(t))
        return self._cache[key]

    @property
    def length(self) -> float:
        if "length" not in self._cache:
            _, vel = self.sampled()
            speed = np.linalg.norm(vel, axis=1)
            self._cache["length"] = float(_periodic_simpson(speed))
        return self._cache["length"]

    @property
    def min_speed(self) -> float:
        if "min_speed" not in self._cache:
            _, vel = self.sampled()
            self._cache["min_speed"] = float(np.linalg.norm(vel, axis=1).min())
        return self._cache["min_speed"]

    @property
    def max_speed(self) -> float:
        if "max_speed" not in self._cache:
            _, vel = self.sampled()
            self._cache["max_speed"] = float(np.linalg.norm(vel, axis=1).max())
        return self._cache["max_speed"]

    @property
    def bbox_diameter(self) -> float:
        if "bbox_diameter" not in self._cache:
            pos, _ = self.sampled()
            span = pos.max(axis=0) - pos.min(axis=0)
            self._cache["bbox_diameter"] = float(np.hypot(span[0], span[1]))
        return self._cache["bbox_diameter"]

    def require_immersed(self, floor_factor: float = 1e-9):
        floor = floor_factor * max(self.max_speed, 1e-300)
        if self.min_speed <= floor:
            raise NonImmersed(
                f"min |alpha'| = {self.min_speed:.3e} <= {floor:.3e}; curve is not immersed"
            )

    # -- exact geometric transforms -----------------------------------------

    def reflected(self, center) -> "ClosedCurve2":
        """Point reflection ``x -> 2c - x`` of the curve."""
        cx, cy = float(center[0]), float(center[1])
        if self.kind == "fourier":
            freqs = self.freqs.copy()
            coeffs = -self.coeffs
            if 0 in freqs:
                coeffs[np.where(freqs == 0)[0][0]] += 2 * (cx + 1j * cy)
            else:
                freqs = np.concatenate([[0], freqs])
                coeffs = np.concatenate([[2 * (cx + 1j * cy)], coeffs])
            return ClosedCurve2("fourier", freqs=freqs, coeffs=coeffs, name=self.name)
        return ClosedCurve2.from_samples(
            2.0 * np.array([cx, cy]) - self.points, name=self.name
        )

    def shifted_param(self, rho: float) -> "ClosedCurve2":
        """Reparametrization ``t -> alpha(t + rho)``."""
        if self.kind == "fourier":
            coeffs = self.coeffs * np.exp(1j * self.freqs * rho)
            return ClosedCurve2("fourier", freqs=self.freqs, coeffs=coeffs, name=self.name)
        n = len(self.points)
        return ClosedCurve2.from_samples(self.position(self.grid(n) + rho), name=self.name)

    def transformed(self, angle: float = 0.0, offset=(0.0, 0.0)) -> "ClosedCurve2":
        """Rigid motion: rotation by ``angle`` about the origin, then translation."""
        w = complex(math.cos(angle), math.sin(angle))
        b = complex(float(offset[0]), float(offset[1]))
        if self.kind == "fourier":
            coeffs = self.coeffs * w
            freqs = self.freqs.copy()
            if 0 in freqs:
                coeffs[np.where(freqs == 0)[0][0]] += b
            else:
                freqs = np.concatenate([[0], freqs])
                coeffs = np.concatenate([[b], coeffs])
            return ClosedCurve2("fourier", freqs=freqs, coeffs=coeffs, name=self.name)
        rot = np.array([[w.real, -w.imag], [w.imag, w.real]])
        return ClosedCurve2.from_samples(
            self.points @ rot.T + np.array([b.real, b.imag]), name=self.name
        )

    def __repr__(self):
        if self.kind == "fourier":
            detail = f"{len(self.freqs)} modes"
        else:
            detail = f"{len(self.points)} samples"
        tag = f" {self.name!r}" if self.name else ""
        return f"<ClosedCurve2{tag} {self.kind}, {detail}>"


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def _periodic_simpson(values: np.ndarray, period: float = TWO_PI) -> float:
    """Composite Simpson over one period; values on a uniform grid, len even."""
    n = len(values)
    if n % 2:
        raise ValueError("periodic Simpson needs an even sample count")
    h = period / n
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    return float(h / 3.0 * np.dot(w, values))


def periodic_integral(values: np.ndarray, period: float = TWO_PI):
    """Simpson integral plus the Richardson (half-grid) defect.

    The defect is the absolute change when the step is doubled; values below
    :data:`RICHARDSON_TOL` indicate a converged quadrature.
    """
    full = _periodic_simpson(values, period)
    half = _periodic_simpson(values[::2], period)
    return full, abs(full - half)


# ---------------------------------------------------------------------------
# pointwise differential quantities
# ---------------------------------------------------------------------------


def evaluate(curve: ClosedCurve2, t):
    """Position, velocity and acceleration of ``curve`` at ``t`` (mod 2*pi)."""
    return curve.evaluate(t)


def geodesic_curvature(curve: ClosedCurve2, t, *, floor_factor: float = 1e-9):
    """Signed curvature ``det(alpha', alpha'') / |alpha'|**3``.

    Raises :class:`NonImmersed` when the speed at any requested parameter is
    below ``floor_factor * max_speed``.
    """
    vel = np.atleast_2d(curve.velocity(t))
    acc = np.atleast_2d(curve.acceleration(t))
    speed = np.linalg.norm(vel, axis=1)
    floor = floor_factor * max(curve.max_speed, 1e-300)
    if np.any(speed <= floor):
        raise NonImmersed(f"|alpha'(t)| <= {floor:.3e} at a requested parameter")
    kappa = (vel[:, 0] * acc[:, 1] - vel[:, 1] * acc[:, 0]) / speed**3
    return float(kappa[0]) if np.ndim(t) == 0 else kappa


def kappa_max(curve: ClosedCurve2, n: int = DEFAULT_QUAD_SAMPLES) -> float:
    """Max of ``|kappa_g|`` over the curve, grid-scanned then locally refined."""
    t = curve.grid(n)
    k = np.abs(geodesic_curvature(curve, t))
    h = TWO_PI / n
    # refine the distinct local maxima near the top of the scan
    order = np.argsort(k)[::-1]
    best = float(k.max())
    picked = []
    for idx in order[:32]:
        if any(min(abs(idx - p), n - abs(idx - p)) < 4 for p in picked):
            continue
        picked.append(int(idx))
        if len(picked) >= 6:
            break
    for idx in picked:
        lo, hi = t[idx] - h, t[idx] + h
        res = minimize_scalar(
            lambda s: -abs(geodesic_curvature(curve, s)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, float(-res.fun))
    return best


def rotation_index(curve: ClosedCurve2, n: int = DEFAULT_QUAD_SAMPLES):
    """Rotation index of the unit tangent map.

    Integrates ``kappa_g`` against arc length (``det(a', a'')/|a'|**2`` in the
    curve's own parameter) by composite Simpson.  Returns ``(omega, raw)``
    where ``omega`` is the nearest integer.  Raises :class:`IndexUnresolved`
    when ``raw`` is farther than 0.05 from every integer.
    """
    curve.require_immersed()
    t = curve.grid(n)
    vel = curve.velocity(t)
    acc = curve.acceleration(t)
    speed2 = np.einsum("ij,ij->i", vel, vel)
    integrand = (vel[:, 0] * acc[:, 1] - vel[:, 1] * acc[:, 0]) / speed2
    total, _defect = periodic_integral(integrand)
    raw = total / TWO_PI
    omega = int(round(raw))
    if abs(raw - omega) >= INDEX_SNAP_TOL:
        raise IndexUnresolved(
            f"index integral {raw:.6f} is {abs(raw - omega):.3f} from the nearest "
            f"integer; increase the sample count"
        )
    return omega, raw


def centroid(curve: ClosedCurve2, n: int = DEFAULT_QUAD_SAMPLES) -> np.ndarray:
    """Arc-length-weighted mean of the trace (multiplicity counted)."""
    t = curve.grid(n)
    pos = curve.position(t)
    speed = np.linalg.norm(curve.velocity(t), axis=1)
    total = _periodic_simpson(speed)
    mx = _periodic_simpson(pos[:, 0] * speed)
    my = _periodic_simpson(pos[:, 1] * speed)
    return np.array([mx, my]) / total


# ---------------------------------------------------------------------------
# arc-length machinery and unit-speed normalization
# ---------------------------------------------------------------------------


def arc_length_table(curve: ClosedCurve2, knots: int):
    """Cumulative arc length ``s(t)`` on ``knots+1`` uniform parameters."""
    t = np.linspace(0.0, TWO_PI, knots + 1)
    speed = np.linalg.norm(curve.velocity(t), axis=1)
    spl = CubicSpline(t, speed, bc_type="periodic")
    s = spl.antiderivative()(t)
    return t, s, spl


def arc_length_reparametrize(curve: ClosedCurve2, n: int = 1024) -> ClosedCurve2:
    """Unit-speed version of ``curve``: same image up to the homothety
    ``2*pi/L``, total length ``2*pi``, speed constant to about 1e-4 relative.

    Fourier curves come back as Fourier curves (trigonometric refit of the
    resampled points), sampled curves as sampled curves.  Arc length is
    inverted through a monotone cubic interpolant on ``8*n`` knots.
    """
    if n < 64:
        raise ValueError("n must be at least 64")
    curve.require_immersed()
    knots = max(8 * n, 1024)
    t_k, s_k, speed_spl = arc_length_table(curve, knots)
    length = s_k[-1]
    inv = PchipInterpolator(s_k, t_k)
    targets = np.arange(n) * (length / n)
    t_new = inv(targets)
    # two Newton polish steps against the speed antiderivative
    anti = speed_spl.antiderivative()
    for _ in range(2):
        t_new = t_new - (anti(np.clip(t_new, 0, TWO_PI)) - targets) / speed_spl(
            np.clip(t_new, 0, TWO_PI)
        )
    t_new = np.clip(t_new, 0.0, TWO_PI)
    pts = curve.position(t_new) * (TWO_PI / length)
    if curve.kind == "fourier":
        z = pts[:, 0] + 1j * pts[:, 1]
        c = np.fft.fft(z) / n
        f = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        keep = np.abs(f) <= n // 2 - 1
        c, f = c[keep], f[keep]
        mag = np.abs(c)
        keep = mag > 1e-14 * max(mag.max(), 1e-300)
        keep |= f == 0
        return ClosedCurve2("fourier", freqs=f[keep], coeffs=c[keep], name=curve.name)
    return ClosedCurve2.from_samples(pts, name=curve.name)


def unit_speed_defect(curve: ClosedCurve2, n: int = DEFAULT_QUAD_SAMPLES) -> float:
    """Relative deviation of the speed from 1 (0 for a perfect unit-speed curve)."""
    _, vel = curve.sampled(n)
    speed = np.linalg.norm(vel, axis=1)
    return float(np.max(np.abs(speed - 1.0)))


# ---------------------------------------------------------------------------
# double points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DoublePoint:
    """A self-intersection of the curve image.

    ``preimages`` holds the (sorted) parameters mapping to ``location``;
    ``pairwise_tangent_angles[i, j]`` is the angle in ``[0, pi]`` between the
    unit tangents at preimages ``i`` and ``j``.  The point is ``simple`` when
    it has exactly two preimages and ``clean`` when every pair of tangent
    lines meets at an angle of at least the cleanness tolerance.
    """

    location: np.ndarray
    preimages: np.ndarray
    pairwise_tangent_angles: np.ndarray
    simple: bool
    clean: bool

    @property
    def min_line_angle(self) -> float:
        k = len(self.preimages)
        if k < 2:
            return math.pi / 2
        ang = self.pairwise_tangent_angles
        iu = np.triu_indices(k, 1)
        return float(np.minimum(ang[iu], math.pi - ang[iu]).min())


def _newton_crossing(curve, s, t, step_cap):
    """2x2 Newton for alpha(s) = alpha(t); returns (s, t, residual)."""
    for _ in range(60):
        ps = curve.position(s)
        pt = curve.position(t)
        f = ps - pt
        resid = math.hypot(f[0], f[1])
        vs = curve.velocity(s)
        vt = curve.velocity(t)
        det = -vs[0] * vt[1] + vs[1] * vt[0]
        if abs(det) < 1e-30:
            break
        ds = (-vt[1] * f[0] + vt[0] * f[1]) / det
        dt = (-vs[1] * f[0] + vs[0] * f[1]) / det
        ds = max(-step_cap, min(step_cap, -ds))
        dt = max(-step_cap, min(step_cap, -dt))
        s += ds
        t += dt
        if abs(ds) < 1e-15 and abs(dt) < 1e-15:
            break
    f = curve.position(s) - curve.position(t)
    return s, t, math.hypot(f[0], f[1])


def _project_param(curve, s, q, iters=40):
    """1-d Newton bringing alpha(s) closest to the fixed point q."""
    for _ in range(iters):
        p = curve.position(s)
        v = curve.velocity(s)
        a = curve.acceleration(s)
        e = p - q
        g = e @ v
        gp = v @ v + e @ a
        if abs(gp) < 1e-30:
            break
        step = g / gp
        s -= step
        if abs(step) < 1e-15:
            break
    return s


def _minimize_pair(curve, s, t):
    """Alternating projection minimizing |alpha(s) - alpha(t)|."""
    for _ in range(80):
        s_new = _project_param(curve, s, curve.position(t), iters=4)
        t_new = _project_param(curve, t, curve.position(s_new), iters=4)
        if abs(s_new - s) < 1e-15 and abs(t_new - t) < 1e-15:
            s, t = s_new, t_new
            break
        s, t = s_new, t_new
    f = curve.position(s) - curve.position(t)
    return s, t, math.hypot(f[0], f[1])


def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def find_double_points(
    curve: ClosedCurve2,
    n: int = DEFAULT_GRID,
    *,
    merge_radius: float | None = None,
    angle_tolerance: float = ANGLE_TOLERANCE,
    continuum_fraction: float = CONTINUUM_FRACTION,
) -> list[DoublePoint]:
    """Locate every transversal or tangential self-intersection.

    Candidate segment pairs from an ``n``-point polygonal scan are refined by
    Newton iteration (crossings) or alternating projection (tangencies) down
    to residuals far below ``merge_radius``; preimages within the merge
    tolerance collapse into one :class:`DoublePoint`.

    Raises :class:`ContinuumIntersection` when the coincidence screen sees a
    retraced arc (more than ``continuum_fraction`` of the samples lying on
    top of a non-local piece of the curve).
    """
    curve.require_immersed()
    diam = curve.bbox_diameter
    if merge_radius is None:
        merge_radius = MERGE_RADIUS_FACTOR * diam
    t_grid = curve.grid(n)
    pts = curve.position(t_grid)
    h = TWO_PI / n

    kbar = kappa_max(curve, min(n, 2048))
    max_step_arc = curve.max_speed * h
    # preimages of one point sit at least pi/kappa_bar apart in arc length
    arc_bound = 0.5 * min(math.pi / max(kbar, 1e-12), curve.length / 4.0)
    excl = max(2, int(arc_bound / max(max_step_arc, 1e-300)))
    excl = min(excl, n // 4)

    coincidence_radius = 10.0 * merge_radius
    frac = _kernels.near_fraction(pts, excl, coincidence_radius)
    if frac > continuum_fraction:
        raise ContinuumIntersection(
            f"{frac:.1%} of samples coincide with a non-local arc; "
            f"the curve retraces itself"
        )

    prox = 2.0 * max_step_arc
    cands = _kernels.segment_candidates(pts, excl, prox)
    if cands is None:
        raise ContinuumIntersection("candidate pairs overflow; the curve retraces itself")
    ii, jj, kinds = cands

    # true arc-length distance along the curve, for same-branch rejection
    t_arc, s_arc, _ = arc_length_table(curve, max(4 * n, 1024))
    arc_of = PchipInterpolator(t_arc, s_arc)
    total_arc = float(s_arc[-1])

    def arc_dist(a: float, b: float) -> float:
        d = abs(float(arc_of(a)) - float(arc_of(b))) % total_arc
        return min(d, total_arc - d)

    # bucket neighbouring candidate pairs: one refinement per bucket suffices
    # (members converge to the same point); proper crossings win the slot
    buckets: dict[tuple[int, int], list[int]] = {}
    for i, j, kind in zip(ii.tolist(), jj.tolist(), kinds.tolist()):
        key = (i // 6, j // 6)
        b = buckets.get(key)
        if b is None:
            buckets[key] = [i, j, kind]
        elif kind == 1 and b[2] != 1:
            b[0], b[1], b[2] = i, j, kind

    accept = max(merge_radius, 1e-13 * diam)
    hits: list[tuple[float, float, np.ndarray]] = []
    for i, j, kind in buckets.values():
        s0 = t_grid[i] + 0.5 * h
        t0 = t_grid[j] + 0.5 * h
        if kind == 1:
            s, t, resid = _newton_crossing(curve, s0, t0, step_cap=4 * h)
            if resid > accept:
                s, t, resid = _minimize_pair(curve, s0, t0)
        else:
            s, t, resid = _minimize_pair(curve, s0, t0)
        if resid > accept:
            continue
        s %= TWO_PI
        t %= TWO_PI
        # distinct preimages of one point sit >= pi/kappa_bar apart in arc
        # length, so anything below half the bound collapsed onto one branch
        if arc_dist(s, t) < arc_bound:
            continue
        loc = 0.5 * (curve.position(s) + curve.position(t))
        hits.append((s, t, loc))

    if not hits:
        return []

    # union-find over hit locations
    m = len(hits)
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    locs = np.array([hit[2] for hit in hits])
    for a in range(m):
        for b in range(a + 1, m):
            if np.hypot(*(locs[a] - locs[b])) < 2.0 * merge_radius:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb

    groups: dict[int, list[int]] = {}
    for a in range(m):
        groups.setdefault(find(a), []).append(a)

    out = []
    param_tol = 1e-6
    for members in groups.values():
        params: list[float] = []
        for a in members:
            params.extend(hits[a][:2])
        params.sort()
        clusters: list[list[float]] = []
        for p in params:
            if clusters and (p - clusters[-1][-1]) < param_tol:
                clusters[-1].append(p)
            else:
                clusters.append([p])
        # wrap-around merge at 0 / 2*pi
        if len(clusters) > 1 and (TWO_PI - clusters[-1][-1] + clusters[0][0]) < param_tol:
            clusters[0] = [p - TWO_PI for p in clusters[-1]] + clusters[0]
            clusters.pop()
        pre = np.array(sorted(np.mean(c) % TWO_PI for c in clusters))
        pre[pre > TWO_PI - 1e-9] = 0.0
        pre = np.sort(pre)
        if len(pre) < 2:
            continue
        location = np.mean([hits[a][2] for a in members], axis=0)
        tangents = curve.velocity(pre)
        tangents /= np.linalg.norm(tangents, axis=1)[:, None]
        dots = np.clip(tangents @ tangents.T, -1.0, 1.0)
        angles = np.arccos(dots)
        np.fill_diagonal(angles, 0.0)
        k = len(pre)
        iu = np.triu_indices(k, 1)
        line_angles = np.minimum(angles[iu], math.pi - angles[iu])
        out.append(
            DoublePoint(
                location=location,
                preimages=pre,
                pairwise_tangent_angles=angles,
                simple=(k == 2),
                clean=bool(np.all(line_angles >= angle_tolerance)),
            )
        )
    out.sort(key=lambda dp: dp.preimages[0])
    return out


@dataclass(frozen=True)
class CleanReport:
    clean: bool
    double_points: list
    offending: list
    continuum: bool
    message: str


def is_clean(curve: ClosedCurve2, n: int = DEFAULT_GRID, **kw) -> tuple[bool, CleanReport]:
    """Whether every double-point of the curve is transversal.

    A retraced arc (:class:`ContinuumIntersection`) reports ``clean = False``
    with the ``continuum`` flag set instead of raising.
    """
    try:
        dps = find_double_points(curve, n, **kw)
    except ContinuumIntersection as exc:
        report = CleanReport(False, [], [], True, str(exc))
        return False, report
    bad = [dp for dp in dps if not dp.clean]
    ok = not bad
    msg = "clean" if ok else f"{len(bad)} tangential double-point(s)"
    return ok, CleanReport(ok, dps, bad, False, msg)


def min_preimage_separation(curve: ClosedCurve2, n: int = DEFAULT_GRID) -> float:
    """Smallest intrinsic circle distance between double-point preimages.

    Requires a unit-speed curve of length 2*pi (:class:`NotNormalized`
    otherwise); returns ``inf`` for embedded curves.
    """
    if unit_speed_defect(curve) > 1e-3 or abs(curve.length - TWO_PI) > 1e-3 * TWO_PI:
        raise NotNormalized(
            "curve must be unit-speed with length 2*pi; run arc_length_reparametrize"
        )
    dps = find_double_points(curve, n)
    best = math.inf
    for dp in dps:
        k = len(dp.preimages)
        for a in range(k):
            for b in range(a + 1, k):
                best = min(best, _circ_dist(dp.preimages[a], dp.preimages[b]))
    return best


def lift_is_embedded(
    curve: ClosedCurve2,
    n: int = DEFAULT_GRID,
    *,
    angle_tolerance: float = ANGLE_TOLERANCE,
) -> bool:
    """True when no two parameters share both position and unit tangent.

    Clean curves always lift to embedded curves in the unit tangent bundle;
    a retraced arc with aligned tangents does not.
    """
    try:
        dps = find_double_points(curve, n)
    except ContinuumIntersection:
        # brute screen on the grid: coincident non-local pairs with aligned tangents
        pts, vel = curve.sampled(n)
        tan = vel / np.linalg.norm(vel, axis=1)[:, None]
        r = 10.0 * MERGE_RADIUS_FACTOR * curve.bbox_diameter
        idx = np.arange(n)
        block = 512
        for lo in range(0, n, block):
            hi = min(lo + block, n)
            d2 = ((pts[lo:hi, None, :] - pts[None, :, :]) ** 2).sum(-1)
            sep = np.abs(idx[lo:hi, None] - idx[None, :])
            sep = np.minimum(sep, n - sep)
            near = (d2 < r * r) & (sep > max(2, n // 64))
            if not near.any():
                continue
            a, b = np.nonzero(near)
            dots = np.einsum("ij,ij->i", tan[lo + a], tan[b])
            if np.any(np.arccos(np.clip(dots, -1, 1)) < angle_tolerance):
                return False
        return True
    for dp in dps:
        k = len(dp.preimages)
        iu = np.triu_indices(k, 1)
        if np.any(dp.pairwise_tangent_angles[iu] < angle_tolerance):
            return False
    return True


# ---------------------------------------------------------------------------
# bundled analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveAnalysis:
    """Summary of the differential analysis of one closed curve."""

    length: float
    kappa_bar: float
    rotation_index: int
    raw_index_integral: float
    centroid: np.ndarray
    double_points: list
    is_clean: bool
    continuum: bool
    min_preimage_separation: float

    def to_dict(self):
        return {
            "length": self.length,
            "kappa_bar": self.kappa_bar,
            "rotation_index": self.rotation_index,
            "raw_index_integral": self.raw_index_integral,
            "centroid": [float(self.centroid[0]), float(self.centroid[1])],
            "double_points": [
                {
                    "location": [float(dp.location[0]), float(dp.location[1])],
                    "preimages": [float(p) for p in dp.preimages],
                    "simple": dp.simple,
                    "clean": dp.clean,
                    "min_line_angle": dp.min_line_angle,
                }
                for dp in self.double_points
            ],
            "is_clean": self.is_clean,
            "continuum": self.continuum,
            "min_preimage_separation": (
                self.min_preimage_separation
                if math.isfinite(self.min_preimage_separation)
                else None
            ),
        }


def analyze(
    curve: ClosedCurve2,
    n: int = DEFAULT_QUAD_SAMPLES,
    dp_samples: int = DEFAULT_GRID,
) -> CurveAnalysis:
    """Full curve analysis: length, curvature bound, index, centroid,
    double-points, cleanness and the normalized preimage separation."""
    curve.require_immersed()
    length = curve.length
    kbar = kappa_max(curve, n)
    omega, raw = rotation_index(curve, n)
    mu = centroid(curve, n)
    continuum = False
    try:
        dps = find_double_points(curve, dp_samples)
    except ContinuumIntersection:
        dps = []
        continuum = True
    clean = (not continuum) and all(dp.clean for dp in dps)

    if continuum:
        sep = math.nan
    elif not dps:
        sep = math.inf
    else:
        # map preimages through the arc-length function of the normalized curve
        knots = max(8 * dp_samples, 1024)
        t_k, s_k, _ = arc_length_table(curve, knots)
        scale = TWO_PI / s_k[-1]
        to_arc = PchipInterpolator(t_k, s_k * scale)
        sep = math.inf
        for dp in dps:
            arcs = to_arc(np.sort(dp.preimages))
            k = len(arcs)
            for a in range(k):
                for b in range(a + 1, k):
                    sep = min(sep, _circ_dist(float(arcs[a]), float(arcs[b])))
    # normalized curvature bound: kappa scales inversely with the homothety
    kbar_normalized = kbar * (length / TWO_PI)
    return CurveAnalysis(
        length=length,
        kappa_bar=kbar_normalized,
        rotation_index=omega,
        raw_index_integral=raw,
        centroid=mu,
        double_points=dps,
        is_clean=clean,
        continuum=continuum,
        min_preimage_separation=sep,
    )
