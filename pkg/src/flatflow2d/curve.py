"""Closed planar curves sampled at uniform arclength, and normal graphs over them.

Conventions
-----------
Nodes run counterclockwise.  ``tangent`` is the unit vector in the direction of
increasing node index, ``normal`` is the outward unit normal (the tangent turned
clockwise by a quarter turn) and ``curvature`` is positive on convex curves, so
that ``d tangent/ds = -kappa * normal`` and ``d normal/ds = kappa * tangent``.
"""

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import splev, splprep
from scipy.spatial import cKDTree

from . import spectral
from .errors import DomainError, OutOfTubeError, ValidationError

MIN_NODES = 16


# ---------------------------------------------------------------------------
# geometry of raw samples


def frame_of_samples(points):
    """Tangent, outward normal, curvature and speed of a smooth periodic sample set.

    The samples may be taken at any uniform value of a periodic parameter
    ``t in [0, 2 pi)``; speed is ``|dX/dt|``.
    """
    d1 = spectral.derivative(points, 1)
    d2 = spectral.derivative(points, 2)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    tangent = d1 / speed[:, None]
    normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1)
    kappa = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
    return tangent, normal, kappa, speed


def signed_area(points):
    """Enclosed area from the trigonometric interpolant, 1/2 closed integral of x dy - y dx."""
    d1 = spectral.derivative(points, 1)
    integrand = points[:, 0] * d1[:, 1] - points[:, 1] * d1[:, 0]
    return 0.5 * spectral.integrate_periodic(integrand, 2 * np.pi)


def shoelace_area(points):
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _orient(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (
        c[..., 0] - a[..., 0]
    )


def self_intersections(points):
    """Index pairs of non-adjacent polygon edges that intersect.

    Broad phase pairs edges whose midpoints are within one maximal edge length
    (a kd-tree query, O(n log n)); narrow phase is the orientation test.
    """
    p = np.asarray(points, dtype=float)
    n = len(p)
    q = np.roll(p, -1, axis=0)
    mid = 0.5 * (p + q)
    seg_len = np.hypot(*(q - p).T)
    pairs = cKDTree(mid).query_pairs(float(seg_len.max()) * (1 + 1e-9), output_type="ndarray")
    if len(pairs) == 0:
        return pairs
    i, j = pairs[:, 0], pairs[:, 1]
    gap = np.abs(i - j)
    keep = (gap != 1) & (gap != n - 1)
    i, j = i[keep], j[keep]
    a, b, c, d = p[i], q[i], p[j], q[j]
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    hit = (o1 * o2 <= 0) & (o3 * o4 <= 0)
    return np.stack([i[hit], j[hit]], axis=1)


def is_simple(points):
    return len(self_intersections(points)) == 0


# ---------------------------------------------------------------------------
# the curve type


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """Counterclockwise closed curve sampled at uniform arclength.

    Use the constructors ``circle``, ``ellipse``, ``from_points`` or
    ``from_parametric`` rather than passing nodes that are not already
    uniformly spaced.
    """

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise DomainError("nodes must have shape (n, 2)")
        if len(nodes) < MIN_NODES:
            raise DomainError(f"a closed curve needs at least {MIN_NODES} nodes")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_parametric(cls, samples, n, validate=True):
        """Resample a smooth closed curve given at uniform parameter values."""
        samples = np.asarray(samples, dtype=float)
        if signed_area(samples) < 0:
            samples = np.roll(samples[::-1], 1, axis=0)
        nodes, _ = spectral.resample_arclength(samples, n)
        curve = cls(nodes)
        if validate:
            curve.validate()
        return curve

    @classmethod
    def from_points(cls, points, n, validate=True):
        """Fit a closed curve through a simple closed polyline.

        Nearly equispaced input is read as samples of a trigonometric
        interpolant (spectrally accurate on smooth data).  Irregular input
        goes through a periodic cubic spline in chord-length parameter first.
        """
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DomainError("points must have shape (m, 2)")
        if len(pts) > 1 and np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < 8:
            raise DomainError("need at least 8 distinct points")
        if not is_simple(pts):
            raise ValidationError("input polyline self-intersects")
        chords = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
        if np.min(chords) == 0:
            raise DomainError("repeated consecutive points")
        if np.max(chords) / np.min(chords) > 2.0:
            closed = np.vstack([pts, pts[:1]])
            tck, _ = splprep(closed.T, s=0, per=1)
            m = max(8 * n, 8 * len(pts))
            u = np.arange(m) / m
            pts = np.stack(splev(u, tck), axis=1)
        return cls.from_parametric(pts, n, validate=validate)

    @classmethod
    def circle(cls, radius, n, center=(0.0, 0.0)):
        t = 2 * np.pi * np.arange(n) / n
        pts = np.stack([radius * np.cos(t), radius * np.sin(t)], axis=1) + np.asarray(center)
        return cls(pts)

    @classmethod
    def ellipse(cls, a, b, n, center=(0.0, 0.0)):
        m = max(4 * n, 1024)
        t = 2 * np.pi * np.arange(m) / m
        pts = np.stack([a * np.cos(t), b * np.sin(t)], axis=1) + np.asarray(center)
        return cls.from_parametric(pts, n)

    @classmethod
    def polar(cls, radius_fn, n, oversample=8):
        """Star-shaped curve r = radius_fn(theta)."""
        m = max(oversample * n, 1024)
        t = 2 * np.pi * np.arange(m) / m
        r = radius_fn(t)
        return cls.from_parametric(np.stack([r * np.cos(t), r * np.sin(t)], axis=1), n)

    # -- validation -------------------------------------------------------

    def validate(self):
        if self.area <= 0:
            raise ValidationError("curve must be counterclockwise")
        if not is_simple(self.nodes):
            raise ValidationError("curve self-intersects")
        return self

    @cached_property
    def spacing_defect(self):
        """Relative spread of the node interpolant's speed.

        Zero for exact uniform arclength on a resolved curve; on an
        under-resolved curve it measures aliasing rather than resampling error.
        """
        return float(np.ptp(self._frame[3]) / np.mean(self._frame[3]))

    # -- cached geometry --------------------------------------------------

    @property
    def n(self):
        return len(self.nodes)

    @cached_property
    def _frame(self):
        return frame_of_samples(self.nodes)

    @property
    def tangent(self):
        return self._frame[0]

    @property
    def normal(self):
        return self._frame[1]

    @property
    def curvature(self):
        return self._frame[2]

    @cached_property
    def length(self):
        return float(np.mean(self._frame[3]) * 2 * np.pi)

    @property
    def ds(self):
        return self.length / self.n

    @cached_property
    def area(self):
        return float(signed_area(self.nodes))

    @cached_property
    def arclength(self):
        return np.arange(self.n) * self.ds

    @cached_property
    def sigma(self):
        """Half-width of the tube in which projection onto the curve is smooth."""
        return 0.5 * ubc_radius(self)

    @cached_property
    def diameter(self):
        from scipy.spatial.distance import pdist

        return float(pdist(self.nodes[:: max(1, self.n // 256)]).max())

    # -- calculus ---------------------------------------------------------

    def d_ds(self, f, order=1):
        """Arclength derivative (spectral, exact for band-limited fields)."""
        return spectral.derivative(f, order, period=self.length, axis=0)

    def integrate(self, f):
        return float(np.sum(f) * self.ds)

    def evaluate(self, t, orders=(0,)):
        """Interpolated position (and parameter derivatives) at parameter ``t``."""
        return spectral.evaluate_with_derivatives(self.nodes, t, orders)

    def parameter(self, i):
        return 2 * np.pi * np.asarray(i) / self.n

    def upsample(self, factor):
        """Nodes of the trigonometric interpolant on a ``factor`` times finer grid."""
        m = self.n * factor
        return spectral.evaluate(self.nodes, 2 * np.pi * np.arange(m) / m)

    # -- serialization ----------------------------------------------------

    def to_json(self):
        """Snapshot string with 17-significant-digit floats."""
        fmt = lambda x: format(float(x), ".17g")  # noqa: E731
        nodes = ",".join(f"[{fmt(x)},{fmt(y)}]" for x, y in self.nodes)
        return (
            f'{{"n": {self.n}, "nodes": [{nodes}], '
            f'"length": {fmt(self.length)}, "area": {fmt(self.area)}}}'
        )

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        curve = cls(np.asarray(data["nodes"], dtype=float))
        if curve.n != data.get("n", curve.n):
            raise ValidationError("node count does not match 'n'")
        return curve

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())


# ---------------------------------------------------------------------------
# scalar fields on a curve


def aniso_curvature(E, a):
    """kappa^phi = g(nu) kappa at each node."""
    return a.mobility_g(E.normal) * E.curvature


def aniso_perimeter(E, a):
    return E.integrate(a.eval(E.normal))


def gauss_bonnet(E, a):
    """Integral of kappa^phi phi(nu); the same constant for every closed convex-or-not simple curve."""
    return E.integrate(aniso_curvature(E, a) * a.eval(E.normal))


def tangential_derivative(E, f, order=1):
    if order not in (1, 2, 3, 4):
        raise DomainError("order must be in 1..4")
    return E.d_ds(np.asarray(f, dtype=float), order)


# ---------------------------------------------------------------------------
# tube radius and distances


def ubc_radius(E):
    """Lower estimate of the uniform-ball radius.

    The smaller of ``1/max|kappa|`` and half the shortest chord between nodes
    whose arclength separation is at least ``pi/max|kappa|`` (pairs closer
    along the curve cannot witness a narrowing neck).
    """
    kmax = float(np.max(np.abs(E.curvature)))
    r_curv = 1.0 / kmax if kmax > 0 else np.inf
    min_sep = int(np.ceil((np.pi / kmax) / E.ds)) if kmax > 0 else E.n // 2
    min_sep = min(min_sep, E.n // 2)
    search = 2 * r_curv if np.isfinite(r_curv) else E.diameter
    pairs = cKDTree(E.nodes).query_pairs(search, output_type="ndarray")
    r_gap = np.inf
    if len(pairs):
        sep = np.abs(pairs[:, 0] - pairs[:, 1])
        sep = np.minimum(sep, E.n - sep)
        pairs = pairs[sep >= min_sep]
        if len(pairs):
            diff = E.nodes[pairs[:, 0]] - E.nodes[pairs[:, 1]]
            r_gap = 0.5 * float(np.min(np.hypot(diff[:, 0], diff[:, 1])))
    return float(min(r_curv, r_gap))


def _point_polyline_distance(points, poly):
    """Distance from each point to a closed polyline, using the 4 nearest vertices' edges."""
    tree = cKDTree(poly)
    k = min(4, len(poly))
    _, idx = tree.query(points, k=k)
    m = len(poly)
    best = np.full(len(points), np.inf)
    for col in range(k):
        for shift in (0, -1):
            i0 = (idx[:, col] + shift) % m
            a = poly[i0]
            b = poly[(i0 + 1) % m]
            ab = b - a
            t = np.einsum("ij,ij->i", points - a, ab) / np.einsum("ij,ij->i", ab, ab)
            t = np.clip(t, 0.0, 1.0)
            foot = a + t[:, None] * ab
            best = np.minimum(best, np.hypot(*(points - foot).T))
    return best


def hausdorff(A, B, upsample=4):
    """Symmetric Hausdorff distance between two closed curves.

    Points of each curve (refined ``upsample`` times on its interpolant) are
    projected by Newton's method onto the other curve's trigonometric
    interpolant, so chord sagitta does not bias small distances.  Raw point
    arrays are compared as polylines.
    """
    if not isinstance(A, ClosedCurve) or not isinstance(B, ClosedCurve):
        pa = A.upsample(upsample) if isinstance(A, ClosedCurve) else np.asarray(A, float)
        pb = B.upsample(upsample) if isinstance(B, ClosedCurve) else np.asarray(B, float)
        return float(
            max(_point_polyline_distance(pa, pb).max(), _point_polyline_distance(pb, pa).max())
        )
    if A.n == B.n and np.array_equal(A.nodes, B.nodes):
        return 0.0
    d_ab = np.abs(_project_many(B, A.upsample(upsample))[1]).max()
    d_ba = np.abs(_project_many(A, B.upsample(upsample))[1]).max()
    return float(max(d_ab, d_ba))


def project(E, x):
    """Foot point on the curve and signed distance (negative inside).

    Raises ``OutOfTubeError`` when ``|d| >= sigma_E``.
    """
    x = np.asarray(x, dtype=float)
    t, d = _project_many(E, x[None, :])
    foot = E.evaluate(t)[0][0]
    if abs(d[0]) >= E.sigma * (1 - 1e-9):
        raise OutOfTubeError(f"point is at distance {abs(d[0]):.6g} >= sigma {E.sigma:.6g}")
    return foot, float(d[0])


def _project_many(E, pts, iters=30):
    """Foot parameters and signed distances by nearest node plus Newton on the interpolant."""
    _, i0 = cKDTree(E.nodes).query(pts)
    t = E.parameter(i0).astype(float)
    for _ in range(iters):
        x, x1, x2 = E.evaluate(t, orders=(0, 1, 2))
        r = x - pts
        f = np.einsum("ij,ij->i", r, x1)
        fp = np.einsum("ij,ij->i", x1, x1) + np.einsum("ij,ij->i", r, x2)
        step = f / fp
        step = np.clip(step, -np.pi / E.n * 4, np.pi / E.n * 4)
        t = t - step
        if np.max(np.abs(step)) < 1e-15:
            break
    x, x1 = E.evaluate(t, orders=(0, 1))
    sp = np.hypot(x1[:, 0], x1[:, 1])
    nu = np.stack([x1[:, 1], -x1[:, 0]], axis=1) / sp[:, None]
    d = np.einsum("ij,ij->i", pts - x, nu)
    return np.mod(t, 2 * np.pi), d


# ---------------------------------------------------------------------------
# normal graphs


@dataclass(frozen=True, eq=False)
class HeightField:
    """Scalar heights psi on the nodes of a reference curve, describing x + psi(x) nu(x)."""

    reference: ClosedCurve
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.reference.n,):
            raise DomainError("height field must have one value per reference node")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if np.max(np.abs(v)) >= self.reference.sigma:
            raise DomainError(
                f"|psi|_inf = {np.max(np.abs(v)):.4g} exceeds the tube half-width "
                f"{self.reference.sigma:.4g}"
            )

    @property
    def psi(self):
        return self.values

    @cached_property
    def dpsi(self):
        return self.reference.d_ds(self.values, 1)

    def points(self):
        """Lifted nodes x_i + psi_i nu_i in reference-node correspondence."""
        E = self.reference
        return E.nodes + self.values[:, None] * E.normal


def lift(hf, n=None, validate=True):
    """The curve x + psi nu over the reference, resampled to uniform arclength."""
    pts = hf.points()
    if validate and not is_simple(pts):
        raise ValidationError("lifted curve self-intersects")
    return ClosedCurve.from_parametric(pts, n or hf.reference.n, validate=validate)


def graph_frame(hf):
    """Closed-form tangent, normal and Jacobian of the lifted curve at reference nodes.

    With ``w = 1 + psi kappa`` the unnormalized normal is ``N = w nu - psi' tau``
    and the Jacobian of the lift is ``|N|``.
    """
    E = hf.reference
    w = 1.0 + hf.values * E.curvature
    p1 = hf.dpsi
    N = w[:, None] * E.normal - p1[:, None] * E.tangent
    J = np.hypot(N[:, 0], N[:, 1])
    nu_F = N / J[:, None]
    tau_F = (w[:, None] * E.tangent + p1[:, None] * E.normal) / J[:, None]
    return tau_F, nu_F, J


def graph_normal_vector(hf):
    """Unnormalized normal N of the lift, at reference nodes."""
    E = hf.reference
    w = 1.0 + hf.values * E.curvature
    return w[:, None] * E.normal - hf.dpsi[:, None] * E.tangent


def graph_aniso_curvature(hf, a):
    """kappa^phi of the lifted curve at lifted nodes, from the first variation of P_phi.

    Varying psi in the direction delta gives ``int (kappa A + (B)') delta ds`` with
    ``A = grad phi(N).nu`` and ``B = grad phi(N).tau``; dividing by the area
    factor ``1 + kappa psi`` turns that density into kappa^phi_F.
    """
    E = hf.reference
    N = graph_normal_vector(hf)
    grad = a.gradient(N)
    A = np.einsum("ij,ij->i", grad, E.normal)
    B = np.einsum("ij,ij->i", grad, E.tangent)
    density = E.curvature * A + E.d_ds(B, 1)
    return density / (1.0 + E.curvature * hf.values)


def direct_aniso_curvature(hf, a):
    """kappa^phi of the lifted curve by differentiating the lifted nodes directly."""
    _, nu, kappa, _ = frame_of_samples(hf.points())
    return a.mobility_g(nu) * kappa


def curvature_expansion(hf, a):
    """Anisotropic curvature of the lift and the remainder of its expansion.

    Returns ``(kappa_phi_F, R)`` at reference nodes, where
    ``kappa_phi_F = -g(nu_E) psi'' + kappa^phi_E + R``.
    """
    E = hf.reference
    exact = graph_aniso_curvature(hf, a)
    leading = -a.mobility_g(E.normal) * E.d_ds(hf.values, 2) + aniso_curvature(E, a)
    return exact, exact - leading


def remainder_linear_part(E, a, psi):
    """First-order part of the expansion remainder: ``-g kappa^2 psi - (g)' psi'``.

    The remainder is not quadratic in psi: concentric circles already give
    ``1/(1+c) - 1 = -c + O(c^2)``.  This is its exact linearization at psi = 0.
    """
    g = a.mobility_g(E.normal)
    k = E.curvature
    return -g * k**2 * psi - E.d_ds(g, 1) * E.d_ds(psi, 1)


# ---------------------------------------------------------------------------
# graph extraction


@dataclass(frozen=True)
class GraphBreakdown:
    """Typed failure: the candidate curve is not a normal graph over the reference."""

    reason: str

    def __bool__(self):
        return False


def extract_graph(E, F, roundtrip_tol=1e-6):
    """Heights psi over E whose lift is F, or a ``GraphBreakdown``.

    Each normal line of E is intersected with the interpolant of F by Newton's
    method, started from the inverse of the (monotone) foot-point map.
    """
    t_foot, d = _project_many(E, F.nodes)
    if np.max(np.abs(d)) >= E.sigma:
        return GraphBreakdown(f"node of F outside the tube (|d| = {np.max(np.abs(d)):.4g})")
    # foot parameters must wind once, monotonically
    dt = np.diff(np.unwrap(t_foot))
    if not (np.all(dt > 0) and abs(np.sum(dt) + _wrap(t_foot[0] - t_foot[-1]) - 2 * np.pi) < 1e-6):
        return GraphBreakdown("projection onto the reference is not monotone")
    t_un = np.unwrap(t_foot)
    t_un = t_un - 2 * np.pi * np.floor(t_un[0] / (2 * np.pi))
    u_F = F.parameter(np.arange(F.n))
    t_E = E.parameter(np.arange(E.n))
    # initial guess of F's parameter at each E node
    t_ext = np.concatenate([t_un - 2 * np.pi, t_un, t_un + 2 * np.pi])
    u_ext = np.concatenate([u_F - 2 * np.pi, u_F, u_F + 2 * np.pi])
    u = np.interp(t_E, t_ext, u_ext)
    x0, nu = E.nodes, E.normal
    for _ in range(40):
        y, y1 = F.evaluate(u, orders=(0, 1))
        r = y - x0
        f = r[:, 0] * nu[:, 1] - r[:, 1] * nu[:, 0]
        fp = y1[:, 0] * nu[:, 1] - y1[:, 1] * nu[:, 0]
        if np.any(np.abs(fp) < 1e-14):
            return GraphBreakdown("normal line tangent to F")
        step = f / fp
        u = u - step
        if np.max(np.abs(step)) < 1e-15:
            break
    y = F.evaluate(u)[0]
    psi = np.einsum("ij,ij->i", y - x0, nu)
    try:
        hf = HeightField(E, psi)
    except DomainError as exc:
        return GraphBreakdown(str(exc))
    gap = hausdorff(lift(hf, n=F.n, validate=False), F) if roundtrip_tol else 0.0
    if gap > roundtrip_tol * F.length + 1e-12:
        return GraphBreakdown(f"round trip misses F by {gap:.3g}")
    return hf


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def pushforward_gradient_check(hf, g):
    """Both sides of the change of variables for the Dirichlet energy on the lift.

    ``g`` is a callable of positions.  ``lhs`` integrates ``|d g/ds|^2`` on the
    lifted curve itself; ``rhs`` integrates ``|(g o Psi)'|^2 / J`` over the reference.
    """
    E = hf.reference
    F = lift(hf, n=max(E.n, 256))
    gF = g(F.nodes)
    lhs = F.integrate(F.d_ds(gF, 1) ** 2)
    ghat = g(hf.points())
    _, _, J = graph_frame(hf)
    rhs = E.integrate(E.d_ds(ghat, 1) ** 2 / J)
    return float(lhs), float(rhs)
