"""Linear elasticity around a void: P1 plane-strain finite elements.

The body is ``Omega \\ F`` with prescribed displacement on the outer boundary
and a traction-free void boundary.  The energy density is
``Q(A) = 1/2 C sym(A) : sym(A)``.  Besides the finite-element model there is an
analytic model, where a given field ``q(x, y)`` stands in for ``Q(E(u))``.
"""

import hashlib
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
import triangle
from scipy.spatial import cKDTree

from .curve import ClosedCurve
from .errors import DomainError, MeshError, SolverError, ValidationError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W

# engineering-strain index map for (11, 22, 12)
_VOIGT = ((0, 0), (1, 1), (0, 1))


@dataclass(frozen=True)
class HookeTensor:
    """Isotropic ``C A = 2 mu A + lambda tr(A) I`` or a full 2x2x2x2 array."""

    lame_lambda: float = 1.0
    lame_mu: float = 1.0
    full: tuple = None

    def __post_init__(self):
        if self.full is not None:
            c = np.asarray(self.full, dtype=float)
            if c.size == 16:
                c = c.reshape(2, 2, 2, 2)
            if c.shape != (2, 2, 2, 2):
                raise ValidationError("full elasticity tensor must be 2x2x2x2")
            minor = np.allclose(c, c.transpose(1, 0, 2, 3)) and np.allclose(c, c.transpose(0, 1, 3, 2))
            major = np.allclose(c, c.transpose(2, 3, 0, 1))
            if not (minor and major):
                raise ValidationError("elasticity tensor lacks minor or major symmetry")
            object.__setattr__(self, "full", tuple(c.ravel()))
        elif self.lame_mu <= 0 or self.lame_lambda < 0:
            raise ValidationError("need lame_mu > 0 and lame_lambda >= 0")
        if np.min(np.linalg.eigvalsh(self.voigt)) <= 0:
            raise ValidationError("elasticity tensor is not coercive on symmetric matrices")

    def tensor(self):
        if self.full is not None:
            return np.asarray(self.full).reshape(2, 2, 2, 2)
        lam, mu = self.lame_lambda, self.lame_mu
        d = np.eye(2)
        return (
            lam * np.einsum("ij,kl->ijkl", d, d)
            + mu * (np.einsum("ik,jl->ijkl", d, d) + np.einsum("il,jk->ijkl", d, d))
        )

    @property
    def voigt(self):
        """3x3 matrix acting on engineering strain ``(e11, e22, 2 e12)``."""
        c = self.tensor()
        return np.array([[c[i, j, k, l] for (k, l) in _VOIGT] for (i, j) in _VOIGT])

    def apply(self, A):
        return np.einsum("ijkl,...kl->...ij", self.tensor(), np.asarray(A, dtype=float))


def quadratic_form(C, A):
    """Q(A) = 1/2 C sym(A) : sym(A)."""
    A = np.asarray(A, dtype=float)
    S = 0.5 * (A + np.swapaxes(A, -1, -2))
    return 0.5 * np.einsum("...ij,...ij->...", C.apply(S), S)


# ---------------------------------------------------------------------------
# outer domain and boundary data


@dataclass(frozen=True)
class Domain:
    """A disk ``{kind: disk, radius, center}`` or rectangle ``{kind: rectangle, bounds}``."""

    kind: str = "disk"
    radius: float = 3.0
    center: tuple = (0.0, 0.0)
    bounds: tuple = (-3.0, 3.0, -3.0, 3.0)

    def __post_init__(self):
        if self.kind not in ("disk", "rectangle"):
            raise ValidationError(f"unknown domain kind {self.kind!r}")
        if self.kind == "disk" and self.radius <= 0:
            raise ValidationError("domain radius must be positive")
        if self.kind == "rectangle":
            x0, x1, y0, y1 = self.bounds
            if not (x1 > x0 and y1 > y0):
                raise ValidationError("rectangle bounds must be increasing")

    def boundary(self, h):
        """Counterclockwise boundary polygon with edges of length about h."""
        if self.kind == "disk":
            m = max(16, int(np.ceil(2 * np.pi * self.radius / h)))
            t = 2 * np.pi * np.arange(m) / m
            return np.stack([np.cos(t), np.sin(t)], axis=1) * self.radius + np.asarray(self.center)
        x0, x1, y0, y1 = self.bounds
        corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
        pts = []
        for a, b in zip(corners, np.roll(corners, -1, axis=0)):
            m = max(1, int(np.ceil(np.hypot(*(b - a)) / h)))
            s = np.arange(m)[:, None] / m
            pts.append(a + s * (b - a))
        return np.vstack(pts)

    def clearance(self, points):
        """Smallest distance from the points to the outer boundary (negative if outside)."""
        p = np.asarray(points, dtype=float)
        if self.kind == "disk":
            return float(self.radius - np.max(np.hypot(*(p - np.asarray(self.center)).T)))
        x0, x1, y0, y1 = self.bounds
        return float(np.min([p[:, 0] - x0, x1 - p[:, 0], p[:, 1] - y0, y1 - p[:, 1]]))

    @property
    def area(self):
        if self.kind == "disk":
            return np.pi * self.radius**2
        x0, x1, y0, y1 = self.bounds
        return (x1 - x0) * (y1 - y0)

    def boundary_curve(self, n=4096):
        """Parametric closed boundary for boundary integrals (disk only is smooth)."""
        if self.kind == "disk":
            return ClosedCurve.circle(self.radius, n, center=self.center)
        return None


@dataclass(frozen=True)
class Dirichlet:
    """Outer displacement ``w0``.

    ``affine``: ``w0(x) = A x + b``; ``radial``: ``w0(x) = delta (x - c)/|x - c|``.
    """

    kind: str = "affine"
    matrix: tuple = ((0.0, 0.0), (0.0, 0.0))
    translation: tuple = (0.0, 0.0)
    delta: float = 0.0
    center: tuple = (0.0, 0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "affine":
            return x @ np.asarray(self.matrix, dtype=float).T + np.asarray(self.translation)
        if self.kind == "radial":
            r = x - np.asarray(self.center)
            return self.delta * r / np.hypot(r[:, 0], r[:, 1])[:, None]
        raise ValidationError(f"unknown boundary data kind {self.kind!r}")


# ---------------------------------------------------------------------------
# the bulk model


def compile_expression(expr):
    """Turn a string such as ``"x**2 + sin(y)"`` into a vectorized callable q(x, y)."""
    names = {k: getattr(np, k) for k in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "pi", "hypot", "arctan2")}
    code = compile(expr, "<analytic_q>", "eval")
    for name in code.co_names:
        if name not in names and name not in ("x", "y"):
            raise ValidationError(f"analytic_q uses unknown name {name!r}")

    def q(x, y):
        val = eval(code, {"__builtins__": {}}, {**names, "x": x, "y": y})
        return np.broadcast_to(np.asarray(val, dtype=float), np.shape(x)).copy()

    q.expression = expr
    return q


@dataclass(frozen=True, eq=False)
class BulkEnergyModel:
    """Bulk energy of the body outside the evolving set.

    kind ``none``: no bulk term.  ``analytic``: density ``q(x, y)`` integrated
    over ``Omega \\ F``.  ``fem``: elastic equilibrium energy.
    """

    kind: str = "none"
    q: object = None
    hooke: HookeTensor = field(default_factory=HookeTensor)
    domain: Domain = field(default_factory=Domain)
    w0: Dirichlet = field(default_factory=Dirichlet)
    mesh_size: float = 0.05
    grading: float = 0.1
    max_size: float = None
    recovery: str = "traction"

    def __post_init__(self):
        if self.kind not in ("none", "analytic", "fem"):
            raise ValidationError(f"unknown bulk model kind {self.kind!r}")
        if self.kind == "analytic":
            if self.q is None:
                raise ValidationError("analytic bulk model needs q")
            if isinstance(self.q, str):
                object.__setattr__(self, "q", compile_expression(self.q))
        if self.mesh_size <= 0:
            raise ValidationError("mesh_size must be positive")
        if self.recovery not in ("traction", "average"):
            raise ValidationError("recovery must be 'traction' or 'average'")
        if self.grading < 0:
            raise ValidationError("grading must be non-negative")
        object.__setattr__(self, "_cache", OrderedDict())

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def analytic(cls, q, domain=None):
        return cls("analytic", q=q, domain=domain or Domain())

    @classmethod
    def fem(cls, hooke, domain, w0, mesh_size, grading=0.1, max_size=None, recovery="traction"):
        return cls(
            "fem",
            hooke=hooke,
            domain=domain,
            w0=w0,
            mesh_size=mesh_size,
            grading=grading,
            max_size=max_size,
            recovery=recovery,
        )

    def mesh(self, F):
        return triangulate(self.domain, F, self.mesh_size, self.grading, self.max_size)

    def cached_solution(self, F):
        key = hashlib.sha1(np.ascontiguousarray(F.nodes).tobytes()).hexdigest()
        cache = self._cache
        if key in cache:
            cache.move_to_end(key)
            return cache[key]
        sol = solve_equilibrium(self, F)
        cache[key] = sol
        if len(cache) > 8:
            cache.popitem(last=False)
        return sol


# ---------------------------------------------------------------------------
# analytic density: Green's theorem integrals


def _antiderivative_x(q, pts):
    """P(x, y) = integral_0^x q(s, y) ds by 32-point Gauss-Legendre."""
    x, y = pts[:, 0:1], pts[:, 1:2]
    vals = q(x * _GL_X[None, :], np.broadcast_to(y, (len(pts), len(_GL_X))))
    return x[:, 0] * (vals @ _GL_W)


def region_integral(q, points):
    """Integral of q over the region bounded by a smooth closed curve sampled at uniform parameter.

    Green's theorem: ``int_F q = closed integral of P dy`` with ``dP/dx = q``.
    """
    from . import spectral

    dy = spectral.derivative(points[:, 1], 1)
    return float(np.sum(_antiderivative_x(q, points) * dy) * (2 * np.pi / len(points)))


def region_integral_gradient(q, points, eps=1e-6):
    """Derivative of ``region_integral(q, points)`` with respect to each node, shape (n, 2).

    Exact for the discrete formula ``sum_i P(p_i) (D y)_i dt`` except for
    ``dP/dy``, which is a central difference (error ``O(eps^2)``).
    """
    from . import spectral

    n = len(points)
    dt = 2 * np.pi / n
    P = _antiderivative_x(q, points)
    dy = spectral.derivative(points[:, 1], 1)
    up, dn = points.copy(), points.copy()
    up[:, 1] += eps
    dn[:, 1] -= eps
    Py = (_antiderivative_x(q, up) - _antiderivative_x(q, dn)) / (2 * eps)
    qx = q(points[:, 0], points[:, 1])
    # the spectral derivative matrix is antisymmetric, so D^T P = -D P
    gy = Py * dy - spectral.derivative(P, 1)
    return np.stack([qx * dy, gy], axis=1) * dt


def _domain_integral(model, q):
    dom = model.domain
    if dom.kind == "disk":
        return region_integral(q, dom.boundary_curve().nodes)
    # rectangle: tensor Gauss-Legendre on 8x8 panels
    x0, x1, y0, y1 = dom.bounds
    xs = np.concatenate([x0 + (x1 - x0) * (i + _GL_X) / 8 for i in range(8)])
    ys = np.concatenate([y0 + (y1 - y0) * (i + _GL_X) / 8 for i in range(8)])
    wx = np.tile(_GL_W, 8) * (x1 - x0) / 8
    wy = np.tile(_GL_W, 8) * (y1 - y0) / 8
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return float(wx @ q(X, Y) @ wy)


# ---------------------------------------------------------------------------
# finite elements


@dataclass(frozen=True, eq=False)
class ElasticSolution:
    vertices: np.ndarray
    triangles: np.ndarray
    displacement: np.ndarray
    energy: float
    boundary_q: np.ndarray
    element_q: np.ndarray
    element_area: np.ndarray
    outer_nodes: np.ndarray
    void_nodes: np.ndarray
    residual: float
    max_strain: float

    def to_json(self):
        import json

        return json.dumps(
            {
                "vertices": self.vertices.tolist(),
                "triangles": self.triangles.tolist(),
                "displacement": self.displacement.tolist(),
            }
        )


def _areas(V, T):
    P = V[T]
    return 0.5 * np.abs(
        (P[:, 1, 0] - P[:, 0, 0]) * (P[:, 2, 1] - P[:, 0, 1])
        - (P[:, 2, 0] - P[:, 0, 0]) * (P[:, 1, 1] - P[:, 0, 1])
    )


def _equilateral_area(size):
    return np.sqrt(3) / 4 * size * size


def triangulate(domain, F, h, grading=0.0, max_size=None):
    """Constrained Delaunay mesh of ``domain \\ F`` that keeps F's nodes as boundary nodes.

    The target edge length is ``h`` at the void and grows like
    ``h + grading * dist(x, F)`` up to ``max_size`` (uniform when grading is 0).
    No points are inserted on boundary segments, so the void boundary of the
    mesh is exactly the polygon through F's nodes.

    Returns ``(vertices, triangles, outer_index, void_index)``.
    """
    graded = F is not None and grading > 0
    h_far = (max_size or 10 * h) if graded else h
    outer = domain.boundary(h_far if graded else h)
    m = len(outer)
    verts = [outer]
    segs = [np.stack([np.arange(m), (np.arange(m) + 1) % m], axis=1)]
    holes = []
    void_index = np.zeros(0, dtype=int)
    if F is not None:
        if domain.clearance(F.nodes) < 2 * h:
            raise MeshError("the void is closer than two mesh sizes to the outer boundary")
        n = F.n
        verts.append(F.nodes)
        segs.append(m + np.stack([np.arange(n), (np.arange(n) + 1) % n], axis=1))
        holes.append(F.nodes[0] - 0.5 * F.sigma * F.normal[0])
        void_index = m + np.arange(n)
    pslg = {"vertices": np.vstack(verts), "segments": np.vstack(segs)}
    if holes:
        pslg["holes"] = np.array(holes)
    try:
        mesh = triangle.triangulate(pslg, f"pq30a{_equilateral_area(h_far):.17f}YQ")
        if graded:
            tree = cKDTree(F.nodes)
            for _ in range(20):
                cent = mesh["vertices"][mesh["triangles"]].mean(axis=1)
                target = _equilateral_area(np.minimum(h_far, h + grading * tree.query(cent)[0]))
                if not np.any(_areas(mesh["vertices"], mesh["triangles"]) > target * (1 + 1e-9)):
                    break
                mesh["triangle_max_area"] = target[:, None]
                mesh = triangle.triangulate(mesh, "rpq30aYQ")
    except Exception as exc:  # triangle raises bare RuntimeErrors
        raise MeshError(f"triangulation failed: {exc}") from exc
    V = mesh["vertices"]
    T = mesh["triangles"]
    n_in = len(pslg["vertices"])
    if len(V) < n_in or not np.array_equal(V[:n_in], pslg["vertices"]):
        raise MeshError("mesher moved boundary vertices")
    if len(T) == 0:
        raise MeshError("empty mesh")
    return V, T, np.arange(m), void_index


def _element_geometry(V, T):
    p0, p1, p2 = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    det = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
    area = 0.5 * det
    # gradients of the barycentric hat functions
    b = np.stack([p1[:, 1] - p2[:, 1], p2[:, 1] - p0[:, 1], p0[:, 1] - p1[:, 1]], axis=1) / det[:, None]
    c = np.stack([p2[:, 0] - p1[:, 0], p0[:, 0] - p2[:, 0], p1[:, 0] - p0[:, 0]], axis=1) / det[:, None]
    return area, b, c


def _strain_operator(b, c):
    """Per-element 3x6 map from nodal (u1, u2) pairs to engineering strain."""
    ne = len(b)
    B = np.zeros((ne, 3, 6))
    B[:, 0, 0::2] = b
    B[:, 1, 1::2] = c
    B[:, 2, 0::2] = c
    B[:, 2, 1::2] = b
    return B


def assemble(V, T, hooke):
    area, b, c = _element_geometry(V, T)
    if np.any(area <= 0):
        raise MeshError("mesh has inverted or degenerate elements")
    B = _strain_operator(b, c)
    D = hooke.voigt
    Ke = area[:, None, None] * np.einsum("eai,ab,ebj->eij", B, D, B)
    dofs = np.stack([2 * T, 2 * T + 1], axis=2).reshape(len(T), 6)
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(2 * len(V), 2 * len(V))).tocsr()
    return K, B, area, dofs


def _element_energy_density(B, dofs, u, hooke):
    eps = np.einsum("eij,ej->ei", B, u.ravel()[dofs])
    return 0.5 * np.einsum("ei,ij,ej->e", eps, hooke.voigt, eps), eps


def _average_boundary_q(V, T, qe, area, nodes):
    """Area-weighted mean of the element densities adjacent to each node."""
    ne = len(T)
    inc = sp.coo_matrix(
        (np.repeat(area, 3), (T.ravel(), np.repeat(np.arange(ne), 3))), shape=(len(V), ne)
    ).tocsr()
    return ((inc @ qe) / np.asarray(inc.sum(axis=1)).ravel().clip(min=1e-300))[nodes]


def traction_free_density(hooke, tangent, normal, e_tt):
    """Energy density at a traction-free boundary point with tangential strain ``e_tt``.

    With ``sigma nu = 0`` the normal and shear strains are fixed by ``e_tt``,
    so ``Q = c(tau) e_tt^2``; ``c`` is found by solving the 2x2 traction system.
    """
    C = hooke.tensor()
    t, nrm = tangent, normal
    tt = np.einsum("ni,nj->nij", t, t)
    nn = np.einsum("ni,nj->nij", nrm, nrm)
    tn = np.einsum("ni,nj->nij", t, nrm)
    tn = tn + np.swapaxes(tn, 1, 2)

    def traction(S):
        return np.einsum("ijkl,nkl,nj->ni", C, S, nrm)

    A = np.stack([traction(nn), traction(tn)], axis=2)
    rhs = -traction(tt)
    coef = np.linalg.solve(A, rhs[..., None])[..., 0]
    S = tt + coef[:, 0, None, None] * nn + coef[:, 1, None, None] * tn
    c = 0.5 * np.einsum("ijkl,nkl,nij->n", C, S, S)
    return c * e_tt**2


def _traction_boundary_q(disp, V, nodes, hooke):
    """Boundary density from the tangential strain of the void polygon.

    The tangential strain is the central difference of nodal displacements
    along the boundary, lightly smoothed by a (1, 2, 1)/4 filter.
    """
    P = V[nodes]
    u = disp[nodes]
    dp = np.roll(P, -1, axis=0) - np.roll(P, 1, axis=0)
    du = np.roll(u, -1, axis=0) - np.roll(u, 1, axis=0)
    e_tt = np.einsum("ij,ij->i", du, dp) / np.einsum("ij,ij->i", dp, dp)
    e_tt = 0.25 * (np.roll(e_tt, 1) + 2 * e_tt + np.roll(e_tt, -1))
    t = dp / np.hypot(dp[:, 0], dp[:, 1])[:, None]
    nrm = np.stack([t[:, 1], -t[:, 0]], axis=1)
    return traction_free_density(hooke, t, nrm, e_tt)


def solve_equilibrium(model, F):
    """Equilibrium displacement in ``Omega \\ F`` with data w0 on the outer boundary.

    ``F = None`` solves on the full domain.
    """
    if model.kind != "fem":
        raise DomainError("solve_equilibrium needs a fem bulk model")
    if F is not None and not isinstance(F, ClosedCurve):
        raise DomainError("F must be a ClosedCurve or None")
    V, T, outer, void = model.mesh(F)
    return solve_on_mesh(model, V, T, outer, void, F)


def solve_on_mesh(model, V, T, outer, void, F=None):
    K, B, area, dofs = assemble(V, T, model.hooke)
    ndof = 2 * len(V)
    fixed = np.zeros(ndof, dtype=bool)
    fixed[2 * outer] = True
    fixed[2 * outer + 1] = True
    u = np.zeros(ndof)
    u_out = model.w0(V[outer])
    u[2 * outer] = u_out[:, 0]
    u[2 * outer + 1] = u_out[:, 1]
    free = ~fixed
    rhs = -K[free][:, fixed] @ u[fixed]
    Kff = K[free][:, free].tocsc()
    try:
        u_free = spla.spsolve(Kff, rhs)
    except RuntimeError as exc:
        raise SolverError(f"sparse solve failed: {exc}") from exc
    if not np.all(np.isfinite(u_free)):
        raise SolverError("singular elasticity system")
    u[free] = u_free
    force = K @ u
    scale = max(np.max(np.abs(K[free][:, fixed] @ u[fixed])), np.finfo(float).tiny)
    residual = float(np.max(np.abs(force[free])) / scale) if np.any(u) else 0.0
    energy = float(0.5 * u @ force)
    disp = u.reshape(-1, 2)
    qe, eps = _element_energy_density(B, dofs, disp, model.hooke)
    if not len(void):
        bq = np.zeros(0)
    elif model.recovery == "average":
        bq = _average_boundary_q(V, T, qe, area, void)
    else:
        bq = _traction_boundary_q(disp, V, void, model.hooke)
    return ElasticSolution(
        vertices=V,
        triangles=T,
        displacement=disp,
        energy=energy,
        boundary_q=bq,
        element_q=qe,
        element_area=area,
        outer_nodes=outer,
        void_nodes=void,
        residual=residual,
        max_strain=float(np.max(np.abs(eps))) if len(eps) else 0.0,
    )


# ---------------------------------------------------------------------------
# the model interface used by the scheme


def energy(model, F):
    """Bulk energy of ``Omega \\ F``."""
    if model.kind == "none":
        return 0.0
    if model.kind == "analytic":
        return _domain_integral(model, model.q) - region_integral(model.q, F.nodes)
    return model.cached_solution(F).energy


def analytic_energy_of_points(model, points):
    """Analytic bulk energy outside the region bounded by uniformly parameterized points."""
    return _domain_integral(model, model.q) - region_integral(model.q, points)


def boundary_q(model, F):
    """Trace of the bulk density on F's nodes."""
    if model.kind == "none":
        return np.zeros(F.n)
    if model.kind == "analytic":
        return model.q(F.nodes[:, 0], F.nodes[:, 1])
    return model.cached_solution(F).boundary_q


def shape_derivative_check(model, F, X, t=None):
    """Boundary-integral shape derivative of the elastic energy against finite differences.

    The analytic value is ``-int_{dF} Q(E(u)) X . nu``.  The finite difference
    transports every mesh node by ``x + s X(x)`` (no remeshing), which isolates
    the shape dependence from remeshing noise.  ``X`` is a callable on
    ``(m, 2)`` arrays and must vanish on the outer boundary.
    """
    if model.kind != "fem":
        raise DomainError("shape_derivative_check needs a fem bulk model")
    V, T, outer, void = model.mesh(F)
    if np.max(np.abs(X(V[outer]))) > 1e-12:
        raise DomainError("the perturbation field must vanish on the outer boundary")
    sol = solve_on_mesh(model, V, T, outer, void, F)
    analytic = -F.integrate(sol.boundary_q * np.einsum("ij,ij->i", X(F.nodes), F.normal))
    if t is None:
        t = 1e-3 * F.diameter
    if np.max(np.abs(X(V))) == 0:
        return 0.0, 0.0
    e_plus = solve_on_mesh(model, V + t * X(V), T, outer, void).energy
    e_minus = solve_on_mesh(model, V - t * X(V), T, outer, void).energy
    return float(analytic), float((e_plus - e_minus) / (2 * t))


def lame_thick_cylinder(hooke, a, R, delta):
    """Closed-form radial solution in an annulus ``a < r < R`` with ``u_r(R) = delta``.

    Traction-free at ``r = a``.  Returns ``(alpha, beta, q_inner)`` for
    ``u_r = alpha r + beta / r`` and the energy density at the inner radius.
    """
    lam, mu = hooke.lame_lambda, hooke.lame_mu
    # (lam + mu) alpha = mu beta / a^2 ; alpha R + beta / R = delta
    k = (lam + mu) * a * a / mu
    alpha = delta / (R + k / R)
    beta = k * alpha
    err, ett = alpha - beta / a**2, alpha + beta / a**2
    q = mu * (err**2 + ett**2) + 0.5 * lam * (err + ett) ** 2
    return alpha, beta, q
