"""Smooth strictly convex surface-energy densities in the plane.

Three families are built in:

* ``euclidean``: ``phi(v) = |v|``
* ``elliptic``: ``phi(v) = sqrt(v . M v)`` for a symmetric positive-definite ``M``
* ``fourier``: ``phi(v) = |v| h(arg v)`` with ``h(t) = 1 + sum eps_m cos(m t)``

All evaluation routines accept a single 2-vector or an ``(..., 2)`` stack.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError

_N_SAMPLES = 4096
_DUAL_SCAN = 1024
_DUAL_GOLDEN_STEPS = 20


def _as_vectors(v):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 2:
        raise DomainError(f"expected 2-vectors, got shape {v.shape}")
    r = np.hypot(v[..., 0], v[..., 1])
    if np.any(r == 0.0):
        raise DomainError("anisotropy is not defined at the zero vector")
    return v, r


@dataclass(frozen=True)
class Anisotropy:
    """A regular strictly convex norm on R^2.

    Parameters
    ----------
    kind : {"euclidean", "elliptic", "fourier"}
    matrix : 2x2 array, only for ``elliptic``
    fourier_terms : sequence of ``(eps, m)`` pairs, only for ``fourier``
    """

    kind: str = "euclidean"
    matrix: tuple = None
    fourier_terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in ("euclidean", "elliptic", "fourier"):
            raise ValidationError(f"unknown anisotropy kind {self.kind!r}")
        if self.kind == "elliptic":
            if self.matrix is None:
                raise ValidationError("elliptic anisotropy needs a matrix")
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (2, 2) or not np.allclose(m, m.T):
                raise ValidationError("elliptic matrix must be symmetric 2x2")
            if np.min(np.linalg.eigvalsh(m)) <= 0:
                raise ValidationError("elliptic matrix must be positive definite")
            object.__setattr__(self, "matrix", tuple(map(tuple, m)))
        if self.kind == "fourier":
            terms = tuple((float(e), int(m)) for e, m in self.fourier_terms)
            object.__setattr__(self, "fourier_terms", terms)
            theta = np.linspace(0, 2 * np.pi, _N_SAMPLES, endpoint=False)
            h, _, h2 = self._h(theta)
            if np.min(h + h2) <= 1e-6 or np.min(h) <= 0:
                raise ValidationError(
                    "fourier anisotropy is not strictly convex: min(h + h'') = "
                    f"{np.min(h + h2):.3e}"
                )

    # -- constructors -----------------------------------------------------

    @classmethod
    def euclidean(cls):
        return cls("euclidean")

    @classmethod
    def elliptic(cls, matrix):
        return cls("elliptic", matrix=matrix)

    @classmethod
    def fourier(cls, terms):
        return cls("fourier", fourier_terms=tuple(terms))

    @classmethod
    def from_dict(cls, d):
        """Build from a run-config table ``{kind, matrix?, fourier_terms?}``.

        A bare ``kind`` without parameters selects the built-in of that name.
        """
        kind = d.get("kind", "euclidean")
        if kind == "elliptic":
            if "matrix" not in d:
                return builtin_anisotropies()["elliptic"]
            return cls.elliptic(d["matrix"])
        if kind == "fourier":
            if "fourier_terms" not in d:
                return builtin_anisotropies()["fourier"]
            return cls.fourier([tuple(t) for t in d["fourier_terms"]])
        return cls(kind)

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "elliptic":
            out["matrix"] = [list(r) for r in self.matrix]
        if self.kind == "fourier":
            out["fourier_terms"] = [list(t) for t in self.fourier_terms]
        return out

    # -- the fourier profile ----------------------------------------------

    def _h(self, theta):
        h = np.ones_like(theta)
        h1 = np.zeros_like(theta)
        h2 = np.zeros_like(theta)
        for eps, m in self.fourier_terms:
            h = h + eps * np.cos(m * theta)
            h1 = h1 - eps * m * np.sin(m * theta)
            h2 = h2 - eps * m * m * np.cos(m * theta)
        return h, h1, h2

    # -- evaluation -------------------------------------------------------

    def eval(self, v):
        """phi(v)."""
        v, r = _as_vectors(v)
        if self.kind == "euclidean":
            return r
        if self.kind == "elliptic":
            m = np.asarray(self.matrix)
            return np.sqrt(np.einsum("...i,ij,...j->...", v, m, v))
        theta = np.arctan2(v[..., 1], v[..., 0])
        return r * self._h(theta)[0]

    __call__ = eval

    def derivatives(self, v):
        """Gradient and Hessian of phi at ``v``.

        Returns ``(grad, hess)`` with shapes ``(..., 2)`` and ``(..., 2, 2)``.
        """
        v, r = _as_vectors(v)
        if self.kind == "elliptic":
            m = np.asarray(self.matrix)
            mv = v @ m
            phi = np.sqrt(np.einsum("...i,...i->...", v, mv))
            grad = mv / phi[..., None]
            hess = m / phi[..., None, None] - np.einsum("...i,...j->...ij", mv, mv) / (
                phi**3
            )[..., None, None]
            return grad, hess
        er = v / r[..., None]
        et = np.stack([-er[..., 1], er[..., 0]], axis=-1)
        if self.kind == "euclidean":
            h, h1, h2 = np.ones_like(r), np.zeros_like(r), np.zeros_like(r)
        else:
            h, h1, h2 = self._h(np.arctan2(v[..., 1], v[..., 0]))
        grad = h[..., None] * er + h1[..., None] * et
        hess = ((h + h2) / r)[..., None, None] * np.einsum("...i,...j->...ij", et, et)
        return grad, hess

    def gradient(self, v):
        return self.derivatives(v)[0]

    def mobility_g(self, nu):
        """g(nu) = D^2 phi(nu) tau . tau, with tau the unit tangent orthogonal to nu."""
        nu = np.asarray(nu, dtype=float)
        r = np.hypot(nu[..., 0], nu[..., 1])
        if np.any(np.abs(r - 1.0) > 1e-12):
            raise DomainError("mobility_g expects unit normals")
        if self.kind == "euclidean":
            return np.ones_like(r)
        if self.kind == "fourier":
            h, _, h2 = self._h(np.arctan2(nu[..., 1], nu[..., 0]))
            return h + h2
        tau = np.stack([nu[..., 1], -nu[..., 0]], axis=-1)
        _, hess = self.derivatives(nu)
        return np.einsum("...i,...ij,...j->...", tau, hess, tau)

    def dual_norm(self, xi):
        """phi0(xi) = sup_{|eta|=1} xi . eta / phi(eta), by scan plus golden-section refinement."""
        xi = np.asarray(xi, dtype=float)
        flat = xi.reshape(-1, 2)
        theta = np.linspace(0, 2 * np.pi, _DUAL_SCAN, endpoint=False)
        eta = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        inv_phi = 1.0 / self.eval(eta)
        vals = (flat @ eta.T) * inv_phi
        best = np.argmax(vals, axis=1)
        dt = 2 * np.pi / _DUAL_SCAN
        a = theta[best] - dt
        b = theta[best] + dt

        def f(t):
            e = np.stack([np.cos(t), np.sin(t)], axis=-1)
            return np.einsum("ij,ij->i", flat, e) / self.eval(e)

        gr = (np.sqrt(5) - 1) / 2
        c = b - gr * (b - a)
        d = a + gr * (b - a)
        fc, fd = f(c), f(d)
        for _ in range(_DUAL_GOLDEN_STEPS):
            left = fc > fd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            c_new = b - gr * (b - a)
            d_new = a + gr * (b - a)
            c, d = c_new, d_new
            fc, fd = f(c), f(d)
        out = np.maximum(np.maximum(fc, fd), vals[np.arange(len(flat)), best])
        out = np.where(np.all(flat == 0, axis=1), 0.0, out)
        return out.reshape(xi.shape[:-1]) if xi.ndim > 1 else float(out[0])

    # -- sampled constants ------------------------------------------------

    def _unit_samples(self, n=_N_SAMPLES):
        theta = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1)

    @property
    def ellipticity(self):
        """J: minimum of the mobility over sampled unit normals."""
        return float(np.min(self.mobility_g(self._unit_samples())))

    @property
    def m_phi(self):
        return float(np.min(self.eval(self._unit_samples())))

    @property
    def M_phi(self):
        return float(np.max(self.eval(self._unit_samples())))

    def wulff_boundary(self, n):
        """Boundary of the Wulff shape {phi0 <= 1} as a uniform-arclength closed curve."""
        from .curve import ClosedCurve

        if n < 16:
            raise DomainError("wulff_boundary needs n >= 16")
        m = max(4 * n, 2048)
        theta = 2 * np.pi * np.arange(m) / m
        nu = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return ClosedCurve.from_parametric(self.gradient(nu), n)


def builtin_anisotropies():
    """The three reference anisotropies used by tests and the verify suite."""
    return {
        "euclidean": Anisotropy.euclidean(),
        "elliptic": Anisotropy.elliptic([[4.0, 0.0], [0.0, 1.0]]),
        "fourier": Anisotropy.fourier([(0.05, 4)]),
    }
