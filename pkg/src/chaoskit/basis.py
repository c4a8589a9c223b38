"""Orthonormal polynomial eigenbases of the classical 1-D diffusion generators.

Three families are supported, each pinned to a fixed operator convention:

* Hermite / Ornstein-Uhlenbeck:  L = d2/dx2 - x d/dx,  mu = N(0,1),
  eigenvalues lambda_p = p.
* Laguerre(alpha), alpha > -1:   L = x d2/dx2 + (alpha+1-x) d/dx,
  mu = Gamma(alpha+1, 1), eigenvalues lambda_p = p.
* Jacobi(a, b), a, b > 0:        L = (1-x^2) d2/dx2 - ((a+b)x + (a-b)) d/dx,
  mu ~ (1-x)^(a-1) (1+x)^(b-1) on [-1,1], eigenvalues lambda_p = p(p+a+b-1).

All polynomials are stored orthonormal with respect to mu, so inner products
reduce to coefficient dot products.  Laguerre polynomials carry the classical
(-1)^p sign (Q_1 = 1 - x); Hermite and Jacobi use a positive leading
coefficient.  Construction verifies orthonormality and the eigenrelation
L Q_p = -lambda_p Q_p at the Gauss nodes and refuses bases that fail.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

HARD_DEGREE_CAP = 512
EPS_ORTH = 1e-9
EPS_EIG = 1e-9

_FAMILIES = ("hermite", "laguerre", "jacobi")


@dataclass(frozen=True)
class BasisKind:
    """Tag plus parameters selecting one of the pinned 1-D generators."""

    family: str
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown basis family {self.family!r}")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        if self.family == "hermite":
            if p:
                raise ValueError("hermite takes no parameters")
        elif self.family == "laguerre":
            if len(p) != 1:
                raise ValueError("laguerre takes one parameter alpha")
            if not p[0] > -1:
                raise ValueError(f"laguerre requires alpha > -1, got {p[0]}")
        else:
            if len(p) != 2:
                raise ValueError("jacobi takes two parameters (a, b)")
            if not (p[0] > 0 and p[1] > 0):
                raise ValueError(f"jacobi requires a > 0 and b > 0, got {p}")

    @property
    def alpha(self) -> float:
        if self.family != "laguerre":
            raise AttributeError("alpha is only defined for laguerre")
        return self.params[0]

    def eigenvalue(self, p: int) -> float:
        if self.family == "jacobi":
            a, b = self.params
            return float(p) * (p + a + b - 1.0)
        return float(p)

    def generator_coefficients(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coefficient functions (sigma, tau) of L = sigma d2/dx2 + tau d/dx."""
        x = np.asarray(x, dtype=float)
        if self.family == "hermite":
            return np.ones_like(x), -x
        if self.family == "laguerre":
            return x, (self.params[0] + 1.0) - x
        a, b = self.params
        return 1.0 - x * x, -((a + b) * x + (a - b))

    def sign(self, p: int) -> float:
        """Sign fixing the classical normalization of degree p."""
        if self.family == "laguerre":
            return -1.0 if p % 2 else 1.0
        return 1.0

    def recurrence(self, max_degree: int) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal three-term recurrence x Q_k = b_{k+1} Q_{k+1} + a_k Q_k + b_k Q_{k-1}.

        Signs are not applied here; `Basis` evaluation folds them in.
        """
        n = max_degree
        a = np.zeros(n + 1)
        b = np.zeros(n + 1)
        if self.family == "hermite":
            b[1:] = np.sqrt(np.arange(1, n + 1, dtype=float))
        elif self.family == "laguerre":
            alpha = self.params[0]
            k = np.arange(n + 1, dtype=float)
            a[:] = 2 * k + alpha + 1
            kk = np.arange(1, n + 1, dtype=float)
            b[1:] = np.sqrt(kk * (kk + alpha))
        else:
            pa, pb = self.params
            A, B = pa - 1.0, pb - 1.0
            apb = A + B
            a[0] = (B - A) / (apb + 2)
            for k in range(1, n + 1):
                a[k] = (B * B - A * A) / ((2 * k + apb) * (2 * k + apb + 2))
                if k == 1:
                    bk = 4 * (1 + A) * (1 + B) / ((apb + 2) ** 2 * (apb + 3))
                else:
                    bk = (
                        4 * k * (k + A) * (k + B) * (k + apb)
                        / ((2 * k + apb) ** 2 * (2 * k + apb + 1) * (2 * k + apb - 1))
                    )
                b[k] = math.sqrt(bk)
        return a, b

    def label(self) -> str:
        if self.family == "hermite":
            return "hermite"
        if self.family == "laguerre":
            return f"laguerre({self.params[0]:g})"
        return f"jacobi({self.params[0]:g},{self.params[1]:g})"

    def to_json(self) -> dict:
        return {"kind": self.family, "params": list(self.params)}

    @classmethod
    def from_json(cls, obj: dict) -> "BasisKind":
        return cls(obj["kind"], tuple(obj.get("params", ())))


def hermite() -> BasisKind:
    return BasisKind("hermite")


def laguerre(alpha: float) -> BasisKind:
    return BasisKind("laguerre", (alpha,))


def jacobi(a: float, b: float) -> BasisKind:
    return BasisKind("jacobi", (a, b))


@dataclass(frozen=True, eq=False)
class Basis:
    """One coordinate's orthonormal eigensystem Q_0..Q_max_degree with eigenvalues.

    Immutable after construction; the linearization cache is lock-protected so
    instances can be shared across threads.
    """

    kind: BasisKind
    max_degree: int
    rec_a: np.ndarray
    rec_b: np.ndarray
    eigenvalues: np.ndarray
    _lin_cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Basis):
            return NotImplemented
        return self.kind == other.kind and self.max_degree == other.max_degree

    def __hash__(self) -> int:
        return hash((self.kind, self.max_degree))

    def eigenvalue(self, p: int) -> float:
        return float(self.eigenvalues[p])

    def eval_all(self, x: np.ndarray, deg: int | None = None) -> np.ndarray:
        """Values of Q_0..Q_deg at the points x, shape (deg+1, len(x))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        deg = self.max_degree if deg is None else deg
        if deg > self.max_degree:
            raise ValueError(f"degree {deg} exceeds max_degree {self.max_degree}")
        a, b = self.rec_a, self.rec_b
        out = np.empty((deg + 1, x.size))
        out[0] = 1.0
        if deg >= 1:
            out[1] = (x - a[0]) / b[1]
        for k in range(1, deg):
            out[k + 1] = ((x - a[k]) * out[k] - b[k] * out[k - 1]) / b[k + 1]
        signs = np.array([self.kind.sign(p) for p in range(deg + 1)])
        return out * signs[:, None]

    def eval_with_derivatives(self, x: np.ndarray, deg: int | None = None,
                              ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(Q, Q', Q'') rows 0..deg at x, via the differentiated recurrence."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        deg = self.max_degree if deg is None else deg
        a, b = self.rec_a, self.rec_b
        q = np.zeros((deg + 1, x.size))
        d1 = np.zeros_like(q)
        d2 = np.zeros_like(q)
        q[0] = 1.0
        if deg >= 1:
            q[1] = (x - a[0]) / b[1]
            d1[1] = 1.0 / b[1]
        for k in range(1, deg):
            q[k + 1] = ((x - a[k]) * q[k] - b[k] * q[k - 1]) / b[k + 1]
            d1[k + 1] = (q[k] + (x - a[k]) * d1[k] - b[k] * d1[k - 1]) / b[k + 1]
            d2[k + 1] = (2 * d1[k] + (x - a[k]) * d2[k] - b[k] * d2[k - 1]) / b[k + 1]
        signs = np.array([self.kind.sign(p) for p in range(deg + 1)])[:, None]
        return q * signs, d1 * signs, d2 * signs

    def quadrature(self, nodes: int) -> tuple[np.ndarray, np.ndarray]:
        return gauss_quadrature(self, nodes)

    def linearize(self, m: int, n: int) -> np.ndarray:
        """Coefficients c_0..c_{m+n} of Q_m Q_n = sum_k c_k Q_k (cached)."""
        if m < 0 or n < 0:
            raise ValueError("degrees must be nonnegative")
        if m + n > self.max_degree:
            raise ValueError(
                f"product degree {m + n} exceeds max_degree {self.max_degree}"
            )
        key = (m, n) if m <= n else (n, m)
        with self._lock:
            hit = self._lin_cache.get(key)
        if hit is not None:
            return hit
        x, w = self.quadrature(m + n + 1)
        q = self.eval_all(x, deg=m + n)
        c = q[: m + n + 1] @ (w * q[key[0]] * q[key[1]])
        c.setflags(write=False)
        with self._lock:
            self._lin_cache[key] = c
        return c


def make_basis(kind: BasisKind, max_degree: int) -> Basis:
    """Build a Basis and verify its invariants (hard failure on discrepancy)."""
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    if max_degree > HARD_DEGREE_CAP:
        raise ValueError(
            f"max_degree {max_degree} exceeds the stable-recurrence cap {HARD_DEGREE_CAP}"
        )
    a, b = kind.recurrence(max_degree)
    lams = np.array([kind.eigenvalue(p) for p in range(max_degree + 1)])
    basis = Basis(kind, max_degree, a, b, lams)
    _check_basis(basis)
    return basis


def gauss_quadrature(basis: Basis, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule for mu: `nodes` points integrate degree <= 2*nodes-1 exactly.

    Weights are positive and sum to one (mu is a probability measure); at
    extreme rule sizes (hundreds of nodes) the outermost weights can underflow
    to zero in double precision.
    """
    if nodes < 1:
        raise ValueError("need at least one node")
    if nodes > basis.max_degree + 1:
        raise ValueError(
            f"{nodes}-point rule needs recurrence depth {nodes - 1}, "
            f"basis has max_degree {basis.max_degree}"
        )
    a, b = basis.rec_a, basis.rec_b
    if nodes == 1:
        return a[:1].copy(), np.ones(1)
    jac = np.diag(a[:nodes]) + np.diag(b[1:nodes], 1) + np.diag(b[1:nodes], -1)
    x, vec = np.linalg.eigh(jac)
    w = vec[0, :] ** 2
    return x, w


def linearize(basis: Basis, m: int, n: int) -> np.ndarray:
    """Product linearization Q_m Q_n = sum_k c_k Q_k; see Basis.linearize."""
    return basis.linearize(m, n)


def _check_basis(basis: Basis) -> None:
    deg = basis.max_degree
    lams = basis.eigenvalues
    if lams[0] != 0.0:
        raise RuntimeError(f"{basis.kind.label()}: lambda_0 = {lams[0]}, expected 0")
    if deg >= 1 and not np.all(np.diff(lams) > 0):
        raise RuntimeError(f"{basis.kind.label()}: eigenvalues not strictly increasing")
    if np.any(lams < 0):
        raise RuntimeError(f"{basis.kind.label()}: negative eigenvalue")
    if deg == 0:
        return

    x, w = basis.quadrature(deg + 1)
    # Extreme-node weights can underflow to exact zero around degree ~400;
    # they are squares, so anything negative would be a real defect.
    if np.any(w < 0):
        raise RuntimeError(f"{basis.kind.label()}: negative quadrature weight")
    if abs(w.sum() - 1.0) > 1e-12:
        raise RuntimeError(f"{basis.kind.label()}: quadrature weights sum to {w.sum()}")

    # Orthonormality via the Christoffel identity: at the Gauss nodes the
    # columns Q_0..Q_deg(x_i), normalized to unit length, form an orthonormal
    # matrix.  (Eigenvector-derived weights lose all relative accuracy once
    # they fall below ~1e-30, so they cannot be used to scale this check.)
    with np.errstate(over="ignore", invalid="ignore"):
        q = basis.eval_all(x)
    if not np.all(np.isfinite(q)):
        raise RuntimeError(
            f"{basis.kind.label()}: values overflow at degree {deg}; "
            "invariants cannot be verified"
        )
    colmax = np.abs(q).max(axis=0)
    qn = q / colmax
    qn /= np.sqrt((qn * qn).sum(axis=0))
    err = np.abs(qn @ qn.T - np.eye(deg + 1)).max()
    if not err <= EPS_ORTH:
        raise RuntimeError(
            f"{basis.kind.label()}: orthonormality defect {err:.3e} at degree {deg}"
        )

    # Eigenrelation L Q_p = -lambda_p Q_p at the Gauss nodes, measured on the
    # same per-node normalized scale so the check stays meaningful when
    # polynomial values grow large.
    _, d1, d2 = basis.eval_with_derivatives(x)
    sigma, tau = basis.kind.generator_coefficients(x)
    node_scale = qn[0] / q[0]
    for p in range(deg + 1):
        resid = (sigma * d2[p] + tau * d1[p] + lams[p] * q[p]) * node_scale
        if not np.abs(resid).max() <= EPS_EIG * (1.0 + lams[p]):
            raise RuntimeError(
                f"{basis.kind.label()}: eigenrelation fails at degree {p} "
                f"(residual {np.abs(resid).max():.3e}, lambda = {lams[p]})"
            )
