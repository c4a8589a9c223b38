"""Exact moment functionals and quantitative normal-approximation bounds.

Everything here is quadrature-free coefficient algebra on `SpectralFn`
expansions: fourth and mixed moments, Var Gamma, the spectral inequality
int F (L+eta)^2 F <= eta int F (L+eta) F, the characteristic-function bound

    |E e^{i<t,F>} - E e^{i<t,Z>}|  <=  ||t||^2 sqrt(sum_ij int (C_ij - Gamma(F_i, -L^-1 F_j))^2 dmu),

and the remainder

    R_ij = lambda_j (1/2 int F_i^2 F_j^2 - 1/2 C_ii C_jj - a_ij C_ij^2)
           - C_ij^2 (1 - a_ij) / lambda_j,      a_ij = 2 lambda_j / (lambda_i + lambda_j),

which measures how far the mixed moment int F_i^2 F_j^2 is from its Gaussian
value.  Covariances entering R_ij are the exact ones of the supplied pair.
Tolerances only absorb double-precision rounding.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import EPS_ORTH
from .spectral import (
    CHAOS_TOL,
    EPS_GROUP,
    SpectralFn,
    _check_same_space,
    apply_Linv,
    eigenfunction_eigenvalue,
    gamma,
    inner,
    is_chaotic,
    multiply,
)

CSV_COLUMNS = (
    "i", "j", "lambda_i", "lambda_j", "cov", "mixed22", "isserlis", "r_ij",
    "var_gamma_ij",
)


@dataclass(frozen=True, eq=False)
class GaussianTarget:
    """Covariance matrix of the centered Gaussian comparison vector."""

    cov: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.cov, dtype=float)
        if c.ndim == 0:
            c = c.reshape(1, 1)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("covariance must be a square matrix")
        if np.abs(c - c.T).max() > 1e-12:
            raise ValueError("covariance matrix is not symmetric")
        if np.linalg.eigvalsh(c).min() < -1e-10:
            raise ValueError("covariance matrix is not positive semidefinite")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "cov", c)

    @property
    def dim(self) -> int:
        return self.cov.shape[0]

    def entry(self, i: int, j: int) -> float:
        if not (0 <= i < self.dim and 0 <= j < self.dim):
            raise ValueError(f"index ({i},{j}) out of range for dim {self.dim}")
        return float(self.cov[i, j])


def moment4(f: SpectralFn) -> float:
    """int F^4 dmu = <F^2, F^2>."""
    sq = multiply(f, f)
    return inner(sq, sq)


def mixed22(f: SpectralFn, g: SpectralFn) -> float:
    """int F^2 G^2 dmu = <F^2, G^2>; mixed22(F, F) is moment4(F)."""
    _check_same_space(f, g)
    return inner(multiply(f, f), multiply(g, g))


def var_gamma(f: SpectralFn, g: SpectralFn) -> float:
    """Var Gamma(F,G) = int Gamma(F,G)^2 dmu - (int Gamma(F,G) dmu)^2."""
    h = gamma(f, g)
    return inner(h, h) - h.integral() ** 2


def gaussian_mixed(c: GaussianTarget, i: int, j: int) -> float:
    """E[Z_i^2 Z_j^2] = C_ii C_jj + 2 C_ij^2 for centered Gaussian Z."""
    return c.entry(i, i) * c.entry(j, j) + 2.0 * c.entry(i, j) ** 2


def a_coeff(lambda_i: float, lambda_j: float) -> float:
    """a_ij = 2 lambda_j / (lambda_i + lambda_j); equals 1 when the two agree."""
    if lambda_i + lambda_j <= 0:
        raise ValueError("a_coeff needs lambda_i + lambda_j > 0")
    return 2.0 * lambda_j / (lambda_i + lambda_j)


def thm33_sides(f: SpectralFn, eta: float) -> tuple[float, float]:
    """(int F (L+eta)^2 F dmu, eta int F (L+eta) F dmu).

    For eta at or above the top eigenvalue in the spectrum of F the left side
    never exceeds the right (up to rounding).  A violated precondition is
    reported with a warning; the values are still returned for diagnostics.
    """
    top = max(
        (f.space.eigenvalue(a) for a in f.support()), default=0.0
    )
    if eta < top - EPS_GROUP * (1.0 + abs(top)):
        warnings.warn(
            f"eta = {eta} below the top eigenvalue {top}; inequality not guaranteed",
            stacklevel=2,
        )
    lhs = 0.0
    rhs = 0.0
    for alpha, v in f.items_sorted():
        gap = eta - f.space.eigenvalue(alpha)
        lhs += v * v * gap * gap
        rhs += v * v * gap
    return lhs, eta * rhs


def _gamma_linv(f: SpectralFn, g: SpectralFn) -> SpectralFn:
    """Gamma(F, -L^-1 G)."""
    return gamma(f, -apply_Linv(g))


def prop31_bound(fs: list[SpectralFn] | tuple[SpectralFn, ...],
                 c: GaussianTarget | np.ndarray) -> float:
    """sqrt(sum_ij int (C_ij - Gamma(F_i, -L^-1 F_j))^2 dmu).

    The characteristic-function gap against N(0, C) is at most ||t||^2 times
    this value.  Components must be centered.
    """
    fs = tuple(fs)
    c = c if isinstance(c, GaussianTarget) else GaussianTarget(np.asarray(c))
    if c.dim != len(fs):
        raise ValueError("covariance dimension does not match component count")
    for k, f in enumerate(fs):
        if abs(f.integral()) > EPS_ORTH:
            raise ValueError(f"component {k} is not centered (mean {f.integral()})")
    total = 0.0
    for i, fi in enumerate(fs):
        for j, fj in enumerate(fs):
            dev = _gamma_linv(fi, fj).shift_mean(-c.entry(i, j))
            total += inner(dev, dev)
    return float(np.sqrt(max(total, 0.0)))


def remainder_r(f_i: SpectralFn, f_j: SpectralFn, c: GaussianTarget,
                i: int, j: int, tol: float = CHAOS_TOL) -> float:
    """Mixed-moment remainder R_ij of the supplied eigenfunction pair.

    Uses the pair's exact covariances; vanishes exactly when
    int F_i^2 F_j^2 dmu equals the Gaussian value C_ii C_jj + 2 C_ij^2.
    For distinct eigenvalues the target covariance C_ij must be zero
    (eigenfunctions of different levels are orthogonal).
    """
    _check_same_space(f_i, f_j)
    lam_i = eigenfunction_eigenvalue(f_i, tol)
    lam_j = eigenfunction_eigenvalue(f_j, tol)
    if lam_i <= 0.0 or lam_j <= 0.0:
        raise ValueError("constant components are not admissible (zero eigenvalue)")
    distinct = abs(lam_i - lam_j) > EPS_GROUP * (1.0 + max(lam_i, lam_j))
    if distinct and abs(c.entry(i, j)) > 1e-12:
        raise ValueError(
            f"C[{i},{j}] must vanish across distinct eigenvalues "
            f"({lam_i} vs {lam_j})"
        )
    a_ij = a_coeff(lam_i, lam_j)
    c_ii = inner(f_i, f_i)
    c_jj = inner(f_j, f_j)
    c_ij = inner(f_i, f_j)
    m22 = mixed22(f_i, f_j)
    return (
        lam_j * (0.5 * m22 - 0.5 * c_ii * c_jj - a_ij * c_ij * c_ij)
        - c_ij * c_ij * (1.0 - a_ij) / lam_j
    )


@dataclass(frozen=True)
class FmtReport:
    """Single-function fourth-moment diagnostics."""

    m2: float
    m4: float
    var_gamma: float
    chaotic: bool
    centered: bool

    def to_dict(self) -> dict:
        return {
            "m2": self.m2,
            "m4": self.m4,
            "var_gamma": self.var_gamma,
            "chaotic": self.chaotic,
            "centered": self.centered,
        }


@dataclass(frozen=True, eq=False)
class JointReport:
    """Pairwise fourth-moment diagnostics for a vector of eigenfunctions."""

    components: tuple[FmtReport, ...]
    eigenvalues: tuple[float, ...]
    cov: np.ndarray
    mixed22: np.ndarray
    isserlis: np.ndarray
    r_matrix: np.ndarray
    var_gamma_m: np.ndarray
    prop31: float

    @property
    def dim(self) -> int:
        return len(self.components)

    def to_dict(self) -> dict:
        return {
            "components": [c.to_dict() for c in self.components],
            "eigenvalues": list(self.eigenvalues),
            "cov": self.cov.tolist(),
            "mixed22": self.mixed22.tolist(),
            "isserlis": self.isserlis.tolist(),
            "r_matrix": self.r_matrix.tolist(),
            "var_gamma": self.var_gamma_m.tolist(),
            "prop31": self.prop31,
        }

    def csv_rows(self) -> list[list]:
        """One row per ordered pair (i, j), columns as in CSV_COLUMNS."""
        rows = []
        for i in range(self.dim):
            for j in range(self.dim):
                rows.append([
                    i, j, self.eigenvalues[i], self.eigenvalues[j],
                    float(self.cov[i, j]), float(self.mixed22[i, j]),
                    float(self.isserlis[i, j]), float(self.r_matrix[i, j]),
                    float(self.var_gamma_m[i, j]),
                ])
        return rows


def fmt_report(f: SpectralFn, tol: float = CHAOS_TOL) -> FmtReport:
    return FmtReport(
        m2=inner(f, f),
        m4=moment4(f),
        var_gamma=var_gamma(f, f),
        chaotic=bool(is_chaotic(f, tol)),
        centered=abs(f.integral()) <= EPS_ORTH,
    )


def joint_report(fs: list[SpectralFn] | tuple[SpectralFn, ...],
                 c: GaussianTarget | np.ndarray,
                 tol: float = CHAOS_TOL) -> JointReport:
    fs = tuple(fs)
    c = c if isinstance(c, GaussianTarget) else GaussianTarget(np.asarray(c))
    d = len(fs)
    if c.dim != d:
        raise ValueError("covariance dimension does not match component count")
    comps = tuple(fmt_report(f, tol) for f in fs)
    lams = tuple(eigenfunction_eigenvalue(f, tol) for f in fs)
    cov = np.zeros((d, d))
    m22 = np.zeros((d, d))
    iss = np.zeros((d, d))
    rmat = np.zeros((d, d))
    vg = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            cov[i, j] = inner(fs[i], fs[j])
            m22[i, j] = mixed22(fs[i], fs[j])
            iss[i, j] = gaussian_mixed(c, i, j)
            rmat[i, j] = remainder_r(fs[i], fs[j], c, i, j, tol)
            vg[i, j] = var_gamma(fs[i], -apply_Linv(fs[j]))
    return JointReport(
        components=comps,
        eigenvalues=lams,
        cov=cov,
        mixed22=m22,
        isserlis=iss,
        r_matrix=rmat,
        var_gamma_m=vg,
        prop31=prop31_bound(fs, c),
    )
