"""Multi-coordinate spectral function algebra.

Functions on a product space E = E_1 x ... x E_d carrying mu = mu_1 x ... x mu_d
are stored as finite sparse expansions over the tensor-product eigenbasis
Q_alpha = Q_{alpha_1} x ... x Q_{alpha_d}.  The generator L = sum_i L_i acts
diagonally with eigenvalue -Lambda(alpha), Lambda(alpha) = sum_i lambda_{alpha_i},
which makes L, its pseudo-inverse, the carre du champ
Gamma(F,G) = (L(FG) - F LG - G LF)/2, spectral projections and
chaos-membership checks exact coefficient algebra.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .basis import Basis, BasisKind, make_basis

EPS_GROUP = 1e-9
CHAOS_TOL = 1e-8

MultiIndex = tuple[int, ...]


@dataclass(frozen=True)
class ProductSpace:
    """Ordered list of coordinate bases; the generator is the sum of coordinates."""

    coords: tuple[Basis, ...]

    def __post_init__(self) -> None:
        if not self.coords:
            raise ValueError("a product space needs at least one coordinate")
        object.__setattr__(self, "coords", tuple(self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def validate_index(self, alpha: MultiIndex) -> None:
        if len(alpha) != self.dim:
            raise ValueError(f"multi-index {alpha} has wrong length for dim {self.dim}")
        for i, (d, basis) in enumerate(zip(alpha, self.coords)):
            if d < 0 or d > basis.max_degree:
                raise ValueError(
                    f"degree {d} out of range 0..{basis.max_degree} in coordinate {i}"
                )

    def eigenvalue(self, alpha: MultiIndex) -> float:
        return float(sum(b.eigenvalue(d) for d, b in zip(alpha, self.coords)))

    def zero_index(self) -> MultiIndex:
        return (0,) * self.dim

    def unit(self) -> "SpectralFn":
        return SpectralFn(self, {self.zero_index(): 1.0})

    def basis_fn(self, alpha: MultiIndex, coeff: float = 1.0) -> "SpectralFn":
        return SpectralFn(self, {tuple(alpha): coeff})


def product_space(kind: BasisKind, max_degree: int, dim: int) -> ProductSpace:
    """Product of `dim` identical coordinates (the basis object is shared)."""
    basis = make_basis(kind, max_degree)
    return ProductSpace((basis,) * dim)


@dataclass(frozen=True)
class SpectralFn:
    """A function in L2(E, mu) as a finite sparse map multi-index -> coefficient."""

    space: ProductSpace
    coeffs: dict

    def __post_init__(self) -> None:
        clean: dict[MultiIndex, float] = {}
        for alpha, value in self.coeffs.items():
            alpha = tuple(int(d) for d in alpha)
            self.space.validate_index(alpha)
            value = float(value)
            if not np.isfinite(value):
                raise ValueError(f"non-finite coefficient at {alpha}")
            if value != 0.0:
                clean[alpha] = value
        object.__setattr__(self, "coeffs", clean)

    def items_sorted(self) -> list[tuple[MultiIndex, float]]:
        return sorted(self.coeffs.items())

    def support(self) -> list[MultiIndex]:
        return sorted(self.coeffs)

    def norm2(self) -> float:
        return float(sum(v * v for _, v in self.items_sorted()))

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def integral(self) -> float:
        """Mean of F under mu (the coefficient of the constant Q_0 x ... x Q_0)."""
        return self.coeffs.get(self.space.zero_index(), 0.0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def scale(self, c: float) -> "SpectralFn":
        return SpectralFn(self.space, {a: c * v for a, v in self.items_sorted()})

    def __neg__(self) -> "SpectralFn":
        return self.scale(-1.0)

    def __mul__(self, c: float) -> "SpectralFn":
        return self.scale(float(c))

    __rmul__ = __mul__

    def __add__(self, other: "SpectralFn") -> "SpectralFn":
        _check_same_space(self, other)
        acc = dict(self.items_sorted())
        for alpha, v in other.items_sorted():
            acc[alpha] = acc.get(alpha, 0.0) + v
        return SpectralFn(self.space, acc)

    def __sub__(self, other: "SpectralFn") -> "SpectralFn":
        return self + (-other)

    def shift_mean(self, c: float) -> "SpectralFn":
        """F + c (adds c to the constant coefficient)."""
        acc = dict(self.items_sorted())
        zero = self.space.zero_index()
        acc[zero] = acc.get(zero, 0.0) + float(c)
        return SpectralFn(self.space, acc)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        space = [
            {**b.kind.to_json(), "max_degree": b.max_degree} for b in self.space.coords
        ]
        coeffs = [[list(alpha), v] for alpha, v in self.items_sorted()]
        return {"space": space, "coeffs": coeffs}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "SpectralFn":
        coords = []
        for ent in obj["space"]:
            kind = BasisKind.from_json(ent)
            coords.append(make_basis(kind, int(ent["max_degree"])))
        space = ProductSpace(tuple(coords))
        coeffs = {tuple(alpha): v for alpha, v in obj["coeffs"]}
        return cls(space, coeffs)

    @classmethod
    def from_json(cls, text: str) -> "SpectralFn":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SpectrumLevel:
    eigenvalue: float
    members: tuple[MultiIndex, ...]


@dataclass(frozen=True)
class Spectrum:
    """Support of a SpectralFn grouped by eigenvalue (ascending)."""

    levels: tuple[SpectrumLevel, ...]

    def eigenvalues(self) -> list[float]:
        return [lvl.eigenvalue for lvl in self.levels]

    def __len__(self) -> int:
        return len(self.levels)


def _check_same_space(f: SpectralFn, g: SpectralFn) -> None:
    if f.space != g.space:
        raise ValueError("spectral functions live on different product spaces")


def inner(f: SpectralFn, g: SpectralFn) -> float:
    """L2 inner product int F G dmu = sum_alpha F_alpha G_alpha."""
    _check_same_space(f, g)
    small, large = (f, g) if len(f.coeffs) <= len(g.coeffs) else (g, f)
    return float(
        sum(v * large.coeffs[a] for a, v in small.items_sorted() if a in large.coeffs)
    )


def multiply(f: SpectralFn, g: SpectralFn) -> SpectralFn:
    """Exact pointwise product, via per-coordinate linearization of Q_m Q_n."""
    _check_same_space(f, g)
    space = f.space
    acc: dict[MultiIndex, float] = {}
    for alpha, fa in f.items_sorted():
        for beta, gb in g.items_sorted():
            base = fa * gb
            fixed = [da + db for da, db in zip(alpha, beta)]
            expand: list[tuple[int, np.ndarray]] = []
            for i, (da, db) in enumerate(zip(alpha, beta)):
                if da + db > space.coords[i].max_degree:
                    raise ValueError(
                        f"product degree {da + db} overflows coordinate {i} "
                        f"(max_degree {space.coords[i].max_degree})"
                    )
                if da and db:
                    expand.append((i, space.coords[i].linearize(da, db)))
            _accumulate(acc, tuple(fixed), base, expand, 0)
    return SpectralFn(space, acc)


def _accumulate(acc: dict, idx: tuple, value: float,
                expand: list[tuple[int, np.ndarray]], depth: int) -> None:
    if depth == len(expand):
        acc[idx] = acc.get(idx, 0.0) + value
        return
    coord, c = expand[depth]
    lst = list(idx)
    for k, ck in enumerate(c):
        if ck == 0.0:
            continue
        lst[coord] = k
        _accumulate(acc, tuple(lst), value * ck, expand, depth + 1)


def apply_L(f: SpectralFn) -> SpectralFn:
    """Generator action: coefficient at alpha becomes -Lambda(alpha) F_alpha."""
    space = f.space
    return SpectralFn(
        space, {a: -space.eigenvalue(a) * v for a, v in f.items_sorted()}
    )


def apply_Linv(f: SpectralFn) -> SpectralFn:
    """Pseudo-inverse of L: -F_alpha / Lambda(alpha), constants to zero."""
    space = f.space
    out: dict[MultiIndex, float] = {}
    for alpha, v in f.items_sorted():
        lam = space.eigenvalue(alpha)
        if lam != 0.0:
            out[alpha] = -v / lam
    return SpectralFn(space, out)


def gamma(f: SpectralFn, g: SpectralFn) -> SpectralFn:
    """Carre du champ Gamma(F,G) = (L(FG) - F LG - G LF) / 2."""
    fg = multiply(f, g)
    t = apply_L(fg) - multiply(f, apply_L(g)) - multiply(g, apply_L(f))
    return t.scale(0.5)


def spectrum(f: SpectralFn) -> Spectrum:
    """Group the support of F by eigenvalue with relative tolerance EPS_GROUP."""
    tagged = sorted(
        ((f.space.eigenvalue(a), a) for a in f.support()),
        key=lambda t: (t[0], t[1]),
    )
    levels: list[SpectrumLevel] = []
    cur_anchor: float | None = None
    cur_members: list[MultiIndex] = []
    for lam, alpha in tagged:
        if cur_anchor is None or lam - cur_anchor > EPS_GROUP * (1.0 + abs(cur_anchor)):
            if cur_anchor is not None:
                levels.append(SpectrumLevel(cur_anchor, tuple(cur_members)))
            cur_anchor = lam
            cur_members = [alpha]
        else:
            cur_members.append(alpha)
    if cur_anchor is not None:
        levels.append(SpectrumLevel(cur_anchor, tuple(cur_members)))
    return Spectrum(tuple(levels))


def project(f: SpectralFn, eigenvalue: float) -> SpectralFn:
    """Orthogonal projection onto the eigenvalue's group (zero if absent)."""
    tol = EPS_GROUP * (1.0 + abs(eigenvalue))
    kept = {
        a: v
        for a, v in f.items_sorted()
        if abs(f.space.eigenvalue(a) - eigenvalue) <= tol
    }
    return SpectralFn(f.space, kept)


def eigenfunction_eigenvalue(f: SpectralFn, tol: float = CHAOS_TOL) -> float:
    """Eigenvalue of F, requiring a single spectral level up to relative mass tol."""
    if f.is_zero():
        raise ValueError("the zero function is not an eigenfunction")
    spec = spectrum(f)
    nrm = f.norm()
    significant = [
        lvl
        for lvl in spec.levels
        if np.sqrt(sum(f.coeffs[a] ** 2 for a in lvl.members)) > tol * nrm
    ]
    if len(significant) != 1:
        raise ValueError(
            "not an eigenfunction: spectral mass on eigenvalues "
            f"{[lvl.eigenvalue for lvl in significant]}"
        )
    return significant[0].eigenvalue


@dataclass(frozen=True)
class ChaosCheck:
    """Outcome of a chaos-membership check with per-eigenvalue diagnostics.

    `offenders` lists (eigenvalue, relative mass) for every spectral level of
    the product lying above `limit`; the check passes when all those masses
    stay at or below the tolerance used.
    """

    ok: bool
    eigenvalue: float
    limit: float
    offenders: tuple[tuple[float, float], ...]

    def __bool__(self) -> bool:
        return self.ok


def _membership(prod: SpectralFn, limit: float, tol: float,
                eigenvalue: float) -> ChaosCheck:
    nrm = prod.norm()
    if nrm == 0.0:
        return ChaosCheck(True, eigenvalue, limit, ())
    offenders = []
    ok = True
    slack = EPS_GROUP * (1.0 + abs(limit))
    for lvl in spectrum(prod).levels:
        if lvl.eigenvalue - limit <= slack:
            continue
        mass = float(
            np.sqrt(sum(prod.coeffs[a] ** 2 for a in lvl.members)) / nrm
        )
        offenders.append((lvl.eigenvalue, mass))
        if mass > tol:
            ok = False
    return ChaosCheck(ok, eigenvalue, limit, tuple(offenders))


def is_chaotic(f: SpectralFn, tol: float = CHAOS_TOL) -> ChaosCheck:
    """Does F^2 expand only over eigenvalues <= 2 Lambda_F?  (chaos eigenfunction)"""
    lam = eigenfunction_eigenvalue(f, tol)
    return _membership(multiply(f, f), 2.0 * lam, tol, lam)


def is_jointly_chaotic(f: SpectralFn, g: SpectralFn,
                       tol: float = CHAOS_TOL) -> ChaosCheck:
    """Does FG expand only over eigenvalues <= Lambda_F + Lambda_G?

    A vanishing product is jointly chaotic by convention (vacuous membership).
    """
    lam_f = eigenfunction_eigenvalue(f, tol)
    lam_g = eigenfunction_eigenvalue(g, tol)
    return _membership(multiply(f, g), lam_f + lam_g, tol, lam_f + lam_g)


@dataclass(frozen=True)
class VectorChaosCheck:
    ok: bool
    pairs: tuple[tuple[int, int, ChaosCheck], ...]

    def __bool__(self) -> bool:
        return self.ok


def is_chaotic_vector(fs: list[SpectralFn] | tuple[SpectralFn, ...],
                      tol: float = CHAOS_TOL) -> VectorChaosCheck:
    """Joint chaos of every unordered pair of components, including i = j."""
    fs = tuple(fs)
    if not fs:
        raise ValueError("empty vector")
    for f in fs[1:]:
        _check_same_space(fs[0], f)
    pairs = []
    ok = True
    for i in range(len(fs)):
        for j in range(i, len(fs)):
            chk = is_jointly_chaotic(fs[i], fs[j], tol)
            pairs.append((i, j, chk))
            ok = ok and chk.ok
    return VectorChaosCheck(ok, tuple(pairs))
