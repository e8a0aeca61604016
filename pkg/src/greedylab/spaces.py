"""Finite-dimensional p-normed spaces with their canonical basis.

A space is a dimension, an exponent ``0 < p <= 1``, a scalar field and a
p-norm.  The basis is always the coordinate basis; conditional behaviour is
obtained by changing the norm, never the vectors, so the biorthogonal
functionals are plain coordinate read-offs.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import ContractError, InputError, SizeError

Scalar = Union[float, complex]

__all__ = [
    "Field",
    "CoeffVector",
    "WeightedLp",
    "SummingAugmentedLp",
    "MatrixNorm",
    "PSpace",
    "GeomConstants",
    "geom_constants",
    "golden_section",
    "eta_p",
    "AxiomReport",
    "check_axioms",
    "ConvexityRecord",
    "check_convexity_bounds",
    "BUILTIN_SPACES",
    "builtin_space",
    "space_from_config",
    "space_to_config",
    "unit_roots",
]


class Field(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


@dataclass(frozen=True)
class CoeffVector:
    """Element ``f = sum e_n^*(f) e_n`` stored as its nonzero coefficients.

    Indices are 1-based.  ``entries`` accepts a mapping or pairs and is
    normalised to a sorted tuple with zeros dropped.
    """

    dimension: int
    entries: tuple = ()

    def __post_init__(self):
        if not isinstance(self.dimension, (int, np.integer)) or self.dimension < 1:
            raise InputError(f"dimension must be a positive integer, got {self.dimension!r}")
        raw = self.entries.items() if isinstance(self.entries, Mapping) else self.entries
        cleaned = {}
        for n, value in raw:
            n = int(n)
            if not 1 <= n <= self.dimension:
                raise InputError(f"index {n} outside 1..{self.dimension}")
            if value != 0:
                cleaned[n] = _plain_scalar(value)
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "entries", tuple(sorted(cleaned.items())))

    @classmethod
    def zero(cls, dimension: int) -> "CoeffVector":
        return cls(dimension)

    @classmethod
    def from_dense(cls, values: Sequence[Scalar]) -> "CoeffVector":
        values = list(values)
        return cls(len(values), [(i + 1, v) for i, v in enumerate(values)])

    @classmethod
    def basis(cls, dimension: int, n: int) -> "CoeffVector":
        return cls(dimension, [(n, 1.0)])

    @property
    def support(self) -> frozenset:
        return frozenset(n for n, _ in self.entries)

    def coeff(self, n: int) -> Scalar:
        for m, value in self.entries:
            if m == n:
                return value
        return 0.0

    def is_zero(self) -> bool:
        return not self.entries

    @property
    def max_modulus(self) -> float:
        """``max_{n in supp f} |e_n^*(f)|``, 0 for the zero vector."""
        return max((abs(v) for _, v in self.entries), default=0.0)

    def dense(self) -> np.ndarray:
        is_complex = any(isinstance(v, complex) for _, v in self.entries)
        out = np.zeros(self.dimension, dtype=complex if is_complex else float)
        for n, value in self.entries:
            out[n - 1] = value
        return out

    def _check_same(self, other: "CoeffVector"):
        if not isinstance(other, CoeffVector):
            return NotImplemented
        if other.dimension != self.dimension:
            raise InputError(f"dimension mismatch: {self.dimension} vs {other.dimension}")
        return None

    def __add__(self, other):
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        acc = dict(self.entries)
        for n, value in other.entries:
            acc[n] = acc.get(n, 0.0) + value
        return CoeffVector(self.dimension, acc)

    def __sub__(self, other):
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, t):
        if not isinstance(t, (int, float, complex, np.number)):
            return NotImplemented
        return CoeffVector(self.dimension, [(n, t * v) for n, v in self.entries])

    __rmul__ = __mul__

    def to_list(self) -> list:
        """Dense JSON-friendly list (complex entries become ``[re, im]``)."""
        return [_scalar_to_json(v) for v in self.dense().tolist()]


def _plain_scalar(value) -> Scalar:
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return value.real if value.imag == 0 else value
    return float(value)


def _scalar_to_json(value):
    if isinstance(value, complex):
        if value.imag == 0:
            return value.real
        return [value.real, value.imag]
    return float(value)


# --------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class WeightedLp:
    weights: tuple

    kind = "weighted_lp"

    def evaluate(self, x: np.ndarray, p: float) -> np.ndarray:
        w = np.asarray(self.weights, dtype=float)
        return _root(np.sum(w * _abs_pow(x, p), axis=-1), p)


@dataclass(frozen=True)
class SummingAugmentedLp:
    """``(sum w_n |f_n|^p + max_k |f_1 + ... + f_k|^p)^(1/p)``."""

    weights: tuple

    kind = "summing_augmented_lp"

    def evaluate(self, x: np.ndarray, p: float) -> np.ndarray:
        w = np.asarray(self.weights, dtype=float)
        partial = np.max(np.abs(np.cumsum(x, axis=-1)), axis=-1)
        return _root(np.sum(w * _abs_pow(x, p), axis=-1) + partial**p, p)


@dataclass(frozen=True)
class MatrixNorm:
    """Weighted ``l_p`` norm of ``M f``; ``matrix`` is row-major."""

    matrix: tuple
    weights: tuple

    kind = "matrix"

    @cached_property
    def _m(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    def evaluate(self, x: np.ndarray, p: float) -> np.ndarray:
        # broadcast-and-sum instead of matmul: BLAS blocking would make the
        # rounding depend on batch size
        y = (x[..., None, :] * self._m).sum(axis=-1)
        return WeightedLp(self.weights).evaluate(y, p)


NormSpec = Union[WeightedLp, SummingAugmentedLp, MatrixNorm]


def _abs_pow(x: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(x)
    return a if p == 1 else a**p


def _root(s: np.ndarray, p: float) -> np.ndarray:
    return s if p == 1 else s ** (1.0 / p)


@dataclass(frozen=True)
class PSpace:
    dimension: int
    p: float
    field: Field
    norm_spec: NormSpec
    name: str = ""

    def __post_init__(self):
        if self.dimension < 1:
            raise InputError("dimension must be positive")
        if not 0 < self.p <= 1:
            raise InputError(f"p must lie in (0, 1], got {self.p}")
        object.__setattr__(self, "field", Field(self.field))
        spec = self.norm_spec
        if len(spec.weights) != self.dimension:
            raise InputError(f"{len(spec.weights)} weights for dimension {self.dimension}")
        # zero weights are accepted on purpose: the axiom checker must be able
        # to see a degenerate norm
        if any(w < 0 or not math.isfinite(w) for w in spec.weights):
            raise InputError("weights must be finite and nonnegative")
        if isinstance(spec, MatrixNorm):
            m = np.asarray(spec.matrix, dtype=float)
            if m.shape != (self.dimension, self.dimension):
                raise InputError(f"matrix shape {m.shape} does not match dimension {self.dimension}")
            if np.linalg.matrix_rank(m) < self.dimension:
                raise InputError("matrix must be invertible")

    @property
    def is_complex(self) -> bool:
        return self.field is Field.COMPLEX

    def norm(self, f: CoeffVector) -> float:
        if f.dimension != self.dimension:
            raise InputError(f"vector of dimension {f.dimension} in space of dimension {self.dimension}")
        return float(self.norm_spec.evaluate(f.dense(), self.p))

    def norm_array(self, x: np.ndarray) -> np.ndarray:
        """Norms of the rows of ``x`` (shape ``(..., dimension)``)."""
        x = np.asarray(x)
        if x.shape[-1] != self.dimension:
            raise InputError(f"last axis {x.shape[-1]} does not match dimension {self.dimension}")
        return self.norm_spec.evaluate(x, self.p)


# --------------------------------------------------------------------------
# geometric constants


@dataclass(frozen=True)
class GeomConstants:
    p: float
    A_p: float
    B_p: float


def geom_constants(p: float, field: Field | str = Field.REAL) -> GeomConstants:
    if not 0 < p <= 1:
        raise InputError(f"p must lie in (0, 1], got {p}")
    a = (2.0**p - 1.0) ** (-1.0 / p)
    base = 4.0 if Field(field) is Field.COMPLEX else 2.0
    return GeomConstants(p=p, A_p=a, B_p=base ** (1.0 / p) * a)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(func, lo: float, hi: float, tol: float = 1e-9, max_iter: int = 500):
    """Minimise a unimodal ``func`` on ``[lo, hi]``; returns ``(x, func(x))``.

    Never evaluates outside the interval, unlike ``scipy.optimize.golden``.
    """
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = func(x1), func(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = func(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = func(x2)
    x = 0.5 * (lo + hi)
    return x, func(x)


def _eta_objective(p: float, u: float):
    a = geom_constants(p).A_p

    def phi(t):
        first = (1.0 - t**p) ** (-1.0 / p)
        second = (1.0 - (1.0 + t / (a * u)) ** (-p)) ** (-1.0 / p)
        return first * second

    return phi


def eta_p(p: float, u: float, delta: float = 1e-9, tol: float = 1e-9) -> float:
    """Minimum over ``t`` in (0, 1) of the truncation-bound weight function."""
    if not 0 < p <= 1:
        raise InputError(f"p must lie in (0, 1], got {p}")
    if not u > 0:
        raise InputError(f"u must be positive, got {u}")
    _, value = golden_section(_eta_objective(p, u), delta, 1.0 - delta, tol=tol)
    return float(value)


# --------------------------------------------------------------------------
# axiom checks


@dataclass
class AxiomReport:
    passed: bool
    positivity: bool
    homogeneity: bool
    p_triangle: bool
    samples: int
    seed: int
    worst_homogeneity_error: float
    worst_triangle_slack: float
    quasi_triangle_constant: float
    seminormalization: float
    counterexample: dict | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _random_vectors(rng, count, dim, is_complex):
    vals = rng.standard_normal((count, dim))
    if is_complex:
        vals = vals + 1j * rng.standard_normal((count, dim))
    mask = rng.random((count, dim)) < 0.5
    return np.where(mask, vals, 0)


def check_axioms(space: PSpace, sample_count: int = 10_000, seed: int = 0) -> AxiomReport:
    """Sampled check of positivity, homogeneity and the p-triangle inequality."""
    rng = np.random.default_rng(seed)
    d, p = space.dimension, space.p
    f = _random_vectors(rng, sample_count, d, space.is_complex)
    g = _random_vectors(rng, sample_count, d, space.is_complex)
    t = rng.standard_normal(sample_count) * 4
    if space.is_complex:
        t = t * np.exp(2j * np.pi * rng.random(sample_count))
    basis = np.eye(d)
    counterexample = None

    probes = np.concatenate([basis, f, g])
    probe_norms = space.norm_array(probes)
    nonzero = np.any(probes != 0, axis=-1)
    bad = np.flatnonzero(nonzero & ~(probe_norms > 0))
    positivity = bad.size == 0
    if not positivity:
        i = bad[0]
        counterexample = {"axiom": "positivity", "f": _row_to_json(probes[i]), "norm": float(probe_norms[i])}

    nf = space.norm_array(f)
    ntf = space.norm_array(t[:, None] * f)
    expected = np.abs(t) * nf
    rel = np.abs(ntf - expected) / np.maximum(expected, np.finfo(float).tiny)
    rel = np.where(expected == 0, np.abs(ntf), rel)
    worst_h = float(rel.max(initial=0.0))
    homogeneity = worst_h <= 1e-12
    if not homogeneity and counterexample is None:
        i = int(np.argmax(rel))
        counterexample = {"axiom": "homogeneity", "f": _row_to_json(f[i]), "t": _scalar_to_json(complex(t[i]))}

    ng = space.norm_array(g)
    nfg = space.norm_array(f + g)
    rhs = nf**p + ng**p
    slack = (rhs - nfg**p) / np.maximum(1.0, rhs)
    worst_t = float(slack.min(initial=np.inf))
    p_triangle = worst_t >= -1e-12
    if not p_triangle and counterexample is None:
        i = int(np.argmin(slack))
        counterexample = {"axiom": "p_triangle", "f": _row_to_json(f[i]), "g": _row_to_json(g[i])}

    denom = nf + ng
    with np.errstate(invalid="ignore", divide="ignore"):
        k_ratio = np.where(denom > 0, nfg / denom, 0.0)
    coord = np.abs(probes) / np.where(probe_norms > 0, probe_norms, np.inf)[:, None]
    semi = max(float(probe_norms[:d].max()), float(coord.max()))

    return AxiomReport(
        passed=positivity and homogeneity and p_triangle,
        positivity=positivity,
        homogeneity=homogeneity,
        p_triangle=p_triangle,
        samples=sample_count,
        seed=seed,
        worst_homogeneity_error=worst_h,
        worst_triangle_slack=worst_t,
        quasi_triangle_constant=float(k_ratio.max(initial=0.0)),
        seminormalization=semi,
        counterexample=counterexample,
    )


def _row_to_json(row):
    return [_scalar_to_json(complex(v)) if np.iscomplexobj(row) else float(v) for v in row]


# --------------------------------------------------------------------------
# convexity bounds


def unit_roots(k: int) -> tuple:
    """The ``k``-th roots of unity, with exact values for k in {1, 2, 4}."""
    if k < 1:
        raise InputError("need at least one root of unity")
    out = []
    for j in range(k):
        if (4 * j) % k == 0:
            out.append((1.0, 1j, -1.0, -1j)[4 * j // k])
        else:
            out.append(complex(np.exp(2j * np.pi * j / k)))
    return tuple(out)


@dataclass
class ConvexityRecord:
    item: str
    lhs: float
    rhs: float
    slack: float
    holds: bool
    applicable: bool = True


def check_convexity_bounds(
    space: PSpace,
    g: CoeffVector,
    J: Iterable[int],
    coeffs: Sequence[Scalar],
    *,
    items: Sequence[str] = ("a", "b", "c"),
    roots: int = 8,
    cap: int = 20,
    tol: float = 1e-12,
) -> list[ConvexityRecord]:
    """Both sides of the three convexity bounds by exhaustive enumeration.

    ``coeffs`` are aligned with ``sorted(J)``.  Item ``a`` needs coefficients
    in [0, 1]; items ``b`` and ``c`` need modulus at most 1.  An item whose
    hypothesis fails is returned with ``applicable=False``.
    """
    J = sorted(set(int(j) for j in J))
    coeffs = list(coeffs)
    if len(J) > cap:
        raise SizeError(f"|J| = {len(J)} exceeds the enumeration cap {cap}")
    if len(coeffs) != len(J):
        raise InputError("one coefficient per index of J is required")
    if g.dimension != space.dimension:
        raise InputError("g lives in a different dimension")
    if any(not 1 <= j <= space.dimension for j in J):
        raise InputError("J has indices outside the space")
    if g.support & set(J):
        raise ContractError("J must be disjoint from supp(g)")

    cols = np.array(J, dtype=int) - 1
    base = g.dense().astype(complex if space.is_complex else float)
    a = np.zeros(space.dimension, dtype=base.dtype)
    a[cols] = coeffs
    lhs_g = float(space.norm_array(base + a))
    lhs_0 = float(space.norm_array(a))

    subsets = np.array(list(itertools.product((0.0, 1.0), repeat=len(J))), dtype=float).reshape(-1, len(J))
    subset_vecs = np.zeros((len(subsets), space.dimension), dtype=base.dtype)
    subset_vecs[:, cols] = subsets
    sup_a = float(space.norm_array(base + subset_vecs).max())
    sup_c = float(space.norm_array(subset_vecs.real).max())

    sign_set = unit_roots(roots) if space.is_complex else (1.0, -1.0)
    n_patterns = len(sign_set) ** len(J)
    if "b" in items and n_patterns > 2**22:
        raise SizeError(f"{n_patterns} sign patterns exceed the enumeration cap")
    gc = geom_constants(space.p, space.field)
    records = []
    for item in items:
        if item == "a":
            ok = all(not isinstance(c, complex) and 0 <= c <= 1 for c in coeffs)
            lhs, rhs = lhs_g, gc.A_p * sup_a
        elif item == "b":
            ok = all(abs(c) <= 1 for c in coeffs)
            pats = np.array(list(itertools.product(sign_set, repeat=len(J)))).reshape(-1, len(J))
            vecs = np.zeros((len(pats), space.dimension), dtype=complex if space.is_complex else float)
            vecs[:, cols] = pats if space.is_complex else pats.real
            lhs, rhs = lhs_g, gc.A_p * float(space.norm_array(base + vecs).max())
        elif item == "c":
            ok = all(abs(c) <= 1 for c in coeffs)
            lhs, rhs = lhs_0, gc.B_p * sup_c
        else:
            raise InputError(f"unknown item {item!r}")
        slack = (rhs - lhs) / max(1.0, rhs)
        records.append(ConvexityRecord(item, lhs, rhs, slack, slack >= -tol, applicable=ok))
    return records


# --------------------------------------------------------------------------
# built-in spaces and config


BUILTIN_SPACES = ("lp", "weighted", "summing", "matrix")


def builtin_space(name: str, dimension: int, p: float, field: Field | str = Field.REAL) -> PSpace:
    """Named example spaces.

    ``lp``: unweighted l_p (symmetric basis).  ``weighted``: l_p with weights
    ``2^-(n-1)`` (unconditional, not conservative).  ``summing``: l_p plus the
    sup of partial sums (conditional).  ``matrix``: l_p norm of partial sums.
    """
    ones = tuple(1.0 for _ in range(dimension))
    if name == "lp":
        spec = WeightedLp(ones)
    elif name == "weighted":
        spec = WeightedLp(tuple(2.0 ** -(n) for n in range(dimension)))
    elif name == "summing":
        spec = SummingAugmentedLp(ones)
    elif name == "matrix":
        m = tuple(tuple(1.0 if j <= i else 0.0 for j in range(dimension)) for i in range(dimension))
        spec = MatrixNorm(m, ones)
    else:
        raise InputError(f"unknown built-in space {name!r}; choose from {BUILTIN_SPACES}")
    return PSpace(dimension, float(p), Field(field), spec, name=f"{name}(p={p:g},d={dimension})")


def space_from_config(cfg: Mapping) -> PSpace:
    try:
        if "builtin" in cfg:
            space = builtin_space(cfg["builtin"], int(cfg["dimension"]), float(cfg["p"]), cfg.get("field", "real"))
            return PSpace(space.dimension, space.p, space.field, space.norm_spec, name=cfg.get("name", space.name))
        dim = int(cfg["dimension"])
        norm = cfg["norm"]
        kind = norm["kind"]
        weights = tuple(float(w) for w in norm.get("weights", [1.0] * dim))
        if kind == WeightedLp.kind:
            spec = WeightedLp(weights)
        elif kind == SummingAugmentedLp.kind:
            spec = SummingAugmentedLp(weights)
        elif kind == MatrixNorm.kind:
            spec = MatrixNorm(tuple(tuple(float(v) for v in row) for row in norm["matrix"]), weights)
        else:
            raise InputError(f"unknown norm kind {kind!r}")
        return PSpace(dim, float(cfg["p"]), Field(cfg.get("field", "real")), spec, name=cfg.get("name", kind))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad space definition: {exc}") from exc


def space_to_config(space: PSpace) -> dict:
    spec = space.norm_spec
    norm = {"kind": spec.kind, "weights": list(spec.weights)}
    if isinstance(spec, MatrixNorm):
        norm["matrix"] = [list(row) for row in spec.matrix]
    return {
        "name": space.name,
        "dimension": space.dimension,
        "p": space.p,
        "field": space.field.value,
        "norm": norm,
    }
