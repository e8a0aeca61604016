"""Exhaustive lower-bound estimators for the basis constants.

Each estimator maximises a 0-homogeneous defining ratio over every admissible
configuration built from the vectors of a :class:`~greedylab.grid.GridSpec`
and returns the maximum together with the configuration attaining it.  The
value is a certified lower bound for the constant of the space: the witness
can be fed to :func:`witness_ratio` to recompute it.

Indicator sums ``t * 1_{eps A}`` use a height ``t`` from the ladder and any
companion vector ``f`` satisfies ``max |f_n| <= t``; this is the usual
normalisation ``max |f_n| <= 1`` rescaled so that the search is invariant
under scaling the ladder.

The search is vectorised over grid vectors.  For parallel runs the universe is
split by the value of the first coordinate; every chunk reports its best
configuration and the merge keeps the largest value, breaking ties by the
smallest universe row.  Because per-row ratios do not depend on how rows are
batched, results are bit-identical for any worker count.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, InputError, SizeError
from .greedy import Ties, indicator, is_greedy_set, partial_sum, projection, restricted_truncation, truncation, SignPattern
from .grid import DEFAULT_MAX_DIM, GridSpec
from .spaces import CoeffVector, PSpace

log = logging.getLogger(__name__)

# Annex table order first, then the two auxiliary constants.
KINDS = ("Delta_pl", "Delta_s", "Delta", "C_qg", "C_ql", "C_pg", "Gamma_u", "Gamma_t", "D", "C_three")

KIND_INFO = {
    "Delta_pl": ("Δ_pl", "Partially-symmetry for largest coeffs. constant"),
    "Delta_s": ("Δ_s", "Super-conservativeness constant"),
    "Delta": ("Δ", "Conservativeness constant"),
    "C_qg": ("C_qg", "Quasi-greedy constant"),
    "C_ql": ("C_ql", "Quasi-greedy for largest coeffs. constant"),
    "C_pg": ("C_pg", "Partially-greedy constant"),
    "Gamma_u": ("Γ_u", "Restricted truncation operator constant"),
    "Gamma_t": ("Γ_t", "Truncation operator constant"),
    "D": ("D", "Partial-sum remainder domination constant"),
    "C_three": ("C", "Partial-sum symmetry for largest coeffs. constant"),
}

BATCH_ROWS = 4096


@dataclass
class ConstantEstimate:
    kind: str
    value: float
    witness: dict | None
    grid_hash: str
    lower_bound: bool = True
    params: dict = field(default_factory=dict)

    @property
    def symbol(self) -> str:
        return KIND_INFO.get(self.kind, (self.kind, ""))[0]

    @property
    def name(self) -> str:
        return KIND_INFO.get(self.kind, ("", self.kind))[1]

    def to_dict(self) -> dict:
        value = self.value
        if not np.isfinite(value):
            value = "inf"
        out = {
            "kind": self.kind,
            "symbol": self.symbol,
            "name": self.name,
            "value": value,
            "lower_bound": self.lower_bound,
            "witness": self.witness,
            "grid_hash": self.grid_hash,
        }
        if self.params:
            out["params"] = self.params
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ConstantEstimate":
        value = data["value"]
        return cls(
            kind=data["kind"],
            value=float("inf") if value == "inf" else float(value),
            witness=data.get("witness"),
            grid_hash=data.get("grid_hash", ""),
            lower_bound=data.get("lower_bound", True),
            params=data.get("params", {}),
        )


# --------------------------------------------------------------------------
# small combinatorial tables


@lru_cache(maxsize=None)
def _subsets(d: int):
    """Boolean masks of all subsets of ``range(d)`` in bitmask order."""
    ids = np.arange(2**d)
    masks = ((ids[:, None] >> np.arange(d)) & 1).astype(bool)
    sizes = masks.sum(axis=1)
    first = np.where(sizes > 0, masks.argmax(axis=1), d)
    last = np.where(sizes > 0, d - 1 - masks[:, ::-1].argmax(axis=1), -1)
    return masks, sizes, first, last


@lru_cache(maxsize=None)
def _patterns(signs: tuple, mask: tuple):
    """Every sign pattern on ``mask`` as rows of length ``len(mask)``."""
    cols = [i for i, on in enumerate(mask) if on]
    dtype = complex if any(isinstance(s, complex) for s in signs) else float
    combos = list(itertools.product(signs, repeat=len(cols)))
    out = np.zeros((len(combos), len(mask)), dtype=dtype)
    if cols:
        out[:, cols] = np.array(combos, dtype=dtype)
    return out


def _ratio(num, den, zero_over_zero=-np.inf):
    """``num / den`` with ``x/0 = inf`` for ``x > 0`` and a policy for 0/0."""
    out = np.full(np.broadcast(num, den).shape, zero_over_zero, dtype=float)
    np.divide(num, den, out=out, where=den > 0)
    return np.where((den == 0) & (num > 0), np.inf, out)


def _greedy_valid(mod: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Rows for which ``S`` is a greedy set (zero padding allowed)."""
    inside = np.where(S, mod, np.inf).min(axis=-1)
    outside = np.where(S, 0.0, mod).max(axis=-1)
    return inside >= outside


class _Best:
    """Per-row running maximum, keeping the first configuration on ties."""

    def __init__(self, n: int):
        self.val = np.full(n, -np.inf)
        self.cfg = np.full(n, -1, dtype=np.int64)
        self.aux: dict[str, np.ndarray] = {}

    def offer(self, vals: np.ndarray, cfg: int, **aux):
        better = vals > self.val
        if not better.any():
            return
        self.val[better] = vals[better]
        self.cfg[better] = cfg
        for key, arr in aux.items():
            slot = self.aux.setdefault(key, np.full(len(self.val), -1, dtype=np.int64))
            slot[better] = np.broadcast_to(arr, vals.shape)[better]

    def pick(self):
        if not len(self.val) or not np.any(self.val > -np.inf):
            return None
        i = int(np.argmax(self.val))
        return i, float(self.val[i]), int(self.cfg[i]), {k: int(a[i]) for k, a in self.aux.items()}


@dataclass
class _Hit:
    value: float
    row: int
    witness: dict


def _vec(row) -> list:
    return [_scalar(v) for v in np.asarray(row).tolist()]


def _scalar(v):
    if isinstance(v, complex):
        return v.real if v.imag == 0 else [v.real, v.imag]
    return float(v)


def _idx(mask) -> list:
    return [int(i) + 1 for i in np.flatnonzero(mask)]


def _signs_on(values, mask) -> list:
    return [_scalar(complex(v)) for v in np.asarray(values)[np.asarray(mask, dtype=bool)]]


# --------------------------------------------------------------------------
# per-chunk kernels; each returns the best _Hit over the given universe rows


class _Chunk:
    def __init__(self, space: PSpace, grid: GridSpec, rows: np.ndarray):
        U = grid.universe
        self.space, self.grid, self.rows = space, grid, rows
        self.X = U.values[rows]
        self.M = U.moduli[rows]
        self.sgn = U.unit_signs[rows]
        self.codes = U.codes[rows]
        self.supp = self.M > 0
        self.n, self.d = self.X.shape
        self.nx = space.norm_array(self.X)

    def norm(self, v):
        return self.space.norm_array(v)

    def prefix_masks(self):
        d = self.d
        return np.arange(d)[None, :] >= np.arange(d + 1)[:, None]  # row k keeps coords >= k

    def hit(self, best: _Best, make_witness) -> _Hit | None:
        got = best.pick()
        if got is None:
            return None
        i, value, cfg, aux = got
        return _Hit(value, int(self.rows[i]), make_witness(i, cfg, aux))


def _first_sets(mod: np.ndarray) -> np.ndarray:
    """Rank of each coordinate in the lexicographically first greedy ordering."""
    order = np.argsort(-mod, axis=1, kind="stable")
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(mod.shape[1])[None, :].repeat(len(mod), 0), axis=1)
    return rank


def _kernel_cqg(c: _Chunk, ties: str = "all") -> _Hit | None:
    masks, _, _, _ = _subsets(c.d)
    best = _Best(c.n)
    if Ties(ties) is Ties.ALL:
        for s in range(1, len(masks)):
            S = masks[s]
            ok = _greedy_valid(c.M, S) & (c.nx > 0)
            best.offer(np.where(ok, _ratio(c.norm(c.X * S), c.nx), -np.inf), s)
        get_set = lambda i, cfg: masks[cfg]
    else:
        rank = _first_sets(c.M)
        for m in range(1, c.d + 1):
            S = rank < m
            best.offer(np.where(c.nx > 0, _ratio(c.norm(c.X * S), c.nx), -np.inf), m)
        get_set = lambda i, cfg: rank[i] < cfg

    def witness(i, cfg, aux):
        S = get_set(i, cfg)
        return {"f": _vec(c.X[i]), "A": _idx(S)}

    return c.hit(best, witness)


def _kernel_pg(c: _Chunk, ties: str = "all", normfn: Callable | None = None) -> _Hit | None:
    """Partially-greedy ratio; ``normfn(mask)`` gives norms of ``X * mask``."""
    if normfn is None:
        normfn = lambda mask: c.norm(c.X * mask)
    masks, sizes, _, _ = _subsets(c.d)
    tails = np.stack([normfn(m) for m in c.prefix_masks()], axis=1)
    pref = np.minimum.accumulate(tails, axis=1)
    # first k attaining the running minimum
    argpref = np.zeros_like(tails, dtype=np.int64)
    for k in range(1, c.d + 1):
        argpref[:, k] = np.where(tails[:, k] < pref[:, k - 1], k, argpref[:, k - 1])
    nonzero = c.supp.any(axis=1)
    best = _Best(c.n)
    rows = np.arange(c.n)
    if Ties(ties) is Ties.ALL:
        for s in range(len(masks)):
            S, m = masks[s], sizes[s]
            ok = _greedy_valid(c.M, S) & nonzero
            vals = _ratio(normfn(~S), pref[:, m], zero_over_zero=1.0)
            best.offer(np.where(ok, vals, -np.inf), s, k=argpref[:, m])
        get_set = lambda i, cfg: masks[cfg]
    else:
        rank = _first_sets(c.M)
        for m in range(0, c.d + 1):
            S = rank < m
            vals = _ratio(normfn(~S), pref[rows, m], zero_over_zero=1.0)
            best.offer(np.where(nonzero, vals, -np.inf), m, k=argpref[:, m])
        get_set = lambda i, cfg: rank[i] < cfg

    def witness(i, cfg, aux):
        return {"f": _vec(c.X[i]), "A": _idx(get_set(i, cfg)), "k": aux["k"]}

    return c.hit(best, witness)


def _kernel_d(c: _Chunk) -> _Hit | None:
    masks, sizes, first, _ = _subsets(c.d)
    tails = np.stack([c.norm(c.X * m) for m in c.prefix_masks()], axis=1)
    pref = np.minimum.accumulate(tails, axis=1)
    argpref = np.zeros_like(tails, dtype=np.int64)
    for k in range(1, c.d + 1):
        argpref[:, k] = np.where(tails[:, k] < pref[:, k - 1], k, argpref[:, k - 1])
    best = _Best(c.n)
    for s in range(len(masks)):
        Z = masks[s]
        in_supp = ~(Z & ~c.supp).any(axis=1)
        top = np.where(Z, c.M, np.inf).min(axis=1) >= np.where(Z, 0.0, c.M).max(axis=1)
        # 1-based: k < min supp(z) and k <= |supp(z)|
        K = min(int(first[s]), int(sizes[s]))
        ok = in_supp & top & (c.nx > 0)
        vals = _ratio(c.norm(c.X * ~Z), pref[:, K])
        best.offer(np.where(ok, vals, -np.inf), s, k=argpref[:, K])

    def witness(i, cfg, aux):
        Z = masks[cfg]
        return {"f": _vec(c.X[i] * ~Z), "z": _vec(c.X[i] * Z), "k": aux["k"]}

    return c.hit(best, witness)


def _kernel_cql(c: _Chunk) -> _Hit | None:
    masks, _, _, _ = _subsets(c.d)
    t = c.M.max(axis=1)
    top = (c.M == t[:, None]) & (t[:, None] > 0)
    best = _Best(c.n)
    for s in range(1, len(masks)):
        S = masks[s]
        ok = ~(S & ~top).any(axis=1)
        best.offer(np.where(ok, _ratio(c.norm(c.X * S), c.nx), -np.inf), s)

    def witness(i, cfg, aux):
        S = masks[cfg]
        return {
            "f": _vec(c.X[i] * ~S),
            "t": float(t[i]),
            "A": _idx(S),
            "signs_A": _signs_on(c.sgn[i], S),
        }

    return c.hit(best, witness)


def _kernel_gamma(c: _Chunk, which: str) -> _Hit | None:
    masks, _, _, _ = _subsets(c.d)
    best = _Best(c.n)
    for s in range(1, len(masks)):
        S = masks[s]
        ok = _greedy_valid(c.M, S) & ~(S & ~c.supp).any(axis=1)
        level = np.where(S, c.M, np.inf).min(axis=1)
        level = np.where(np.isfinite(level), level, 0.0)
        vec = level[:, None] * c.sgn * S
        if which == "t":
            vec = vec + c.X * ~S
        best.offer(np.where(ok, _ratio(c.norm(vec), c.nx), -np.inf), s)

    def witness(i, cfg, aux):
        return {"f": _vec(c.X[i]), "A": _idx(masks[cfg])}

    return c.hit(best, witness)


def _heights(grid: GridSpec):
    return grid.magnitudes[1:]


def _sign_extremes(c: _Chunk, t: float, S: np.ndarray, base: np.ndarray):
    """max and min over sign patterns eps on S of ``||base + t 1_{eps S}||``."""
    pats = _patterns(c.grid.signs, tuple(bool(b) for b in S))
    vals = c.norm(base[None, :, :] + t * pats[:, None, :])
    return vals.max(axis=0), vals.argmax(axis=0), vals.min(axis=0), vals.argmin(axis=0)


def _pattern_signs(grid: GridSpec, S, index: int) -> list:
    pats = _patterns(grid.signs, tuple(bool(b) for b in S))
    return _signs_on(pats[index], S)


def _kernel_delta_pl(c: _Chunk) -> _Hit | None:
    masks, sizes, first, last = _subsets(c.d)
    nsub = len(masks)
    pairs = [
        (a, b)
        for b in range(nsub)
        for a in range(nsub)
        if not (a & b) and sizes[a] <= sizes[b] and last[a] < first[b]
    ]
    min_supp = np.where(c.supp.any(axis=1), c.supp.argmax(axis=1), c.d)
    fmax = c.M.max(axis=1)
    disjoint = np.stack([~(c.supp & masks[s]).any(axis=1) for s in range(nsub)])
    best = _Best(c.n)
    heights = _heights(c.grid)
    for ti, t in enumerate(heights):
        elig = fmax <= t
        if not elig.any():
            continue
        hi = np.empty((nsub, c.n))
        hi_arg = np.empty((nsub, c.n), dtype=np.int64)
        lo = np.empty((nsub, c.n))
        lo_arg = np.empty((nsub, c.n), dtype=np.int64)
        for s in range(nsub):
            hi[s], hi_arg[s], lo[s], lo_arg[s] = _sign_extremes(c, t, masks[s], c.X)
        for pi, (a, b) in enumerate(pairs):
            ok = elig & disjoint[a] & disjoint[b] & (last[a] < min_supp)
            if not ok.any():
                continue
            vals = _ratio(hi[a], lo[b])
            best.offer(np.where(ok, vals, -np.inf), ti * len(pairs) + pi, ea=hi_arg[a], eb=lo_arg[b])

    def witness(i, cfg, aux):
        ti, pi = divmod(cfg, len(pairs))
        a, b = pairs[pi]
        return {
            "f": _vec(c.X[i]),
            "t": float(heights[ti]),
            "A": _idx(masks[a]),
            "signs_A": _pattern_signs(c.grid, masks[a], aux["ea"]),
            "B": _idx(masks[b]),
            "signs_B": _pattern_signs(c.grid, masks[b], aux["eb"]),
        }

    return c.hit(best, witness)


def _kernel_c_three(c: _Chunk) -> _Hit | None:
    masks, sizes, first, _ = _subsets(c.d)
    nsub = len(masks)
    fmax = c.M.max(axis=1)
    supp_count = np.concatenate([np.zeros((c.n, 1), dtype=int), np.cumsum(c.supp, axis=1)], axis=1)
    prefix = c.prefix_masks()
    best = _Best(c.n)
    heights = _heights(c.grid)
    nk = c.d + 1
    for ti, t in enumerate(heights):
        elig = (fmax <= t) & (c.nx > 0)
        if not elig.any():
            continue
        for s in range(nsub):
            B = masks[s]
            base_ok = elig & ~(c.supp & B).any(axis=1)
            if not base_ok.any():
                continue
            # 1-based k < min B, i.e. 0-based k <= first index of B
            for k in range(0, min(int(first[s]), c.d) + 1):
                ok = base_ok & (supp_count[:, k] <= sizes[s])
                if not ok.any():
                    continue
                _, _, lo, lo_arg = _sign_extremes(c, t, B, c.X * prefix[k])
                vals = _ratio(c.nx, lo)
                best.offer(np.where(ok, vals, -np.inf), (ti * nsub + s) * nk + k, eb=lo_arg)

    def witness(i, cfg, aux):
        rest, k = divmod(cfg, nk)
        ti, s = divmod(rest, nsub)
        return {
            "f": _vec(c.X[i]),
            "t": float(heights[ti]),
            "k": k,
            "B": _idx(masks[s]),
            "signs_B": _pattern_signs(c.grid, masks[s], aux["eb"]),
        }

    return c.hit(best, witness)


def _kernel_renormed_pg(c: _Chunk, table: np.ndarray, ties: str = "all") -> _Hit | None:
    U = c.grid.universe

    def normfn(mask):
        idx = U.lookup(c.codes * mask)
        if np.any(idx < 0):
            raise ContractError("sub-vector outside the grid; the renormed search needs an indicator-closed grid")
        return table[idx]

    return _kernel_pg(c, ties=ties, normfn=normfn)


_KERNELS = {
    "C_qg": _kernel_cqg,
    "C_pg": _kernel_pg,
    "D": _kernel_d,
    "C_ql": _kernel_cql,
    "Gamma_u": lambda c: _kernel_gamma(c, "u"),
    "Gamma_t": lambda c: _kernel_gamma(c, "t"),
    "Delta_pl": _kernel_delta_pl,
    "C_three": _kernel_c_three,
    "C_pg_renormed": _kernel_renormed_pg,
}


def _run_rows(args) -> _Hit | None:
    kind, space, grid, rows, params = args
    kernel = _KERNELS[kind]
    best = None
    for start in range(0, len(rows), BATCH_ROWS):
        hit = kernel(_Chunk(space, grid, rows[start : start + BATCH_ROWS]), **params)
        best = _merge(best, hit)
    return best


def _merge(a: _Hit | None, b: _Hit | None) -> _Hit | None:
    if a is None:
        return b
    if b is None:
        return a
    if b.value > a.value or (b.value == a.value and b.row < a.row):
        return b
    return a


def check_search_space(space: PSpace, grid: GridSpec, max_dim: int = DEFAULT_MAX_DIM):
    if grid.dimension != space.dimension:
        raise InputError(f"grid dimension {grid.dimension} does not match space dimension {space.dimension}")
    if space.dimension > max_dim:
        raise SizeError(f"dimension {space.dimension} exceeds the enumeration cap {max_dim} (raise it with --max-dim)")
    if grid.is_complex and not space.is_complex:
        raise InputError("complex signs on a real space")


def search(kind: str, space: PSpace, grid: GridSpec, *, workers: int = 1, max_dim: int = DEFAULT_MAX_DIM, **params):
    """Run one kernel over the whole universe, optionally in parallel."""
    check_search_space(space, grid, max_dim)
    U = grid.universe
    if workers <= 1:
        chunks = [np.arange(len(U))]
    else:
        chunks = U.leading_chunks()
    jobs = [(kind, space, grid, rows, params) for rows in chunks]
    if workers <= 1 or len(jobs) == 1:
        hits = [_run_rows(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            hits = list(pool.map(_run_rows, jobs))
    best = None
    for hit in hits:
        best = _merge(best, hit)
    return best


def _finish(kind: str, grid: GridSpec, hit: _Hit | None, **params) -> ConstantEstimate:
    if hit is None:
        log.warning("%s: no admissible configuration on grid %s", kind, grid.hash)
        return ConstantEstimate(kind, 0.0, None, grid.hash, params=params)
    return ConstantEstimate(kind, hit.value, hit.witness, grid.hash, params=params)


# --------------------------------------------------------------------------
# public estimators


def estimate_Cqg(space, grid, *, ties="all", workers=1, max_dim=DEFAULT_MAX_DIM) -> ConstantEstimate:
    hit = search("C_qg", space, grid, workers=workers, max_dim=max_dim, ties=Ties(ties).value)
    return _finish("C_qg", grid, hit, **({"ties": "first"} if Ties(ties) is Ties.FIRST else {}))


def estimate_Cql(space, grid, *, workers=1, max_dim=DEFAULT_MAX_DIM) -> ConstantEstimate:
    return _finish("C_ql", grid, search("C_ql", space, grid, workers=workers, max_dim=max_dim))


def estimate_Cpg(space, grid, *, ties="all", workers=1, max_dim=DEFAULT_MAX_DIM) -> ConstantEstimate:
    hit = search("C_pg", space, grid, workers=workers, max_dim=max_dim, ties=Ties(ties).value)
    return _finish("C_pg", grid, hit, **({"ties": "first"} if Ties(ties) is Ties.FIRST else {}))


def estimate_D(space, grid, *, workers=1, max_dim=DEFAULT_MAX_DIM) -> ConstantEstimate:
    return _finish("D", grid, search("D", space, grid, workers=workers, max_dim=max_dim))


def estimate_Delta_pl(space, grid, *, workers=1, max_dim=DEFAULT_MAX_DIM) -> ConstantEstimate:
    return _finish("Delta_pl", grid, search("Delta_pl", space, grid, workers=workers, max_dim=max_dim))


def estimate_C_three(space, grid, *, workers=1, max_dim=DEFAULT_MAX_DIM) -> ConstantEstimate:
    return _finish("C_three", grid, search("C_three", space, grid, workers=workers, max_dim=max_dim))


def estimate_truncation(space, grid, kind: str = "Gamma_u", *, workers=1, max_dim=DEFAULT_MAX_DIM) -> ConstantEstimate:
    if kind not in ("Gamma_u", "Gamma_t"):
        raise InputError(f"kind must be Gamma_u or Gamma_t, got {kind!r}")
    return _finish(kind, grid, search(kind, space, grid, workers=workers, max_dim=max_dim))


def estimate_conservative(space, grid, kind: str = "Delta_s", *, max_dim=DEFAULT_MAX_DIM, **_ignored) -> ConstantEstimate:
    """Conservative (all signs +1) or super-conservative constant.

    Only indicator sums enter, so the ladder plays no role; the search runs
    over all pairs ``A < B`` with ``1 <= |A| <= |B|`` and the grid's signs.
    """
    if kind not in ("Delta", "Delta_s"):
        raise InputError(f"kind must be Delta or Delta_s, got {kind!r}")
    check_search_space(space, grid, max_dim)
    d = space.dimension
    masks, sizes, first, last = _subsets(d)
    signs = (1.0,) if kind == "Delta" else grid.signs
    hi, hi_arg, lo, lo_arg = [], [], [], []
    for s in range(len(masks)):
        vals = space.norm_array(_patterns(signs, tuple(bool(b) for b in masks[s])))
        hi.append(vals.max())
        hi_arg.append(int(vals.argmax()))
        lo.append(vals.min())
        lo_arg.append(int(vals.argmin()))
    best = None
    for a in range(1, len(masks)):
        for b in range(1, len(masks)):
            if sizes[a] > sizes[b] or last[a] >= first[b]:
                continue
            value = float(_ratio(np.array(hi[a]), np.array(lo[b])))
            if best is None or value > best[0]:
                best = (value, a, b)
    if best is None:
        return _finish(kind, grid, None)
    value, a, b = best
    witness = {
        "A": _idx(masks[a]),
        "signs_A": _signs_on(_patterns(signs, tuple(bool(x) for x in masks[a]))[hi_arg[a]], masks[a]),
        "B": _idx(masks[b]),
        "signs_B": _signs_on(_patterns(signs, tuple(bool(x) for x in masks[b]))[lo_arg[b]], masks[b]),
    }
    return ConstantEstimate(kind, value, witness, grid.hash)


def estimate(kind: str, space: PSpace, grid: GridSpec, *, workers=1, max_dim=DEFAULT_MAX_DIM) -> ConstantEstimate:
    """Dispatch by constant name (one of :data:`KINDS`)."""
    if kind == "C_qg":
        return estimate_Cqg(space, grid, workers=workers, max_dim=max_dim)
    if kind == "C_ql":
        return estimate_Cql(space, grid, workers=workers, max_dim=max_dim)
    if kind == "C_pg":
        return estimate_Cpg(space, grid, workers=workers, max_dim=max_dim)
    if kind == "D":
        return estimate_D(space, grid, workers=workers, max_dim=max_dim)
    if kind in ("Delta", "Delta_s"):
        return estimate_conservative(space, grid, kind, max_dim=max_dim)
    if kind == "Delta_pl":
        return estimate_Delta_pl(space, grid, workers=workers, max_dim=max_dim)
    if kind == "C_three":
        return estimate_C_three(space, grid, workers=workers, max_dim=max_dim)
    if kind in ("Gamma_u", "Gamma_t"):
        return estimate_truncation(space, grid, kind, workers=workers, max_dim=max_dim)
    raise InputError(f"unknown constant {kind!r}; choose from {', '.join(KINDS)}")


def estimate_all(space, grid, kinds: Sequence[str] = KINDS, *, workers=1, max_dim=DEFAULT_MAX_DIM) -> dict:
    return {k: estimate(k, space, grid, workers=workers, max_dim=max_dim) for k in kinds}


# --------------------------------------------------------------------------
# witness recomputation, written against the CoeffVector API


def _cv(values, dimension) -> CoeffVector:
    vals = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else v for v in values]
    if len(vals) != dimension:
        raise InputError("witness vector has the wrong length")
    return CoeffVector.from_dense(vals)


def _signed(dimension, A, signs, t=1.0) -> CoeffVector:
    signs = [complex(s[0], s[1]) if isinstance(s, (list, tuple)) else s for s in signs]
    return t * indicator(dimension, A, SignPattern(tuple(zip(A, signs))))


def _max_mod(f: CoeffVector) -> float:
    return f.max_modulus


def witness_ratio(space: PSpace, kind: str, w: dict) -> float:
    """Recompute the defining ratio of ``kind`` at witness ``w``.

    Admissibility of the configuration is checked and a violation raises
    :class:`ContractError`.
    """
    d = space.dimension
    nm = space.norm

    def need(cond, what):
        if not cond:
            raise ContractError(f"{kind} witness violates: {what}")

    def div(a, b, zz=None):
        if b == 0:
            if a == 0:
                if zz is None:
                    raise ContractError("0/0 configuration")
                return zz
            return float("inf")
        return a / b

    if kind == "C_qg":
        f = _cv(w["f"], d)
        need(is_greedy_set(f, w["A"]), "A greedy for f")
        return div(nm(projection(f, w["A"])), nm(f))
    if kind == "C_pg":
        f = _cv(w["f"], d)
        A = w["A"]
        need(is_greedy_set(f, A), "A greedy for f")
        den = min(nm(f - partial_sum(f, k)) for k in range(len(A) + 1))
        need(nm(f - partial_sum(f, w["k"])) == den, "k attains the infimum")
        return div(nm(f - projection(f, A)), den, zz=1.0)
    if kind == "D":
        f, z, k = _cv(w["f"], d), _cv(w["z"], d), w["k"]
        need(not (f.support & z.support), "supp f and supp z disjoint")
        need(k < min(z.support, default=float("inf")), "k < min supp z")
        need(k <= len(z.support), "k <= |supp z|")
        need(_max_mod(f) <= min((abs(v) for _, v in z.entries), default=float("inf")), "max|f| <= min|z|")
        return div(nm(f), nm(f - partial_sum(f, k) + z))
    if kind == "C_ql":
        f, t = _cv(w["f"], d), w["t"]
        need(not (f.support & set(w["A"])), "supp f and A disjoint")
        need(_max_mod(f) <= t, "max|f| <= t")
        ind = _signed(d, w["A"], w["signs_A"], t)
        return div(nm(ind), nm(f + ind))
    if kind in ("Delta", "Delta_s"):
        A, B = w["A"], w["B"]
        need(len(A) <= len(B) and max(A) < min(B), "|A| <= |B| and A < B")
        if kind == "Delta":
            need(all(s == 1 for s in w["signs_A"] + w["signs_B"]), "all signs +1")
        return div(nm(_signed(d, A, w["signs_A"])), nm(_signed(d, B, w["signs_B"])))
    if kind == "Delta_pl":
        f, t, A, B = _cv(w["f"], d), w["t"], w["A"], w["B"]
        need(len(A) <= len(B), "|A| <= |B|")
        need(max(A, default=0) < min(set(B) | f.support, default=float("inf")), "A < supp f u B")
        need(not (set(B) & f.support), "B and supp f disjoint")
        need(_max_mod(f) <= t, "max|f| <= t")
        return div(nm(f + _signed(d, A, w["signs_A"], t)), nm(f + _signed(d, B, w["signs_B"], t)))
    if kind == "C_three":
        f, t, B, k = _cv(w["f"], d), w["t"], w["B"], w["k"]
        need(not (set(B) & f.support), "B and supp f disjoint")
        need(k < min(B, default=float("inf")), "k < min B")
        need(len(partial_sum(f, k).support) <= len(B), "|supp S_k f| <= |B|")
        need(_max_mod(f) <= t, "max|f| <= t")
        return div(nm(f), nm(f - partial_sum(f, k) + _signed(d, B, w["signs_B"], t)))
    if kind == "Gamma_u":
        f = _cv(w["f"], d)
        return div(nm(restricted_truncation(f, w["A"])), nm(f))
    if kind == "Gamma_t":
        f = _cv(w["f"], d)
        return div(nm(truncation(f, w["A"])), nm(f))
    raise InputError(f"unknown constant {kind!r}")
