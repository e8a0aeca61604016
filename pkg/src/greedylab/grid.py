"""Finite search universes for the constant estimators.

Every coordinate of a grid vector is ``0`` or ``magnitude * sign`` with the
magnitude taken from a ladder and the sign from a finite unimodular set.  The
moduli of grid vectors are kept as exact ladder values (never recomputed
with ``abs``) so greedy-set tie tests are exact even over the complex field.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from decimal import Decimal
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError, SizeError
from .spaces import Field, unit_roots

DEFAULT_LADDER = (0.0, 0.25, 0.5, 1.0, 2.0)
DEFAULT_MAX_DIM = 12
MAX_UNIVERSE = 3_000_000


@dataclass(frozen=True)
class GridSpec:
    dimension: int
    magnitudes: tuple = DEFAULT_LADDER
    signs: tuple = (1.0, -1.0)
    max_support: int | None = None
    indicator_augmented: bool = True

    def __post_init__(self):
        mags = tuple(float(m) for m in self.magnitudes)
        if not mags or mags[0] != 0.0:
            raise InputError("the magnitude ladder must start at 0")
        if any(b <= a for a, b in zip(mags, mags[1:])):
            raise InputError("magnitudes must be strictly increasing")
        if len(mags) < 2:
            raise InputError("the ladder needs a nonzero magnitude")
        signs = tuple(_plain(s) for s in self.signs)
        if not signs or any(abs(abs(s) - 1.0) > 1e-12 for s in signs):
            raise InputError("signs must be unimodular")
        if len(set(signs)) != len(signs):
            raise InputError("repeated sign")
        if self.dimension < 1:
            raise InputError("grid dimension must be positive")
        cap = self.dimension if self.max_support is None else int(self.max_support)
        if not 0 <= cap:
            raise InputError("max_support must be nonnegative")
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "max_support", min(cap, self.dimension))

    @classmethod
    def default(cls, dimension: int, field: Field | str = Field.REAL, roots: int = 8, **kw) -> "GridSpec":
        signs = unit_roots(roots) if Field(field) is Field.COMPLEX else (1.0, -1.0)
        return cls(dimension, signs=signs, **kw)

    @property
    def is_full(self) -> bool:
        return self.max_support >= self.dimension

    @property
    def indicator_closed(self) -> bool:
        """Closed under adding ``t * 1_{eps A}`` on disjoint supports.

        Iterating that map from any vector reaches every ladder vector, so
        closure means the universe is the full product ladder.
        """
        return self.is_full or self.indicator_augmented

    @property
    def is_complex(self) -> bool:
        return any(isinstance(s, complex) for s in self.signs)

    def scaled(self, factor: float) -> "GridSpec":
        return GridSpec(
            self.dimension,
            tuple(m * factor for m in self.magnitudes),
            self.signs,
            self.max_support,
            self.indicator_augmented,
        )

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "magnitudes": list(self.magnitudes),
            "signs": [_sign_json(s) for s in self.signs],
            "max_support": self.max_support,
            "indicator_augmented": self.indicator_augmented,
        }

    @property
    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @cached_property
    def universe(self) -> "Universe":
        return Universe(self)


def _plain(s):
    s = complex(s)
    return s.real if s.imag == 0 else s


def _sign_json(s):
    return [s.real, s.imag] if isinstance(s, complex) else s


def parse_magnitudes(values: Sequence) -> tuple:
    """Parse ladder entries from config, rejecting non-dyadic decimals."""
    out = []
    for v in values:
        f = float(v)
        if Decimal(str(v)) != Decimal(f):
            raise InputError(f"magnitude {v} is not exactly representable in binary")
        out.append(f)
    return tuple(out)


def grid_from_config(cfg: Mapping, dimension: int, field: Field | str) -> GridSpec:
    signs_cfg = cfg.get("signs", "auto")
    if signs_cfg == "auto":
        roots = 8 if Field(field) is Field.COMPLEX else 2
    elif isinstance(signs_cfg, Mapping) and "roots" in signs_cfg:
        roots = int(signs_cfg["roots"])
    else:
        raise InputError(f"bad signs spec {signs_cfg!r}; use 'auto' or {{'roots': K}}")
    if Field(field) is Field.REAL and roots != 2:
        raise InputError("a real space needs the sign set {+1, -1} (roots: 2)")
    return GridSpec(
        dimension,
        parse_magnitudes(cfg.get("magnitudes", DEFAULT_LADDER)),
        unit_roots(roots) if roots != 2 else (1.0, -1.0),
        cfg.get("max_support"),
        bool(cfg.get("indicator_augmented", True)),
    )


class Universe:
    """All grid vectors in lexicographic code order.

    Coordinate code 0 is the zero value; code ``1 + i*S + j`` is
    ``magnitudes[i+1] * signs[j]`` where ``S = len(signs)``.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        d, S = grid.dimension, len(grid.signs)
        nz = len(grid.magnitudes) - 1
        self.radix = 1 + nz * S
        if self.radix**d > MAX_UNIVERSE:
            raise SizeError(f"grid universe of {self.radix}**{d} vectors exceeds the cap {MAX_UNIVERSE}")
        mags = np.array(grid.magnitudes)
        signs = np.array(grid.signs, dtype=complex if grid.is_complex else float)
        self.code_value = np.concatenate([[0], np.repeat(mags[1:], S) * np.tile(signs, nz)])
        self.code_modulus = np.concatenate([[0.0], np.repeat(mags[1:], S)])
        self.code_sign = np.concatenate([[0], np.tile(signs, nz)]).astype(self.code_value.dtype)

        codes = np.indices((self.radix,) * d).reshape(d, -1).T
        if not grid.indicator_closed:
            codes = codes[(codes > 0).sum(axis=1) <= grid.max_support]
        self.codes = np.ascontiguousarray(codes)
        self.place = self.radix ** np.arange(d - 1, -1, -1, dtype=np.int64)
        self.keys = self.codes @ self.place

    def __len__(self):
        return len(self.codes)

    @cached_property
    def values(self) -> np.ndarray:
        return self.code_value[self.codes]

    @cached_property
    def moduli(self) -> np.ndarray:
        return self.code_modulus[self.codes]

    @cached_property
    def unit_signs(self) -> np.ndarray:
        return self.code_sign[self.codes]

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        """Row indices of the given code rows; -1 where not in the universe."""
        keys = codes @ self.place
        pos = np.searchsorted(self.keys, keys)
        pos = np.minimum(pos, len(self.keys) - 1)
        return np.where(self.keys[pos] == keys, pos, -1)

    def leading_chunks(self) -> list[np.ndarray]:
        """Row indices grouped by the code of the first coordinate."""
        lead = self.codes[:, 0]
        return [np.flatnonzero(lead == c) for c in range(self.radix) if np.any(lead == c)]
