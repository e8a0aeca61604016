"""Inequality ledger over a space's constant estimates.

Every bound relating the constants is evaluated with the estimated values on
both sides.  Both sides are grid lower bounds, so a comparison is only
meaningful when the witness of the left side can be transported into the
search space of the right side; that holds on indicator-closed grids and the
records carry that fact in ``closure_ok``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping

from .constants import ConstantEstimate
from .spaces import Field, eta_p, geom_constants

PASS, FAIL, NA = "PASS", "FAIL", "NOT-APPLICABLE"
REL_TOL = 1e-9


@dataclass
class InequalityRecord:
    id: str
    lhs: float
    rhs: float
    margin: float
    status: str
    closure_ok: bool
    relation: str = "<="
    inputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "margin": _num(self.margin),
            "status": self.status,
            "closure_ok": self.closure_ok,
            "relation": self.relation,
            "inputs": {k: _num(v) for k, v in self.inputs.items()},
        }


def _num(v):
    if v is None:
        return None
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return v


def _values(estimates: Mapping) -> dict:
    out = {}
    for k, v in estimates.items():
        out[k] = v.value if isinstance(v, ConstantEstimate) else (None if v is None else float(v))
    return out


def _decide(lhs: float, rhs: float, relation: str) -> str:
    if relation == "==":
        if math.isinf(lhs) or math.isinf(rhs):
            return PASS if lhs == rhs else FAIL
        return PASS if abs(lhs - rhs) <= REL_TOL * max(1.0, abs(rhs)) else FAIL
    if math.isinf(rhs) and rhs > 0:
        return PASS
    if math.isinf(lhs):
        return FAIL
    return PASS if lhs <= rhs + REL_TOL * max(1.0, rhs) else FAIL


class _Ledger:
    def __init__(self, estimates: Mapping, closure_ok: bool, p: float, field: Field | str):
        self.v = _values(estimates)
        self.closure_ok = closure_ok
        self.p = p
        self.g = geom_constants(p, field)
        self._eta = {}

    def eta(self, u: float) -> float:
        if u not in self._eta:
            self._eta[u] = math.inf if math.isinf(u) else eta_p(self.p, u)
        return self._eta[u]

    def record(self, rid: str, needs: tuple, lhs_fn, rhs_fn, relation: str = "<=", extra=None) -> InequalityRecord:
        inputs = {k: self.v.get(k) for k in needs}
        inputs["p"] = self.p
        missing = any(inputs[k] is None or inputs[k] == 0 for k in needs)
        if missing or not self.closure_ok:
            return InequalityRecord(rid, math.nan, math.nan, math.nan, NA, self.closure_ok, relation, inputs)
        if extra:
            inputs.update(extra(inputs))
        lhs, rhs = float(lhs_fn(inputs)), float(rhs_fn(inputs))
        margin = rhs - lhs if not (math.isinf(lhs) and math.isinf(rhs)) else 0.0
        return InequalityRecord(rid, lhs, rhs, margin, _decide(lhs, rhs, relation), True, relation, inputs)


def _pw(x: float, p: float) -> float:
    return x**p


def check_prop_3_7(estimates: Mapping, p: float, *, field: Field | str = Field.REAL, closure_ok: bool = True):
    L = _Ledger(estimates, closure_ok, p, field)
    Ap = L.g.A_p
    ip = 1.0 / p
    return [
        L.record("prop3.7a.lower", ("Delta_pl", "C_three"), lambda x: x["Delta_pl"], lambda x: x["C_three"]),
        L.record(
            "prop3.7a.upper",
            ("Delta_pl", "C_three"),
            lambda x: x["C_three"],
            lambda x: Ap * x["Delta_pl"],
            extra=lambda x: {"A_p": Ap},
        ),
        L.record("prop3.7b.1", ("Delta_s", "Delta_pl"), lambda x: x["Delta_s"], lambda x: x["Delta_pl"]),
        L.record(
            "prop3.7b.2",
            ("C_ql", "Delta_pl"),
            lambda x: x["C_ql"],
            lambda x: (1 + _pw(x["Delta_pl"], p)) ** ip,
        ),
        L.record(
            "prop3.7b.3",
            ("Delta_pl", "Delta_s", "C_ql"),
            lambda x: x["Delta_pl"],
            lambda x: (1 + (1 + _pw(x["Delta_s"], p)) * _pw(x["C_ql"], p)) ** ip,
        ),
    ]


def check_thm_4_2(estimates: Mapping, p: float, *, field: Field | str = Field.REAL, closure_ok: bool = True):
    L = _Ledger(estimates, closure_ok, p, field)
    Ap = L.g.A_p
    return [
        L.record(
            "thm4.2.1",
            ("C_pg", "Delta_pl", "Gamma_t"),
            lambda x: x["C_pg"],
            lambda x: Ap * x["Delta_pl"] * x["Gamma_t"],
            extra=lambda x: {"A_p": Ap},
        ),
        L.record("thm4.2.2", ("C_qg", "C_pg"), lambda x: x["C_qg"], lambda x: 2 ** (1 / p) * x["C_pg"]),
        L.record("thm4.2.3", ("Delta_pl", "C_pg"), lambda x: x["Delta_pl"], lambda x: x["C_pg"]),
    ]


def check_thm_4_1(estimates: Mapping, *, p: float = 1.0, field: Field | str = Field.REAL, closure_ok: bool = True):
    L = _Ledger(estimates, closure_ok, p, field)
    return L.record("thm4.1", ("D", "C_pg"), lambda x: x["D"], lambda x: x["C_pg"], relation="==")


def check_thm_4_3(estimates: Mapping, p: float, *, field: Field | str = Field.REAL, closure_ok: bool = True):
    L = _Ledger(estimates, closure_ok, p, field)
    Ap, Bp = L.g.A_p, L.g.B_p
    ip = 1.0 / p
    eta = lambda x: {"eta": L.eta(x["C_qg"])}
    geo = lambda x: {"eta": L.eta(x["C_qg"]), "A_p": Ap, "B_p": Bp}
    return [
        L.record(
            "thm4.3.i",
            ("C_pg", "C_qg", "Delta"),
            lambda x: x["C_pg"],
            lambda x: x["C_qg"] * (1 + _pw(Ap * Bp * x["Delta"] * x["C_qg"] * x["eta"], p)) ** ip,
            extra=geo,
        ),
        L.record(
            "thm4.3.ii",
            ("C_pg", "C_qg", "Delta_s"),
            lambda x: x["C_pg"],
            lambda x: x["C_qg"] * (1 + _pw(Ap * x["Delta_s"] * x["eta"], p)) ** ip,
            extra=geo,
        ),
        L.record(
            "thm4.3.iii",
            ("C_pg", "C_qg", "Delta_pl"),
            lambda x: x["C_pg"],
            lambda x: Ap * x["Delta_pl"] * x["C_qg"] * (1 + _pw(x["C_pg"], p) * _pw(x["eta"], p)) ** ip,
            extra=geo,
        ),
        L.record(
            "thm4.3.iii.qg",
            ("C_pg", "C_qg", "Delta_pl"),
            lambda x: x["C_pg"],
            lambda x: Ap * x["Delta_pl"] * x["C_qg"] * (1 + _pw(x["C_qg"], p) * _pw(x["eta"], p)) ** ip,
            extra=geo,
        ),
    ]


def check_thm_3_6(estimates: Mapping, p: float, *, field: Field | str = Field.REAL, closure_ok: bool = True):
    L = _Ledger(estimates, closure_ok, p, field)
    ip = 1.0 / p
    eta = lambda x: {"eta": L.eta(x["C_qg"])}
    return [
        L.record(
            "thm3.6.u",
            ("Gamma_u", "C_qg"),
            lambda x: x["Gamma_u"],
            lambda x: x["C_qg"] ** 2 * x["eta"],
            extra=eta,
        ),
        L.record(
            "thm3.6.t",
            ("Gamma_t", "C_qg"),
            lambda x: x["Gamma_t"],
            lambda x: x["C_qg"] * (1 + _pw(x["C_qg"], p) * _pw(x["eta"], p)) ** ip,
            extra=eta,
        ),
    ]


def check_elementary(estimates: Mapping, p: float, *, field: Field | str = Field.REAL, closure_ok: bool = True):
    """Comparisons that follow directly from the definitions."""
    L = _Ledger(estimates, closure_ok, p, field)
    return [
        L.record("def.ql_le_qg", ("C_ql", "C_qg"), lambda x: x["C_ql"], lambda x: x["C_qg"]),
        L.record("def.cons_le_supercons", ("Delta", "Delta_s"), lambda x: x["Delta"], lambda x: x["Delta_s"]),
    ]


def check_all(estimates: Mapping, p: float, *, field: Field | str = Field.REAL, closure_ok: bool = True):
    kw = dict(field=field, closure_ok=closure_ok)
    return (
        check_prop_3_7(estimates, p, **kw)
        + check_thm_4_2(estimates, p, **kw)
        + [check_thm_4_1(estimates, p=p, **kw)]
        + check_thm_4_3(estimates, p, **kw)
        + check_thm_3_6(estimates, p, **kw)
        + check_elementary(estimates, p, **kw)
    )


def ledger_to_csv(records, space_name: str | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["id", "lhs", "rhs", "margin", "status"]
    w.writerow((["space"] if space_name is not None else []) + head)
    for r in records:
        d = r.to_dict() if isinstance(r, InequalityRecord) else r
        row = [d["id"], repr_num(d["lhs"]), repr_num(d["rhs"]), repr_num(d["margin"]), d["status"]]
        w.writerow(([space_name] if space_name is not None else []) + row)
    return buf.getvalue()


def repr_num(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)
