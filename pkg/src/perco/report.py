"""Verification reports: typed records plus JSON/CSV serialization.

All serialization is deterministic: keys sorted, fractions rendered as
"p/q" strings, floats via repr.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional


def render_value(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return v
    if isinstance(v, (list, tuple)):
        return [render_value(x) for x in v]
    return v


@dataclass
class DominanceRecord:
    """One stochastic-order claim between two path laws."""

    inequality: str
    lhs: dict
    rhs: dict
    holds: bool
    applicable: bool = True
    note: str = ""
    certificate: Optional[list] = None
    violating_up_set: Optional[list] = None

    def to_json(self) -> dict:
        out = {
            "inequality": self.inequality,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
            "applicable": self.applicable,
        }
        if self.note:
            out["note"] = self.note
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.violating_up_set is not None:
            out["violating_up_set"] = self.violating_up_set
        return out

    def csv_row(self) -> dict:
        return {
            "claim": self.inequality,
            "lhs": json.dumps(self.lhs, sort_keys=True),
            "rhs": json.dumps(self.rhs, sort_keys=True),
            "gap": "",
            "method": "exact",
            "n": "",
            "holds": self.holds if self.applicable else "n/a",
        }


@dataclass
class ScalarRecord:
    """One numeric inequality or monotonicity claim."""

    claim: str
    lhs: object
    rhs: object
    gap: object
    method: str
    n: int
    holds: bool
    applicable: bool = True
    note: str = ""
    values: Optional[list] = None

    def to_json(self) -> dict:
        out = {
            "claim": self.claim,
            "lhs": render_value(self.lhs),
            "rhs": render_value(self.rhs),
            "gap": render_value(self.gap),
            "method": self.method,
            "n": self.n,
            "holds": self.holds,
            "applicable": self.applicable,
        }
        if self.note:
            out["note"] = self.note
        if self.values is not None:
            out["values"] = render_value(self.values)
        return out

    def csv_row(self) -> dict:
        return {
            "claim": self.claim,
            "lhs": render_value(self.lhs),
            "rhs": render_value(self.rhs),
            "gap": render_value(self.gap),
            "method": self.method,
            "n": self.n,
            "holds": self.holds if self.applicable else "n/a",
        }


CSV_FIELDS = ["claim", "lhs", "rhs", "gap", "method", "n", "holds"]


@dataclass
class Report:
    kind: str
    records: List = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.records if r.applicable)

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "meta": self.meta,
            "all_hold": self.all_hold,
            "records": [r.to_json() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for r in self.records:
            writer.writerow(r.csv_row())
        return buf.getvalue()
