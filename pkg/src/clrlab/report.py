"""Trial records, per-trial random streams and report serialization."""
from __future__ import annotations

import csv
import io
import json
import math
import zlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np

REPORT_VERSION = "1"
SLACK = 1e-9



@dataclass
class TrialReport:
    suite: str
    seed: int
    params: dict
    lhs: float
    rhs: float
    ratio: float
    passed: bool
    detail: str = ""


def ratio(num: float, den: float) -> float:
    """``num / den`` with ``0/0 = 0`` and ``x/0 = inf``."""
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return num / den


def upper_report(suite, seed, params, lhs, rhs, slack=SLACK, detail=""):
    """Report for an inequality ``lhs <= rhs``."""
    ok = bool(lhs <= rhs * (1 + slack))
    return TrialReport(suite, seed, params, float(lhs), float(rhs), ratio(lhs, rhs), ok, detail)


def lower_report(suite, seed, params, lhs, rhs, slack=SLACK, detail=""):
    """Report for an inequality ``lhs >= rhs``; the ratio is ``rhs / lhs``."""
    ok = bool(lhs >= rhs * (1 - slack))
    return TrialReport(suite, seed, params, float(lhs), float(rhs), ratio(rhs, lhs), ok, detail)


def equality_report(suite, seed, params, lhs, rhs, rtol, detail=""):
    scale = max(abs(lhs), abs(rhs))
    ok = bool(abs(lhs - rhs) <= rtol * scale)
    return TrialReport(suite, seed, params, float(lhs), float(rhs), ratio(lhs, rhs), ok, detail)


class Sampler:
    """Deterministic random stream for trial ``trial_index`` of a suite."""

    def __init__(self, master_seed: int, trial_index: int, suite: str = ""):
        self.master_seed = int(master_seed)
        self.trial_index = int(trial_index)
        self.suite = suite
        ss = np.random.SeedSequence([self.master_seed & (2 ** 64 - 1),
                                     zlib.crc32(suite.encode()), self.trial_index])
        self.seed = int(ss.generate_state(1, dtype=np.uint64)[0])
        self.rng = np.random.default_rng(self.seed)

    def forced(self, *kinds):
        """Kind of the trial: the first trials cycle through ``kinds``, then ``None``."""
        return kinds[self.trial_index] if self.trial_index < len(kinds) else None


@dataclass
class SuiteResult:
    name: str
    params: dict
    trials: list = field(default_factory=list)
    resamples: int = 0
    info: dict = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return sum(not t.passed for t in self.trials)

    @property
    def max_ratio(self) -> float:
        vals = [t.ratio for t in self.trials if not math.isnan(t.ratio)]
        return max(vals) if vals else 0.0


# -- serialization ---------------------------------------------------------

def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _json(obj: Any) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return _num(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{_json(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _trial_dict(t: TrialReport) -> dict:
    return {"seed": t.seed, "params": t.params, "lhs": t.lhs, "rhs": t.rhs,
            "ratio": t.ratio, "pass": t.passed, "detail": t.detail}


def report_document(suites, master_seed: int, timestamp: str | None = None) -> dict:
    doc = {"version": REPORT_VERSION, "masterSeed": int(master_seed)}
    if timestamp is not None:
        doc["timestamp"] = timestamp
    doc["suites"] = [
        {"name": s.name, "params": s.params,
         "trials": [_trial_dict(t) for t in s.trials],
         "maxRatio": s.max_ratio, "violations": s.violations,
         "resamples": s.resamples, "info": s.info}
        for s in suites
    ]
    return doc


def emit_report(suites, fmt: str = "json", master_seed: int = 0,
                timestamp: str | None = None) -> str:
    """Serialize suite results as ``json``, ``csv`` or ``text``.

    Floats are written with 17 significant digits; non-finite values become
    ``null`` in JSON and empty cells in CSV.
    """
    if fmt == "json":
        doc = report_document(suites, master_seed, timestamp)
        return _json(doc) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("suite", "seed", "params", "lhs", "rhs", "ratio", "pass", "detail"))
        for s in suites:
            for t in s.trials:
                params = ";".join(f"{k}={_num(v) if not isinstance(v, str) else v}"
                                  for k, v in t.params.items())
                w.writerow((s.name, t.seed, params, _cell(t.lhs), _cell(t.rhs),
                            _cell(t.ratio), "true" if t.passed else "false", t.detail))
        return buf.getvalue()
    if fmt == "text":
        lines = [f"master seed {master_seed}"]
        if timestamp is not None:
            lines.append(f"timestamp {timestamp}")
        for s in suites:
            status = "PASS" if s.violations == 0 else "FAIL"
            lines.append(f"{status} {s.name}: {len(s.trials)} trials, "
                         f"{s.violations} violations, max ratio {_num(s.max_ratio)}, "
                         f"resamples {s.resamples}")
            for k, v in s.info.items():
                lines.append(f"    {k}: {v}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _cell(x):
    s = _num(x)
    return "" if s == "null" else s
