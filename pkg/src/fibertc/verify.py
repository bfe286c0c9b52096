"""Sampled certification of planners and LS-category witnesses.

Every check walks an indexed list of domain members and reduces per-sample
outcomes with associative operations (conjunction, maximum with a
lowest-index tie break, sums).  Splitting the samples into chunks, possibly
evaluated by concurrent workers, therefore gives byte-identical reports.
All randomness used for probing a sample is seeded by (seed, sample index).
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, ModeError
from .geometry.domains import FullProduct
from .planner.core import CatWitness, Planner

PASS, FAIL, SKIPPED, NA = "pass", "fail", "skipped", "n/a"
CHECKS = ("partition", "section_contract", "in_space", "fibered_membership",
          "continuity_modulus", "loop_contract", "cat_witness")

# stream tags for per-sample random generators
_PARTNER_STREAM = 7
_CAT_STREAM = 11


@dataclass
class VerificationConfig:
    seed: int = 0
    n_samples: int = 10_000
    n_path_samples: int = 64
    delta: float = 1e-3
    modulus_bound: float = 8.0
    eps_space: float = 1e-9
    eps_glue: float = 1e-9
    fiber_tol: float = 1e-9
    refine_levels: int = 3
    workers: int = 1

    def __post_init__(self):
        for name in ("n_samples", "n_path_samples", "workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be at least 1")
        if self.refine_levels < 0:
            raise ConfigurationError("refine_levels must be non-negative")
        for name in ("delta", "modulus_bound", "eps_space", "eps_glue", "fiber_tol"):
            if not float(getattr(self, name)) > 0:
                raise ConfigurationError(f"{name} must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown verification fields {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CheckResult:
    name: str
    status: str
    worst: float = 0.0
    witness: Optional[dict] = None
    n_checked: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status in (PASS, NA)

    def to_dict(self) -> dict:
        return {"status": self.status, "worst": self.worst, "witness": self.witness,
                "n_checked": self.n_checked, "extra": dict(sorted(self.extra.items()))}


def _witness_key(w):
    return (-w["violation"], w["index"])


def merge_results(a: CheckResult, b: CheckResult) -> CheckResult:
    """Associative merge of two partial results of the same check."""
    if a.name != b.name:
        raise ValueError("cannot merge different checks")
    if a.status == b.status:
        status = a.status
    elif FAIL in (a.status, b.status):
        status = FAIL
    else:
        status = PASS if PASS in (a.status, b.status) else a.status
    witnesses = [w for w in (a.witness, b.witness) if w is not None]
    witness = min(witnesses, key=_witness_key) if witnesses else None
    extra = {}
    for key in sorted(set(a.extra) | set(b.extra)):
        va, vb = a.extra.get(key, 0), b.extra.get(key, 0)
        extra[key] = max(va, vb) if key.startswith("max_") else va + vb
    return CheckResult(a.name, status, max(a.worst, b.worst), witness,
                       a.n_checked + b.n_checked, extra)


def _reduce(results):
    out = results[0]
    for r in results[1:]:
        out = merge_results(out, r)
    return out


def _pt(p):
    return [float(c) for c in np.asarray(p).ravel()]


def _grid(cfg):
    return np.linspace(0.0, 1.0, cfg.n_path_samples)


# -- partition ------------------------------------------------------------------

def _partition_chunk(pl: Planner, cfg, samples) -> CheckResult:
    res = CheckResult("partition", PASS)
    for idx, x, y in samples:
        hits = pl.locate(x, y)
        res.n_checked += 1
        bad = None
        if len(hits) != 1:
            bad = "gap" if not hits else "overlap"
            violation = abs(len(hits) - 1)
        else:
            sub_hits = pl.pieces[hits[0]].subpart_hits(x, y)
            if sub_hits != 1:
                bad = "subpart"
                violation = abs(sub_hits - 1)
        if bad is None:
            continue
        res.status = FAIL
        res.worst = max(res.worst, float(violation))
        res.extra[bad] = res.extra.get(bad, 0) + 1
        w = {"index": idx, "violation": float(violation), "kind": bad, "x": _pt(x), "y": _pt(y),
             "pieces": hits}
        if res.witness is None or _witness_key(w) < _witness_key(res.witness):
            res.witness = w
    return res


# -- section contract / in-space / fibered membership ---------------------------

def _section_chunk(pl: Planner, cfg, samples):
    X = pl.space
    ts = _grid(cfg)
    out = {name: CheckResult(name, PASS) for name in ("section_contract", "in_space", "fibered_membership")}
    fibered = not isinstance(pl.domain, FullProduct)
    if not fibered:
        out["fibered_membership"].status = NA
    for idx, x, y in samples:
        piece = pl.pieces[pl.locate(x, y)[0]]
        path = piece.section(x, y)
        pts = path.func(ts)
        end_target = x if pl.mode != "path" else y
        dev = max(float(X.distance(pts[0], x)), float(X.distance(pts[-1], end_target)))
        _record(out["section_contract"], idx, dev, cfg.eps_space, x, y, piece=piece.label)
        _record(out["in_space"], idx, float(np.max(X.residual(pts))), cfg.eps_space, x, y,
                piece=piece.label)
        if fibered:
            _record(out["fibered_membership"], idx, float(pl.domain.residual(x, y)), cfg.fiber_tol, x, y)
    return out


def _record(res: CheckResult, idx, value, tol, x, y, **info):
    res.n_checked += 1
    res.worst = max(res.worst, value)
    if value > tol:
        res.status = FAIL
        w = {"index": idx, "violation": value, "x": _pt(x), "y": _pt(y), **info}
        if res.witness is None or _witness_key(w) < _witness_key(res.witness):
            res.witness = w


# -- continuity -----------------------------------------------------------------

def _probe(pl, piece_idx, sub, path_a, x, y, partner, ts):
    """(ratio, path gap, pair distance, partner) or None when the partner is not comparable."""
    if partner is None:
        return None
    xb, yb = partner
    hits = pl.locate(xb, yb)
    if hits != [piece_idx]:
        return None
    piece = pl.pieces[piece_idx]
    if piece.subpart_of(xb, yb) != sub:
        return None
    X = pl.space
    dab = float(np.hypot(X.distance(x, xb), X.distance(y, yb)))
    if dab == 0.0:
        return None
    gap = float(np.max(X.distance(path_a, piece.section(xb, yb).func(ts))))
    return gap / dab, gap, dab, partner


def _continuity_chunk(pl: Planner, cfg, samples) -> CheckResult:
    res = CheckResult("continuity_modulus", PASS, extra={"max_ratio": 0.0, "probes": 0,
                                                         "refined": 0, "incomparable": 0})
    ts = _grid(cfg)
    L, eps = cfg.modulus_bound, cfg.eps_space
    dom = pl.domain
    for idx, x, y in samples:
        piece_idx = pl.locate(x, y)[0]
        piece = pl.pieces[piece_idx]
        sub = piece.subpart_of(x, y)
        path_a = piece.section(x, y).func(ts)
        seed = [cfg.seed, _PARTNER_STREAM, idx]
        partners = dom.partners(x, y, cfg.delta, seed)
        res.n_checked += 1
        for k, partner in enumerate(partners):
            probe = _probe(pl, piece_idx, sub, path_a, x, y, partner, ts)
            if probe is None:
                res.extra["incomparable"] += 1
                continue
            res.extra["probes"] += 1
            if probe[1] > L * probe[2] + eps:
                # Re-probe along the same direction at smaller scales: a piece that is
                # continuous but steep near its frontier passes once the scale is below
                # the distance to the frontier; a jump at the sample never does.
                res.extra["refined"] += 1
                for level in range(1, cfg.refine_levels + 1):
                    finer = dom.partners(x, y, cfg.delta * 10.0 ** -level, seed)
                    p = _probe(pl, piece_idx, sub, path_a, x, y, finer[k] if k < len(finer) else None, ts)
                    if p is None:
                        break
                    probe = p
                    if probe[1] <= L * probe[2] + eps:
                        break
            ratio, gap, dab, used = probe
            res.extra["max_ratio"] = max(res.extra["max_ratio"], ratio)
            res.worst = max(res.worst, ratio)
            if gap > L * dab + eps:
                res.status = FAIL
                w = {"index": idx, "violation": ratio, "x": _pt(x), "y": _pt(y),
                     "partner": [_pt(used[0]), _pt(used[1])], "piece": piece.label,
                     "path_gap": gap, "pair_distance": dab}
                if res.witness is None or _witness_key(w) < _witness_key(res.witness):
                    res.witness = w
    return res


# -- loop contract ----------------------------------------------------------------

def _loop_chunk(pl: Planner, cfg, samples) -> CheckResult:
    res = CheckResult("loop_contract", PASS)
    X = pl.space
    t3 = np.array([0.0, 0.5, 1.0])
    for idx, x, y in samples:
        piece = pl.pieces[pl.locate(x, y)[0]]
        pts = piece.section(x, y).func(t3)
        dev = max(float(X.distance(pts[0], x)), float(X.distance(pts[1], y)),
                  float(X.distance(pts[2], x)))
        if pl.mode == "based-loop":
            dev = max(dev, float(X.distance(pts[0], pl.base)), float(X.distance(pts[2], pl.base)))
        _record(res, idx, dev, cfg.eps_space, x, y, piece=piece.label)
    return res


# -- public checks ------------------------------------------------------------------

def draw_samples(pl: Planner, cfg: VerificationConfig) -> list:
    return [(i, x, y) for i, (x, y) in enumerate(pl.domain.sample(cfg.n_samples, cfg.seed))]


def _chunks(samples, n):
    n = max(1, min(n, len(samples)))
    size = -(-len(samples) // n)
    return [samples[i:i + size] for i in range(0, len(samples), size)]


def _run(fn, pl, cfg, samples, workers=None):
    parts = _chunks(samples, cfg.workers if workers is None else workers)
    if len(parts) > 1:
        with ThreadPoolExecutor(max_workers=len(parts)) as ex:
            results = list(ex.map(lambda part: fn(pl, cfg, part), parts))
    else:
        results = [fn(pl, cfg, parts[0])]
    if isinstance(results[0], dict):
        return {k: _reduce([r[k] for r in results]) for k in results[0]}
    return _reduce(results)


def _skipped(name):
    return CheckResult(name, SKIPPED, extra={"reason": "prerequisite failed: partition"})


def check_partition(pl: Planner, cfg: VerificationConfig, samples=None) -> CheckResult:
    samples = draw_samples(pl, cfg) if samples is None else samples
    return _run(_partition_chunk, pl, cfg, samples)


def _section_checks(pl, cfg, samples, partition=None):
    partition = check_partition(pl, cfg, samples) if partition is None else partition
    if not partition.passed:
        out = {k: _skipped(k) for k in ("section_contract", "in_space", "fibered_membership")}
        if isinstance(pl.domain, FullProduct):
            out["fibered_membership"] = CheckResult("fibered_membership", NA)
        return out
    return _run(_section_chunk, pl, cfg, samples)


def check_section_contract(pl: Planner, cfg: VerificationConfig, samples=None) -> CheckResult:
    """Endpoints, in-space path samples and domain membership, folded into one result."""
    samples = draw_samples(pl, cfg) if samples is None else samples
    parts = _section_checks(pl, cfg, samples)
    res = parts["section_contract"]
    if res.status == SKIPPED:
        return res
    for key in ("in_space", "fibered_membership"):
        sub = parts[key]
        res.extra[f"max_{key}"] = sub.worst
        if sub.status == FAIL:
            res.status = FAIL
            res.witness = res.witness or sub.witness
    return res


def check_continuity_modulus(pl: Planner, cfg: VerificationConfig, samples=None,
                             partition=None) -> CheckResult:
    samples = draw_samples(pl, cfg) if samples is None else samples
    partition = check_partition(pl, cfg, samples) if partition is None else partition
    if not partition.passed:
        return _skipped("continuity_modulus")
    return _run(_continuity_chunk, pl, cfg, samples)


def check_loop_contract(pl: Planner, cfg: VerificationConfig, samples=None, partition=None) -> CheckResult:
    if pl.mode not in ("free-loop", "based-loop"):
        raise ModeError("loop contract applies to loop-mode planners only")
    samples = draw_samples(pl, cfg) if samples is None else samples
    partition = check_partition(pl, cfg, samples) if partition is None else partition
    if not partition.passed:
        return _skipped("loop_contract")
    return _run(_loop_chunk, pl, cfg, samples)


# -- cat witnesses ----------------------------------------------------------------

def _cat_chunk(w: CatWitness, cfg, samples) -> CheckResult:
    res = CheckResult("cat_witness", PASS, extra={"max_ratio": 0.0, "uncovered": 0, "probes": 0,
                                                  "max_endpoint": 0.0})
    X, x0 = w.space, w.base
    ts = _grid(cfg)
    L, eps = cfg.modulus_bound, cfg.eps_space

    def fail(idx, violation, y, **info):
        res.status = FAIL
        wit = {"index": idx, "violation": violation, "y": _pt(y), **info}
        if res.witness is None or _witness_key(wit) < _witness_key(res.witness):
            res.witness = wit

    def comparable(i, sub, yb):
        return w.entries[i].contains(yb) and w.entries[i].subpart_of(yb) == sub

    for idx, y in samples:
        res.n_checked += 1
        hits = w.locate(y)
        if not hits:
            res.extra["uncovered"] += 1
            fail(idx, 1.0, y, kind="uncovered")
            continue
        for i in hits:
            entry = w.entries[i]
            ends = entry.homotopy.evaluator(y, np.array([0.0, 1.0]))
            dev = max(float(X.distance(ends[0], x0)), float(X.distance(ends[1], y)))
            res.extra["max_endpoint"] = max(res.extra["max_endpoint"], dev)
            res.worst = max(res.worst, dev)
            if dev > eps:
                fail(idx, dev, y, kind="endpoint", entry=entry.label)
        i = hits[0]
        entry = w.entries[i]
        sub = entry.subpart_of(y)
        h = entry.homotopy.evaluator
        ha = h(y, ts)
        seed = [cfg.seed, _CAT_STREAM, idx]

        def probe(delta):
            yb = X.perturb(y, delta, np.random.default_rng(seed))
            if not comparable(i, sub, yb):
                return None
            d = float(X.distance(y, yb))
            if d == 0.0:
                return None
            gap = float(np.max(X.distance(ha, h(yb, ts))))
            return gap / d, gap, d

        p = probe(cfg.delta)
        if p is None:
            continue
        res.extra["probes"] += 1
        if p[1] > L * p[2] + eps:
            for level in range(1, cfg.refine_levels + 1):
                q = probe(cfg.delta * 10.0 ** -level)
                if q is None:
                    break
                p = q
                if p[1] <= L * p[2] + eps:
                    break
        res.extra["max_ratio"] = max(res.extra["max_ratio"], p[0])
        if p[1] > L * p[2] + eps:
            fail(idx, p[0], y, kind="continuity", entry=entry.label)
    return res


def check_cat_witness(w: CatWitness, cfg: VerificationConfig) -> CheckResult:
    """Cover completeness, h_i(y,0) = x0 and h_i(y,1) = y, and continuity of each h_i."""
    rng = np.random.default_rng([cfg.seed, _CAT_STREAM])
    ys = [w.base] + [w.space.sample_partner(w.base, rng) for _ in range(cfg.n_samples - 1)]
    samples = list(enumerate(ys))
    parts = _chunks(samples, cfg.workers)
    if len(parts) > 1:
        with ThreadPoolExecutor(max_workers=len(parts)) as ex:
            results = list(ex.map(lambda part: _cat_chunk(w, cfg, part), parts))
    else:
        results = [_cat_chunk(w, cfg, parts[0])]
    res = _reduce(results)
    res.extra["entries"] = w.count
    return res


# -- whole report -----------------------------------------------------------------

@dataclass
class VerificationReport:
    checks: dict
    piece_count: int
    planner: dict
    config: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_dict(self) -> dict:
        return {"pass": self.passed, "piece_count": self.piece_count, "planner": self.planner,
                "config": self.config, "checks": {k: v.to_dict() for k, v in self.checks.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def verify_planner(pl: Planner, cfg: VerificationConfig, witnesses=()) -> VerificationReport:
    samples = draw_samples(pl, cfg)
    checks = {}
    checks["partition"] = partition = check_partition(pl, cfg, samples)
    checks.update(_section_checks(pl, cfg, samples, partition))
    checks["continuity_modulus"] = check_continuity_modulus(pl, cfg, samples, partition)
    if pl.mode == "path":
        checks["loop_contract"] = CheckResult("loop_contract", NA)
    else:
        checks["loop_contract"] = check_loop_contract(pl, cfg, samples, partition)
    if witnesses:
        checks["cat_witness"] = _reduce([check_cat_witness(w, cfg) for w in witnesses])
    else:
        checks["cat_witness"] = CheckResult("cat_witness", NA)
    # parallelism is an execution detail: reports must not depend on it
    config = {k: v for k, v in cfg.to_dict().items() if k != "workers"}
    return VerificationReport(checks, pl.count, pl.describe(), config)
