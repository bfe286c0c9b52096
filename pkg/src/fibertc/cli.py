"""Scenario runner: JSON scenario in, JSON report and path polylines out.

    fibertc run <config> [--seed N] [--samples N] [--report PATH] [--export-dir PATH]

``<config>`` is a path to a scenario file or the name of a shipped scenario.
Exit status: 0 when every applicable check passes and the piece count meets
``expected_piece_count``; 1 otherwise; 2 when the scenario does not parse or
its planner cannot be built.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigurationError, FibertcError
from .geometry.domains import (FiberedDomain, FullProduct, band_domain, base_neighborhood_domain,
                               based_domain, diagonal_domain, quotient_domain, require_member)
from .geometry.maps import cylinder_inclusion, cylinder_projection, map_from_descriptor
from .geometry.spaces import as_point, get_space, product_space
from .paths import geodesic
from .planner import builtins, constructions, controls
from .planner.core import HomotopySpec, Planner, evaluate_planner
from .verify import VerificationConfig, verify_planner

SCENARIO_DIR = Path(__file__).parent / "scenarios"
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# -- configuration ----------------------------------------------------------------

@dataclass
class ScenarioConfig:
    name: str
    space: str
    planner: dict
    f: Optional[dict] = None
    g: Optional[dict] = None
    verification: dict = field(default_factory=dict)
    expected_piece_count: Optional[dict] = None
    exports: list = field(default_factory=list)
    description: str = ""
    expected_failure: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ConfigurationError("scenario needs a non-empty name")
        get_space(self.space)
        if (self.f is None) != (self.g is None):
            raise ConfigurationError("f and g must be given together")
        validate_recipe(self.planner)
        VerificationConfig.from_dict(self.verification)
        epc = self.expected_piece_count
        if epc is not None:
            if isinstance(epc, int):
                self.expected_piece_count = epc = {"value": epc}
            if not isinstance(epc.get("value"), int) or epc.get("relation", "eq") not in ("eq", "le"):
                raise ConfigurationError(f"bad expected_piece_count {epc!r}")
        for ex in self.exports:
            if set(ex) - {"pair", "samples", "file"} or "pair" not in ex or len(ex["pair"]) != 2:
                raise ConfigurationError(f"bad export request {ex!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigurationError("scenario must be a JSON object")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown scenario fields {sorted(unknown)}")
        missing = {"name", "space", "planner"} - set(d)
        if missing:
            raise ConfigurationError(f"missing scenario fields {sorted(missing)}")
        return cls(**d)

    def to_dict(self) -> dict:
        out = {"name": self.name, "space": self.space, "planner": self.planner,
               "verification": self.verification, "exports": self.exports,
               "description": self.description}
        for key in ("f", "g", "expected_piece_count", "expected_failure"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out


def load_scenario(ref) -> ScenarioConfig:
    path = Path(ref)
    if not path.exists():
        shipped = SCENARIO_DIR / f"{ref}.json"
        if not shipped.exists():
            raise ConfigurationError(f"no scenario file or shipped scenario named {ref!r}")
        path = shipped
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return ScenarioConfig.from_dict(data)


def shipped_scenarios() -> list:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.json"))


# -- recipes ----------------------------------------------------------------------

BUILTINS = {
    # name: (required args, optional args)
    "circle": (set(), set()),
    "torus": (set(), set()),
    "sphere_antipodal": ({"n"}, set()),
    "diagonal": ({"space"}, set()),
    "convex": ({"space"}, set()),
    "shorter_arc": (set(), set()),
    "ccw": (set(), set()),
    "control_seam": (set(), set()),
}

OPS = {
    "restrict": ({"planner"}, {"domain", "n_probe"}),
    "transport_iso": ({"planner", "phi", "phi_inv"}, set()),
    "transport_fhe": ({"planner", "equivalence"}, set()),
    "transport_fhe_back": ({"planner", "equivalence"}, set()),
    "dominate": ({"planner", "domain", "homotopy"}, set()),
    "product": ({"left", "right"}, set()),
    "combine": ({"planners"}, set()),
    "to_loop": ({"planner"}, {"mode"}),
    "cat_round_trip": ({"planner"}, {"base"}),
    "based_loop_from_cat": ({"planner"}, {"base"}),
    "corrupt": ({"planner", "kind"}, {"amount"}),
}

CORRUPTIONS = ("gap", "overlap", "broken_endpoint", "perturbed_midpoint")


def _check_args(node, table, key):
    name = node[key]
    if name not in table:
        raise ConfigurationError(f"unknown {key} {name!r}")
    required, optional = table[name]
    args = set(node) - {key}
    if required - args:
        raise ConfigurationError(f"{key} {name!r} is missing {sorted(required - args)}")
    if args - required - optional:
        raise ConfigurationError(f"{key} {name!r} got unexpected {sorted(args - required - optional)}")


def validate_recipe(node) -> None:
    """Structural check: registered names and well-formed arities, recursively."""
    if not isinstance(node, dict) or ("builtin" in node) == ("op" in node):
        raise ConfigurationError(f"recipe node needs exactly one of 'builtin' or 'op': {node!r}")
    if "builtin" in node:
        _check_args(node, BUILTINS, "builtin")
        return
    _check_args(node, OPS, "op")
    op = node["op"]
    if op == "product":
        validate_recipe(node["left"])
        validate_recipe(node["right"])
    elif op == "combine":
        if not isinstance(node["planners"], list) or not node["planners"]:
            raise ConfigurationError("combine needs a non-empty list of planners")
        for child in node["planners"]:
            validate_recipe(child)
    else:
        validate_recipe(node["planner"])
    if op == "corrupt" and node["kind"] not in CORRUPTIONS:
        raise ConfigurationError(f"unknown corruption {node['kind']!r}")
    if op in ("transport_fhe", "transport_fhe_back") and node["equivalence"] not in EQUIVALENCES:
        raise ConfigurationError(f"unknown equivalence {node['equivalence']!r}")
    if op == "dominate" and node["homotopy"].get("name") not in DOMINATIONS:
        raise ConfigurationError(f"unknown domination homotopy {node['homotopy']!r}")


def build_domain(spec: dict):
    kind = spec.get("kind")
    try:
        if kind == "full":
            return FullProduct(get_space(spec["space"]))
        if kind == "diagonal":
            return diagonal_domain(get_space(spec["space"]))
        if kind == "based":
            return based_domain(get_space(spec["space"]), as_point(spec["base"]))
        if kind == "quotient":
            return quotient_domain(get_space(spec["quotient"]))
        if kind == "fibered":
            return FiberedDomain(map_from_descriptor(spec["f"]), map_from_descriptor(spec["g"]),
                                 float(spec.get("fiber_tol", 1e-9)))
        if kind == "band":
            return band_domain(get_space(spec["space"]), float(spec["radius"]))
        if kind == "base_neighborhood":
            return base_neighborhood_domain(get_space(spec["space"]), as_point(spec["base"]),
                                            float(spec["radius"]))
    except KeyError as exc:
        raise ConfigurationError(f"domain {kind!r} is missing {exc}") from exc
    raise ConfigurationError(f"unknown domain kind {kind!r}")


def _cylinder_equivalence():
    """S^1 <-> S^1 x [0,1]: u at height 0, v forgets the height.

    H((theta, h), t) = (theta, t h) runs from u∘v to the identity;
    H' is constant since v∘u is the identity.
    """
    cyl, s1 = get_space("cylinder"), get_space("S1")
    u, v = cylinder_inclusion(0.0), cylinder_projection()

    def squash(p, ts):
        out = np.repeat(p[None, :], len(ts), axis=0)
        out[:, 2] = ts * p[2]
        return out

    H = HomotopySpec(cyl, squash, lambda p: u(v(p)), lambda p: p, "u∘v", "id")
    H_prime = HomotopySpec(s1, lambda p, ts: np.repeat(p[None, :], len(ts), axis=0),
                           lambda p: p, lambda p: v(u(p)), "id", "v∘u")
    return u, v, H, H_prime


EQUIVALENCES = {"cylinder": _cylinder_equivalence}


def _pair_homotopy(X, move):
    return HomotopySpec(product_space(X, X), move, lambda b: b, lambda b: move(b, np.ones(1))[0],
                        "inclusion", "into A")


def _slide_to_diagonal(X, spec):
    """D((x, y), t) = (x, geodesic y -> x at t): deforms a band around the diagonal onto it."""
    d = X.ambient_dim

    def move(b, ts):
        x, y = b[:d], b[d:]
        return np.concatenate([np.repeat(x[None, :], len(ts), axis=0), geodesic(X, y, x).func(ts)], axis=1)

    return _pair_homotopy(X, move)


def _slide_to_base(X, spec):
    """D((x, y), t) = (geodesic x -> x0 at t, y): deforms a neighbourhood of x0 onto {x0} x X."""
    d = X.ambient_dim
    base = X.check(spec["base"])

    def move(b, ts):
        x, y = b[:d], b[d:]
        return np.concatenate([geodesic(X, x, base).func(ts), np.repeat(y[None, :], len(ts), axis=0)], axis=1)

    return _pair_homotopy(X, move)


DOMINATIONS = {"slide_to_diagonal": _slide_to_diagonal, "slide_to_base": _slide_to_base}


class _Build:
    """Recipe evaluation state: cat witnesses produced along the way are kept for verification."""

    def __init__(self, scenario: ScenarioConfig):
        self.scenario = scenario
        self.witnesses = []

    def default_domain(self):
        sc = self.scenario
        if sc.f is None:
            raise ConfigurationError("restrict without a domain needs scenario-level f and g")
        return FiberedDomain(map_from_descriptor(sc.f), map_from_descriptor(sc.g))

    def builtin(self, node) -> Planner:
        name = node["builtin"]
        if name == "circle":
            return builtins.circle_planner()
        if name == "torus":
            return builtins.torus_planner()
        if name == "sphere_antipodal":
            return builtins.sphere_antipodal_planner(int(node["n"]))
        if name == "diagonal":
            return builtins.diagonal_planner(get_space(node["space"]))
        if name == "convex":
            return builtins.convex_planner(get_space(node["space"]))
        if name == "shorter_arc":
            return builtins.shorter_arc_planner()
        if name == "ccw":
            return builtins.ccw_planner()
        return controls.seam_planner()

    def witness(self, pl, node):
        base = node.get("base")
        w = constructions.planner_to_cat_cover(pl, None if base is None else as_point(base))
        self.witnesses.append(w)
        return w

    def __call__(self, node) -> Planner:
        if "builtin" in node:
            return self.builtin(node)
        op = node["op"]
        if op == "product":
            return builtins.product_planner(self(node["left"]), self(node["right"]))
        if op == "combine":
            return constructions.combine_cover_planners([self(c) for c in node["planners"]])
        pl = self(node["planner"])
        if op == "restrict":
            dom = build_domain(node["domain"]) if "domain" in node else self.default_domain()
            return constructions.restrict_planner(pl, dom, n_probe=int(node.get("n_probe", 2048)))
        if op == "transport_iso":
            return constructions.transport_bundle_iso(pl, map_from_descriptor(node["phi"]),
                                                      map_from_descriptor(node["phi_inv"]))
        if op == "transport_fhe":
            u, v, H, H_prime = EQUIVALENCES[node["equivalence"]]()
            return constructions.transport_fhe(pl, u, v, H, H_prime)
        if op == "transport_fhe_back":
            u, v, _, H_prime = EQUIVALENCES[node["equivalence"]]()
            return constructions.transport_fhe_back(pl, u, v, H_prime)
        if op == "dominate":
            D = DOMINATIONS[node["homotopy"]["name"]](pl.space, node["homotopy"])
            return constructions.dominate_planner(pl, build_domain(node["domain"]), D)
        if op == "to_loop":
            return constructions.to_loop_planner(pl, node.get("mode", "free-loop"))
        if op == "cat_round_trip":
            return constructions.cat_cover_to_planner(self.witness(pl, node))
        if op == "based_loop_from_cat":
            return constructions.based_loop_planner_from_cat(self.witness(pl, node))
        kind = node["kind"]
        if kind == "gap":
            return controls.with_gap(pl)
        if kind == "overlap":
            return controls.with_overlap(pl)
        if kind == "broken_endpoint":
            return controls.with_broken_endpoint(pl)
        return controls.with_perturbed_midpoint(pl, float(node.get("amount", 0.01)))


def build_planner(scenario: ScenarioConfig):
    """Planner described by the recipe, plus any cat witnesses built on the way."""
    build = _Build(scenario)
    pl = build(scenario.planner)
    if pl.space.name != get_space(scenario.space).name:
        raise ConfigurationError(f"recipe yields a planner on {pl.space.name}, scenario declares {scenario.space}")
    return pl, build.witnesses


# -- exports ------------------------------------------------------------------------

def export_records(pl: Planner, pairs, n_path_samples: int) -> list:
    """One record per (pair, t): pair index, piece label, subpart index, t, coords."""
    ts = np.linspace(0.0, 1.0, n_path_samples)
    records = []
    for i, (x, y) in enumerate(pairs):
        x, y = pl.space.check(x), pl.space.check(y)
        require_member(pl.domain, x, y)
        path, piece, sub = evaluate_planner(pl, x, y)
        for t, c in zip(ts, path.func(ts)):
            records.append({"pair": i, "piece": pl.pieces[piece].label, "subpart": sub,
                            "t": float(t), "coords": [float(v) for v in c]})
    return records


def export_path_samples(pl: Planner, pairs, n_path_samples: int, path) -> Path:
    """Write sampled paths; ``.jsonl`` gives JSON lines, anything else columnar text."""
    path = Path(path)
    records = export_records(pl, pairs, n_path_samples)
    header = {"mode": pl.mode, "space": pl.space.name, "pieces": [p.label for p in pl.pieces],
              "n_path_samples": n_path_samples}
    if path.suffix == ".jsonl":
        lines = [json.dumps({"header": header}, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in records]
    else:
        dim = pl.space.ambient_dim
        lines = ["# " + json.dumps(header, sort_keys=True),
                 "\t".join(["pair", "piece", "subpart", "t"] + [f"c{k}" for k in range(dim)])]
        for r in records:
            lines.append("\t".join([str(r["pair"]), r["piece"], str(r["subpart"]), repr(r["t"])]
                                   + [repr(c) for c in r["coords"]]))
    path.write_text("\n".join(lines) + "\n")
    return path


# -- running ---------------------------------------------------------------------------

def count_matches(expected: Optional[dict], count: int) -> bool:
    if expected is None:
        return True
    if expected.get("relation", "eq") == "le":
        return count <= expected["value"]
    return count == expected["value"]


def run_scenario(scenario: ScenarioConfig, seed=None, samples=None, report_path=None,
                 export_dir=None) -> tuple:
    """Build, verify and report.  Returns (exit status, report dict)."""
    vcfg = dict(scenario.verification)
    if seed is not None:
        vcfg["seed"] = seed
    if samples is not None:
        vcfg["n_samples"] = samples
    cfg = VerificationConfig.from_dict(vcfg)
    pl, witnesses = build_planner(scenario)
    report = verify_planner(pl, cfg, witnesses).to_dict()
    matched = count_matches(scenario.expected_piece_count, pl.count)
    report["scenario"] = scenario.name
    report["expected_piece_count"] = (None if scenario.expected_piece_count is None
                                      else {**scenario.expected_piece_count, "matched": matched})
    status = EXIT_PASS if report["pass"] and matched else EXIT_FAIL
    report["exit_status"] = status
    if report_path is not None:
        Path(report_path).write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    if scenario.exports:
        out_dir = Path(export_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        for k, ex in enumerate(scenario.exports):
            name = ex.get("file", f"{scenario.name}-{k}.jsonl")
            export_path_samples(pl, [tuple(as_point(p) for p in ex["pair"])],
                                int(ex.get("samples", cfg.n_path_samples)), out_dir / name)
    return status, report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fibertc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="verify the planner of one scenario")
    run.add_argument("config", help="scenario file or shipped scenario name")
    run.add_argument("--seed", type=int)
    run.add_argument("--samples", type=int)
    run.add_argument("--report", help="report path (default: <name>.report.json)")
    run.add_argument("--export-dir", help="directory for path exports (default: .)")
    sub.add_parser("list", help="list shipped scenarios")
    args = parser.parse_args(argv)

    if args.command == "list":
        for name in shipped_scenarios():
            print(name)
        return EXIT_PASS
    try:
        scenario = load_scenario(args.config)
        report_path = args.report or f"{scenario.name}.report.json"
        status, report = run_scenario(scenario, args.seed, args.samples, report_path, args.export_dir)
    except (FibertcError, ValueError, TypeError) as exc:
        print(f"fibertc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    failed = [k for k, v in report["checks"].items() if v["status"] == "fail"]
    epc = report["expected_piece_count"]
    line = f"{scenario.name}: {'PASS' if status == EXIT_PASS else 'FAIL'} pieces={report['piece_count']}"
    if epc is not None and not epc["matched"]:
        line += f" expected {'<=' if epc.get('relation') == 'le' else '=='} {epc['value']}"
    if failed:
        line += " failed=" + ",".join(failed)
    print(line)
    return status


if __name__ == "__main__":
    sys.exit(main())
