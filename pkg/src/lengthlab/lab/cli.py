"""Command line interface.

Exit codes: 0 when every check passes (or a query is decided), 1 when any
check fails, 2 when something is unknown but nothing failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import comparison as cmp
from ..covers.cover import BACKENDS, delta_cover, delta_trivial
from ..covers.theorems import HypothesisError, induced_hom
from ..gh import CapExceeded, gh_bounds, gh_exact, pointed_gh_exact
from ..spaces import EdgePath, FiniteMetricSpace, MetricGraph, ModelError, build_metric
from .corpus import FAMILIES
from .experiments import EXPERIMENTS, run_experiment


def _read_json(path):
    return json.loads(Path(path).read_text())


def _emit(data, out=None) -> None:
    text = data if isinstance(data, str) else json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def load_space(path):
    """A distance-matrix JSON or a graph JSON, with its basepoint."""
    data = _read_json(path)
    if "vertices" in data:
        g = MetricGraph.from_json(data)
        return build_metric(g), g.basepoint
    X = FiniteMetricSpace.from_json(data)
    X.check_invariants()
    return X, data.get("basepoint", X.points[0])


def load_loop(g: MetricGraph, path) -> EdgePath:
    """Loop JSON: ``{"start": v, "steps": [[edge, +-1], ...]}`` or ``{"vertices": [...]}``."""
    data = _read_json(path)
    if "steps" in data:
        return EdgePath.from_json(g, data)
    verts = [g.index(v) for v in data["vertices"]]
    steps = []
    for a, b in zip(verts, verts[1:]):
        options = [(g.length(k), k, d) for k, d, w in g.incidence(a) if w == b]
        if not options:
            raise ModelError(f"no edge between {g.vertices[a]!r} and {g.vertices[b]!r}")
        _, k, d = min(options)
        steps.append((k, d))
    return EdgePath.from_steps(g, verts[0], steps)


def _parse_value(text: str):
    if "," in text:
        return [_parse_value(t) for t in text.split(",") if t]
    try:
        return int(text)
    except ValueError:
        return text


def parse_params(items) -> dict:
    """``key=value`` pairs (comma lists allowed) or a single JSON object."""
    if not items:
        return {}
    if len(items) == 1 and items[0].lstrip().startswith("{"):
        return json.loads(items[0])
    out = {}
    for item in items:
        if "=" not in item:
            raise ModelError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = _parse_value(v)
    return out


# -- subcommands -------------------------------------------------------------


def cmd_gh(args) -> int:
    (X, x), (Y, y) = load_space(args.x), load_space(args.y)
    if args.bounds:
        res = gh_bounds(X, Y)
    else:
        try:
            res = pointed_gh_exact((X, x), (Y, y)) if args.pointed else gh_exact(X, Y)
        except CapExceeded as exc:
            if args.exact:
                raise
            print(f"note: {exc}; reporting bounds", file=sys.stderr)
            res = gh_bounds(X, Y)
    _emit(res.to_json(), args.out)
    return 0


def cmd_cover(args) -> int:
    g = MetricGraph.load(args.graph)
    c = delta_cover(g, args.delta, args.radius, backend=args.backend)
    _emit(c.to_json(), args.out)
    return {"complete": 0, "disagree": 1}.get(c.status, 2)


def cmd_trivial(args) -> int:
    g = MetricGraph.load(args.graph)
    verdict = delta_trivial(g, load_loop(g, args.loop), args.delta)
    _emit({"delta": args.delta, "verdict": verdict})
    return 2 if verdict == "unknown" else 0


def cmd_surject(args) -> int:
    src, dst = MetricGraph.load(args.src), MetricGraph.load(args.dst)
    corr = _read_json(args.corr)
    pairs = [tuple(p) for p in (corr["pairs"] if isinstance(corr, dict) else corr)]
    try:
        cert = induced_hom(src, dst, pairs, args.d1, args.d2, epsilon=args.epsilon)
    except HypothesisError as exc:
        _emit({"error": str(exc)}, args.out)
        return 1
    _emit(cert.to_json(), args.out)
    return {"yes": 0, "no": 1}.get(cert.surjective, 2)


def cmd_snk(args) -> int:
    _emit({"n": args.n, "K": args.k, "S": cmp.snk(args.n, args.k)})
    return 0


def cmd_excess(args) -> int:
    r = cmp.midpoint_excess_check(args.n, args.k, args.samples, args.seed)
    _emit(r, args.out)
    return 0 if r["verdict"] == "pass" else 1


def cmd_volume(args) -> int:
    _emit({"n": args.n, "r": args.r, "volume": cmp.vol_model(args.n, args.r)})
    return 0


def cmd_deck_bound(args) -> int:
    _emit({"n": args.n, "D": args.d, "delta0": args.delta0, "bound": cmp.deck_bound(args.n, args.d, args.delta0)})
    return 0


def cmd_lab_run(args) -> int:
    params = _read_json(args.config) if args.config else {}
    report = run_experiment(args.experiment, params)
    _emit(report.dumps(args.format), args.out)
    return report.exit_code


def cmd_lab_gen(args) -> int:
    if args.family not in FAMILIES:
        raise ModelError(f"unknown family {args.family!r}; choose from {sorted(FAMILIES)}")
    spec = FAMILIES[args.family](**parse_params(args.params))
    _emit(spec.graph.to_json(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lengthlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gh", help="Gromov-Hausdorff distance with witness")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--pointed", action="store_true")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--bounds", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_gh)

    s = sub.add_parser("cover", help="truncated delta-cover")
    s.add_argument("--graph", required=True)
    s.add_argument("--delta", required=True)
    s.add_argument("--radius", required=True)
    s.add_argument("--backend", choices=BACKENDS, default="both")
    s.add_argument("--out")
    s.set_defaults(func=cmd_cover)

    s = sub.add_parser("trivial", help="is a loop delta-trivial?")
    s.add_argument("--graph", required=True)
    s.add_argument("--loop", required=True)
    s.add_argument("--delta", required=True)
    s.set_defaults(func=cmd_trivial)

    s = sub.add_parser("surject", help="surjection certificate from a correspondence")
    s.add_argument("--src", required=True)
    s.add_argument("--dst", required=True)
    s.add_argument("--corr", required=True)
    s.add_argument("--d1", required=True)
    s.add_argument("--d2", required=True)
    s.add_argument("--epsilon")
    s.add_argument("--out")
    s.set_defaults(func=cmd_surject)

    s = sub.add_parser("snk", help="midpoint-lemma constant")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=float, required=True)
    s.set_defaults(func=cmd_snk)

    s = sub.add_parser("excess-check", help="Monte Carlo check of the excess estimates")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--k", type=float, default=1.0)
    s.add_argument("--samples", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_excess)

    s = sub.add_parser("volume", help="ball volume in curvature -1")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--r", type=float, required=True)
    s.set_defaults(func=cmd_volume)

    s = sub.add_parser("deck-bound", help="volume bound on short deck elements")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=float, required=True)
    s.add_argument("--delta0", type=float, required=True)
    s.set_defaults(func=cmd_deck_bound)

    lab = sub.add_parser("lab", help="experiments and corpus generation")
    labsub = lab.add_subparsers(dest="lab_command", required=True)
    s = labsub.add_parser("run")
    s.add_argument("experiment", choices=sorted(EXPERIMENTS))
    s.add_argument("--config")
    s.add_argument("--out")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.set_defaults(func=cmd_lab_run)
    s = labsub.add_parser("gen")
    s.add_argument("family", choices=sorted(FAMILIES))
    s.add_argument("--params", nargs="*", default=[])
    s.add_argument("--out")
    s.set_defaults(func=cmd_lab_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
