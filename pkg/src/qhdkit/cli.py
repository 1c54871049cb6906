"""Command-line interface: ``qhdkit solve|bench|embed|export-annealer|compare``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .bench import PipelineConfig, run_baseline, run_instance, warmstart_comparison
from .discretize import CapExceeded, assemble_discretized
from .embedding import (
    OneHotNotAnnealable,
    assemble_embedding,
    export_annealer,
    grid_points,
    ir_to_json,
)
from .instances import BUILTIN_IDS, InstanceSpec, builtin, generate_exp_instance, instance_from_problem
from .problem import problem_from_dict
from .schedule import SmoothLog

NON_REPRODUCTION_NOTE = """\
# qhdkit benchmark output

This directory holds desk-scale results: one JSON report and one CSV per
instance, plus `summary.json`.

The published 50-variable benchmark tables (best objectives, success
probabilities and TTS timing columns for the QP and exponential families) are
NOT reproducible here. With r qubits per variable the embedded state has
2^(50 r) amplitudes (about 2^400 at r = 8), far beyond any state-vector
simulator. Those tables are replaced by the acceptance checks shipped with
the test suite: embedding equivalence, the Hamming diagonal identity, decoding
golden values, known minima of the built-in instances, success-probability
sanity, TTS arithmetic and numerical hygiene.

All t0 and TTS values below are *simulated t0*: state-vector wall time per
shot plus mean refinement time per sample. They are not comparable to
hardware timings.
"""


def load_spec(source: str) -> InstanceSpec:
    """``builtin:<id>``, ``exp:<dim>:<sparsity>:<seed>`` or a JSON problem file.

    A problem file may carry an optional ``"f_star"`` entry.
    """
    if source.startswith("builtin:"):
        return builtin(source.split(":", 1)[1])
    if source.startswith("exp:"):
        _, dim, sparsity, seed = source.split(":")
        return generate_exp_instance(int(dim), float(sparsity), int(seed))
    doc = json.loads(Path(source).read_text())
    return instance_from_problem(problem_from_dict(doc), Path(source).stem, doc.get("f_star"))


def _seed(args) -> int:
    env = os.environ.get("QHDKIT_SEED")
    return int(env) if env not in (None, "") else args.seed


def _pipeline(args) -> PipelineConfig:
    return PipelineConfig(
        backend=args.backend,
        scheme=args.scheme,
        grid=args.grid,
        resolution=args.resolution,
        gamma=args.gamma,
        T=args.time,
        steps=args.steps,
        shots=args.shots,
        seed=_seed(args),
        refine=args.refine,
        policy=args.policy,
        auto_steps=not args.fixed_steps,
    )


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("direct", "embedded"), default="direct")
    p.add_argument("--scheme", default="unary", help="unary | onehot | hamming")
    p.add_argument("--resolution", type=int, default=5, help="qubits per variable (embedded)")
    p.add_argument("--grid", type=int, default=17, help="grid points per axis (direct)")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--time", type=float, default=10.0, help="evolution time T")
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--fixed-steps", action="store_true",
                   help="use --steps as given instead of doubling until converged")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--refine", choices=("pg", "tn"), default="pg")
    p.add_argument("--policy", choices=("strict", "lenient"), default=None)


def _write_report(report, out: str | None) -> None:
    if out is None:
        json.dump(report.to_json(), sys.stdout, indent=1, sort_keys=True)
        print()
        return
    report.write_json(out)
    report.write_csv(Path(out).with_suffix(".csv"))


def _summary(report) -> str:
    tts = report.tts
    tts_s = "inf" if tts is not None and math.isinf(tts) else f"{tts:.4g}" if tts is not None else "n/a"
    ps = "n/a" if report.p_s is None else f"{report.p_s:.3f}"
    return (
        f"{report.instance}: best f = {report.best_f:.6f} at {list(report.best_x)}; "
        f"p_s = {ps}; simulated t0 = {report.t0:.3g} s; TTS = {tts_s}"
    )


def cmd_solve(args) -> int:
    spec = load_spec(args.input)
    report = run_instance(spec, _pipeline(args))
    _write_report(report, args.out)
    if args.out:
        print(_summary(report))
    return 0


def cmd_bench(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _pipeline(args)
    if args.suite == "builtin":
        specs = [builtin(i) for i in BUILTIN_IDS]
    else:
        seed = cfg.seed
        specs = [generate_exp_instance(d, args.sparsity, seed + k)
                 for k, d in enumerate(args.dims)]
    rows = []
    for spec in specs:
        for method in ("qhd", "baseline"):
            if method == "qhd":
                report = run_instance(spec, cfg)
            else:
                report = run_baseline(spec, args.baseline_starts, cfg.seed, cfg.refine)
            stem = out / f"{spec.id}-{method}"
            report.write_json(stem.with_suffix(".json"))
            report.write_csv(stem.with_suffix(".csv"))
            print(f"[{method}] {_summary(report)}")
            rows.append({
                "instance": spec.id,
                "method": method,
                "f_star": spec.f_star,
                "f_star_provenance": spec.provenance,
                "best_objective": report.best_f,
                "success_probability": report.p_s,
                "simulated_t0": report.t0,
                "tts": "inf" if report.tts is not None and math.isinf(report.tts) else report.tts,
            })
    (out / "summary.json").write_text(json.dumps(rows, indent=1, sort_keys=True))
    (out / "README.md").write_text(NON_REPRODUCTION_NOTE)
    return 0


def _ir_for(args):
    spec = load_spec(args.input)
    N = grid_points(args.scheme, args.resolution)
    return assemble_embedding(assemble_discretized(spec.problem, N), args.scheme)


def cmd_embed(args) -> int:
    ir = _ir_for(args)
    doc = ir_to_json(ir)
    if args.dump:
        Path(args.dump).write_text(json.dumps(doc, indent=1))
    print(f"{ir.scheme}: {ir.n} variables x {ir.r} qubits = {ir.num_qubits} qubits; "
          f"{len(ir.kinetic)} kinetic and {len(ir.potential)} potential terms")
    return 0


def cmd_export(args) -> int:
    ir = _ir_for(args)
    doc = export_annealer(ir, SmoothLog(args.gamma, args.time), args.anneal_time)
    Path(args.out).write_text(json.dumps(doc, indent=1))
    print(f"wrote {ir.num_qubits}-qubit annealer document to {args.out}")
    return 0


def cmd_compare(args) -> int:
    spec = load_spec(args.input)
    result = warmstart_comparison(spec, _pipeline(args))
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=1, sort_keys=True))
    med = result["medians"]
    print(f"{spec.id}: median objective random {med['random']:.6g}, "
          f"decoded {med['decoded']}, refined {med['refined']}; "
          f"decoded <= random: {result['decoded_beats_random']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qhdkit", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    src_help = "JSON problem file, builtin:<id> or exp:<dim>:<sparsity>:<seed>"

    p = sub.add_parser("solve", help="run the full QHD pipeline on one instance")
    p.add_argument("--input", required=True, help=src_help)
    _add_pipeline_args(p)
    p.add_argument("--out", help="report JSON path (CSV written alongside)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run QHD and the random multi-start baseline on a suite")
    p.add_argument("--suite", choices=("builtin", "exp"), default="builtin")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dims", type=int, nargs="+", default=[2, 2, 3])
    p.add_argument("--sparsity", type=float, default=0.5)
    p.add_argument("--baseline-starts", type=int, default=1000)
    _add_pipeline_args(p)
    p.set_defaults(func=cmd_bench)

    for name, func, help_ in (
        ("embed", cmd_embed, "build the qubit Hamiltonian"),
        ("export-annealer", cmd_export, "write a two-local annealer document"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--input", required=True, help=src_help)
        p.add_argument("--scheme", default="unary")
        p.add_argument("--resolution", type=int, default=5)
        if name == "embed":
            p.add_argument("--dump", help="write the IR as JSON")
        else:
            p.add_argument("--out", required=True)
            p.add_argument("--gamma", type=float, default=1.0)
            p.add_argument("--time", type=float, default=10.0)
            p.add_argument("--anneal-time", type=float, default=20.0, help="microseconds")
        p.set_defaults(func=func)

    p = sub.add_parser("compare", help="random vs decoded vs refined objective distributions")
    p.add_argument("--input", required=True, help=src_help)
    _add_pipeline_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CapExceeded, OneHotNotAnnealable, KeyError, ValueError, OSError) as exc:
        print(f"qhdkit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
