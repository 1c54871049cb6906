"""Desk-scale benchmark: QHD (direct and embedded) against random multi-start refinement.

    python3 scripts/run_benchmark.py --out results/bench --shots 1000
"""

import argparse
import json
import math
from pathlib import Path

from qhdkit.bench import PipelineConfig, run_baseline, run_instance
from qhdkit.cli import NON_REPRODUCTION_NOTE
from qhdkit.instances import BUILTIN_IDS, builtin, generate_exp_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawTextHelpFormatter)
    ap.add_argument("--out", default="results/bench")
    ap.add_argument("--shots", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--exp-dims", type=int, nargs="*", default=[2, 3])
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    specs = [builtin(i) for i in BUILTIN_IDS]
    specs += [generate_exp_instance(d, 0.5, args.seed) for d in args.exp_dims]

    rows = []
    for spec in specs:
        runs = [("direct", PipelineConfig(shots=args.shots, seed=args.seed))]
        if spec.problem.n == 2:
            runs.append(("embedded-unary", PipelineConfig(backend="embedded", shots=args.shots,
                                                          seed=args.seed)))
        reports = [(label, run_instance(spec, cfg)) for label, cfg in runs]
        reports.append(("baseline", run_baseline(spec, 1000, args.seed)))
        for label, rep in reports:
            rep.write_json(out / f"{spec.id}-{label}.json")
            rep.write_csv(out / f"{spec.id}-{label}.csv")
            gap = None if spec.f_star is None else rep.best_f - spec.f_star
            tts = rep.tts
            rows.append({
                "instance": spec.id, "run": label, "f_star": spec.f_star,
                "best": rep.best_f, "gap": gap, "p_s": rep.p_s,
                "rejection_rate": rep.rejection_rate, "t0": rep.t0,
                "tts": "inf" if tts is not None and math.isinf(tts) else tts,
            })
            print(f"{spec.id:22s} {label:15s} best={rep.best_f:+.6f} "
                  f"p_s={rep.p_s if rep.p_s is not None else float('nan'):.3f} t0={rep.t0:.2e}s")
    (out / "summary.json").write_text(json.dumps(rows, indent=1))
    (out / "README.md").write_text(NON_REPRODUCTION_NOTE)


if __name__ == "__main__":
    main()
