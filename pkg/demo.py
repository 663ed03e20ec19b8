"""
demo.py — Corpus cross-check runner.

For every program in corpus/ and every seed: simulate, compile, and evaluate
the compiled formula over the run (operational and denotational semantics
must agree). With --proofs, also derive and check the semantics triple of
each program.

    python demo.py                   # 10 seeds per program
    python demo.py --seeds 3 --proofs
"""

import argparse
import glob
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from dotenv import load_dotenv, find_dotenv

load_dotenv(find_dotenv())

from hcspdc import syntax as S
from hcspdc.debug_timing import mark_stage, start_stage
from hcspdc.errors import HcspError
from hcspdc.evaluator import Truth
from hcspdc.hoare import check_proof, derive_semantics_triple
from hcspdc.simulator import simulate, soundness_holds
from hcspdc.utils import build_discharge_config, build_eval_config, build_sim_config, read_program
from hcspdc.desugar import desugar, is_core

# ── Config ────────────────────────────────────────────────────────────────
CORPUS_DIR    = os.getenv("HCSP_CORPUS", os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus"))
SEEDS         = 10
PROOF_BUDGET  = 200     # falsification samples per side condition in --proofs
WORKERS       = int(os.getenv("HCSP_JOBS", "1"))


def check_runs(path: str, seeds: int):
    """Return (name, agreed, total, problems) for one corpus program."""
    name = os.path.basename(path)
    p, init = read_program(path)
    eval_cfg = build_eval_config()
    agreed, problems = 0, []
    for seed in range(seeds):
        label = f"{name}#{seed}"
        start_stage(label)
        try:
            run = simulate(p, init, build_sim_config(seed=seed))
            verdict = soundness_holds(p, run, eval_cfg)
        except HcspError as e:
            problems.append(f"seed {seed}: {type(e).__name__}: {e}")
            continue
        finally:
            mark_stage("checked", label, pop=True)
        if verdict is Truth.TRUE:
            agreed += 1
        else:
            problems.append(f"seed {seed}: {verdict.value} (end={run.trajectory.end:g}, "
                            f"final {S.valuation_str(run.final)})")
    return name, agreed, seeds, problems


def check_derivation(path: str):
    """Return (name, verdict, assumptions) for the derived semantics triple."""
    name = os.path.basename(path)
    p, _ = read_program(path)
    q = S.label_parallel(p if is_core(p) else desugar(p))
    try:
        root = derive_semantics_triple(q)
        report = check_proof(root, build_discharge_config(budget=PROOF_BUDGET))
    except HcspError as e:
        return name, f"error: {e}", 0
    note = report.verdict if report.failed_at is None else f"{report.verdict} at {report.failed_at}: {report.reason}"
    return name, note, len(report.assumptions)


def main() -> int:
    ap = argparse.ArgumentParser(description="corpus cross-check")
    ap.add_argument("--seeds", type=int, default=SEEDS)
    ap.add_argument("--proofs", action="store_true")
    ap.add_argument("--corpus", default=CORPUS_DIR)
    args = ap.parse_args()

    programs = sorted(glob.glob(os.path.join(args.corpus, "*.hcsp")))
    print("=" * 60)
    print("hcspdc — operational / denotational cross-check")
    print(f"  {len(programs)} programs x {args.seeds} seeds from {args.corpus}")
    print("=" * 60)

    t0 = time.perf_counter()
    failed = 0
    with ThreadPoolExecutor(max_workers=max(1, WORKERS)) as pool:
        for name, agreed, total, problems in pool.map(lambda f: check_runs(f, args.seeds), programs):
            mark = "✅" if agreed == total else "❌"
            print(f"{mark} {name:28s} {agreed}/{total}")
            for msg in problems:
                print(f"     {msg}")
            failed += agreed != total

    if args.proofs:
        print("-" * 60)
        for name, verdict, assumed in map(check_derivation, programs):
            ok = verdict == "valid" and assumed == 0
            print(f"{'✅' if ok else '❌'} {name:28s} {verdict}" + (f" ({assumed} assumed)" if assumed else ""))
            failed += not ok

    print("=" * 60)
    print(f"[{time.strftime('%H:%M:%S')}] {len(programs)} programs, {failed} with problems, "
          f"{time.perf_counter() - t0:.1f}s")
    return 1 if failed else 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n🛑 Interrupted")
        sys.exit(130)
