"""
Compare the saturation engine against occurs-check unification on
random acyclic first-order problems.
Prints one line per disagreement and a summary; exit status 1 on any disagreement.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from services.oracle_service import GenConfig, OccursFail, compare_with_baseline, gen_problem, robinson_acyclic

if __name__ == '__main__':
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
    cfg = GenConfig(mode="fo", cyclic=False)
    failures = 0
    occurs = 0
    for seed in range(count):
        msg = compare_with_baseline(seed, cfg)
        if msg:
            failures += 1
            print(msg)
        elif isinstance(robinson_acyclic(gen_problem(cfg, seed)[1]), OccursFail):
            occurs += 1
    print(f"\n{count} problems, {failures} disagreements, {occurs} solved only with cyclic terms")
    sys.exit(1 if failures else 0)
