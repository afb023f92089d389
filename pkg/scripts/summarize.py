"""Print the headline numbers from a results directory written by run_all.py."""
import json
import sys
from pathlib import Path

KEYS = {
    "gate-evolution": ["t_negativity_max", "negativity_max", "purity_min", "t_purity_min", "purity_recovery", "bell_fidelity"],
    "coherence-scan": ["t2_ratio_075_over_0", "local_minima"],
    "bell-tomography": ["t_gate", "target", "negativity", "negativity_std", "fidelity", "fidelity_std", "min_eigenvalue", "true_fidelity"],
    "ramped-gate": ["best_total_duration", "best_infidelity", "flat_best_time", "flat_best_infidelity"],
    "robustness": ["delta1", "delta2"],
}


def main(root: Path) -> None:
    for path in sorted(root.rglob("*_manifest.json")):
        m = json.loads(path.read_text())
        name = m["scenario"]
        print(f"== {name} ({m['status']}, {m['wall_time_s']:.0f} s, hash {m['manifest_hash']})")
        summary = m["summary"]
        for k in KEYS.get(name, list(summary)):
            if k in summary and k != "validity":
                print(f"   {k}: {summary[k]}")
        failed = [v["name"] for v in summary.get("validity", []) if not v["passed"]]
        if failed:
            print(f"   regime conditions below threshold: {failed}")


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "results"))
