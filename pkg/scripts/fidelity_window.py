"""Optimized Bell fidelity of the flat-envelope gate around the planned time.

Prints 1 - F on a 1 us grid for a ground-state and an n = 0.6 thermal
phonon start, alongside the coherent-residual estimate.

    python scripts/fidelity_window.py --dt 1e-7
"""
import argparse

import numpy as np

from ddgate.dynamics import evolve_unitary
from ddgate.entanglement import BellTarget, bell_fidelity_optimized, coherent_residuals
from ddgate.experiments import load_config
from ddgate.experiments.config import make_spec, resolve_drive, resolve_trap
from ddgate.experiments.scenarios import PLUS, _layout, _qubit_rho, initial_state
from ddgate.physics import gate_plan, rwa_hamiltonian


def scan(n_bar: float, fock_dim: int, times: np.ndarray, dt: float) -> np.ndarray:
    cfg = load_config("gate-evolution", None, {"trap.n_bar": n_bar, "propagation.fock_dim": fock_dim})
    trap = resolve_trap(cfg)
    drive = resolve_drive(cfg, trap)
    layout = _layout(cfg, 2)
    H = rwa_hamiltonian(trap, drive, layout)
    tr = evolve_unitary(H, initial_state(layout, PLUS, n_bar), make_spec(cfg, float(times[-1]), tuple(times), dt), {}, layout)
    return np.array([1 - bell_fidelity_optimized(_qubit_rho(s.data, layout), BellTarget()).fidelity for s in tr.states])


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--dt", type=float, default=1e-7)
    ap.add_argument("--half-width", type=float, default=10e-6)
    args = ap.parse_args()

    cfg = load_config("gate-evolution")
    trap = resolve_trap(cfg)
    drive = resolve_drive(cfg, trap)
    plan = gate_plan(trap, drive)
    times = plan.t_gate + np.arange(-args.half_width, args.half_width + 1e-12, 1e-6)
    ground = scan(0.0, 16, times, args.dt)
    thermal = scan(0.6, 20, times, args.dt)
    est = coherent_residuals(trap, drive, plan, plan.t_gate).if_estimate
    print(f"planned gate time {plan.t_gate * 1e6:.3f} us, coherent-residual IF {est:.4%}")
    print("t_us      IF_ground   IF_nbar0.6")
    for t, a, b in zip(times, ground, thermal):
        print(f"{t * 1e6:8.2f}  {a:9.4%}  {b:9.4%}")
    i, j = int(np.argmin(ground)), int(np.argmin(thermal))
    print(f"best: ground {ground[i]:.4%} at {times[i] * 1e6:.2f} us; thermal {thermal[j]:.4%} at {times[j] * 1e6:.2f} us")


if __name__ == "__main__":
    main()
