"""Entanglement growth from a domain wall, weak vs strong potential.

Weak potential: the half-chain entropy overshoots, then relaxes to a
plateau well below the maximum - the non-Hermitian evolution keeps
projecting the state onto the slowest-decaying modes, so entanglement
is non-monotonic in time.  Strong potential (twice the critical value):
growth is slow and boundary conditions leave a visible imprint.
"""

import numpy as np

from nhchain import (
    ModelParams,
    build_fock_basis,
    build_many_body,
    decompose,
    entanglement_entropy,
    evolve_exact,
    initial_domain_wall,
)

L, N, G, V = 10, 5, 0.5, 2.0
CHECKPOINTS = (0.0, 1.0, 3.0, 10.0, 30.0, 100.0)
SAMPLES = 3


def trace(W, bc, basis, psi0):
    rows = []
    for s in range(SAMPLES):
        p = ModelParams(L=L, N=N, g=G, V=V, W=W, bc=bc,
                        theta0=2.0 * np.pi * s / SAMPLES)
        d = decompose(build_many_body(p, basis))
        rows.append([entanglement_entropy(evolve_exact(d, psi0, t), basis)
                     for t in CHECKPOINTS])
    return np.mean(rows, axis=0)


def main():
    basis = build_fock_basis(L, N)
    psi0 = initial_domain_wall(basis)
    w_crit = 2.0 * np.exp(G)
    print(f"domain-wall start, L={L}, N={N}, g={G}, V={V} (dim {basis.dim}), "
          f"{SAMPLES}-phase average")
    header = "".join(f"{t:>8g}" for t in CHECKPOINTS)
    print(f"{'S_EE at t =':>22s}{header}")
    for W, label in ((0.5, "weak"), (2.0 * w_crit, "strong")):
        for bc in ("pbc", "obc"):
            s = trace(W, bc, basis, psi0)
            row = "".join(f"{v:8.3f}" for v in s)
            print(f"  W={W:5.2f} ({label:6s}) {bc} {row}")
    print("\nweak rows peak early and relax; strong rows creep upward and")
    print("split by boundary condition as amplified trajectories need the wrap")


if __name__ == "__main__":
    main()
