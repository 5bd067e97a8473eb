"""Tour of the linear-analysis layer on a custom parameter set.

Everything here is closed-form: no simulation runs.  Given rates, the
toolkit locates the homogeneous steady states, classifies their
stability, evaluates the dispersion relation over the lattice modes and
reports where the eradication threshold sits as the interaction
strength is swept.

Run:  python3 demos/stability_toolkit.py
"""
import numpy as np

from phenocoevo import (
    ModelParams,
    PhenotypeGrid,
    dispersion,
    homogeneous_stability,
    pattern_bound,
    phenotypic_diffusivity,
    steady_states,
)

GRID = PhenotypeGrid(half_width=1.0, n_sites=1500)


def describe(params):
    size = GRID.domain_size
    beta = phenotypic_diffusivity(params, GRID.step)
    ss = steady_states(params, size)

    print(f"gamma = {params.gamma}, threshold gamma* = {ss.gamma_threshold:.4g}")
    rep = homogeneous_stability(params, size, "ctl_only")
    e1, e2 = rep.eigenvalues
    print(f"  CTL-only state (0, {ss.ctl_only[1]:.4g}): "
          f"{'stable' if rep.stable else 'unstable'} "
          f"(eigenvalues {e1.real:+.4g}, {e2.real:+.4g})")

    if ss.coexistence is None:
        print("  no coexistence state: any tumour inoculum is cleared\n")
        return

    rep = homogeneous_stability(params, size, "coexistence")
    e1, _ = rep.eigenvalues
    kind = "spiral" if abs(e1.imag) > 0 else "node"
    print(f"  coexistence ({ss.coexistence[0]:.4g}, {ss.coexistence[1]:.4g}): "
          f"{'stable' if rep.stable else 'unstable'} {kind}, "
          f"leading Re(lambda) = {e1.real:+.4g}")

    curve = dispersion(params, size, beta)
    growing = curve.modes[curve.re_lambda_max > 0]
    if growing.size:
        print(f"  trait-structured modes growing: {growing.tolist()} "
              f"(fastest m = {curve.fastest_mode()})")
    else:
        print("  no trait-structured mode grows: profiles stay homogeneous")

    pb = pattern_bound(params, params.theta_C, size, diffusivity=beta)
    if pb.bound is not None:
        print(f"  pattern bound: diffusivity < {pb.bound:.3e} "
              f"(current {beta:.3e}) -> verdict {pb.verdict}")
    print()


def main():
    print("== baseline rates, narrow crowding radius ==")
    describe(ModelParams(gamma=1.5, eta=0.7, theta_C=0.3, theta_T=0.3))

    print("== same rates, wide crowding radius ==")
    describe(ModelParams(gamma=1.5))

    print("== interaction-strength sweep across the threshold ==")
    for gamma in (0.5, 2.0, 10.0, 29.0, 31.0):
        describe(ModelParams(gamma=gamma))

    print("== where does the threshold move with the kill efficiency? ==")
    for zeta_C in (2e-6, 5e-6, 1e-5):
        params = ModelParams(gamma=1.0, zeta_C=zeta_C)
        ss = steady_states(params, GRID.domain_size)
        print(f"  zeta_C = {zeta_C:.0e}: gamma* = {ss.gamma_threshold:.4g}")


if __name__ == "__main__":
    main()
