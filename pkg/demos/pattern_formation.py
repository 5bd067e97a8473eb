"""Phenotype patterns: crowding radius against mutation smoothing.

Shrinking the competition radius theta flips the sign of the windowed
average seen by short-wave perturbations, so a band of lattice modes
grows unless the mutation-induced diffusivity is large enough to smooth
them out.  This script prints the diffusivity bound and the predicted
band for three radii, then runs the continuum engine and counts the
peaks that actually formed, with an ASCII rendering of the profiles.

Run:  python3 demos/pattern_formation.py
"""
import numpy as np

from phenocoevo import (
    count_peaks,
    dispersion,
    initial_densities,
    pattern_bound,
    phenotypic_diffusivity,
    preset,
    run_pde,
)

BARS = " .:-=+*#%@"


def sparkline(values, width=72):
    chunks = np.array_split(values, width)
    means = np.array([c.mean() for c in chunks])
    lo, hi = means.min(), means.max()
    span = hi - lo if hi > lo else 1.0
    idx = ((means - lo) / span * (len(BARS) - 1)).astype(int)
    return "".join(BARS[i] for i in idx)


def main():
    for name in ("fig2a", "fig2b", "fig2c"):
        cfg = preset(name)
        params, grid = cfg.params(), cfg.grid()
        beta = phenotypic_diffusivity(params, grid.step)
        size = grid.domain_size

        pb = pattern_bound(params, params.theta_C, size, diffusivity=beta)
        curve = dispersion(params, size, beta)
        print(f"{name}: theta = {params.theta_C}, beta_C = {beta:.3e}")
        print(f"  bound: beta_C < {pb.bound:.3e} opens modes "
              f"{pb.modes[0]}..{pb.modes[-1]} -> "
              f"{'patterns' if pb.verdict else 'no patterns'} expected")
        print(f"  fastest growing mode m = {curve.fastest_mode()}, "
              f"max Re(lambda) = {curve.re_lambda_max.max():.3f} per unit time")

        traj = run_pde(params, grid, initial_densities(grid, cfg.a, cfg.A),
                       snapshot_times=(30.0,))
        n_c, _ = traj.snapshots[30.0]
        print(f"  tumour profile at t = 30 ({count_peaks(n_c)} peaks):")
        print(f"  [{sparkline(n_c)}]")
        print()

    print("The peak count rises as theta shrinks: more sign-flipped modes")
    print("fit into the interval, and the selected wavelength shortens.")


if __name__ == "__main__":
    main()
