"""Acceptance thresholds, versioned in one place.

Exact identities carry analytic tolerances.  Statistical thresholds
were pinned once from oracle runs at 10x the acceptance sample count
(see each entry's note); they are not tuned per run.
"""

THRESHOLDS_VERSION = 1

THRESHOLDS = {
    # KS distance, empirical real-eigenvalue CDF vs closed form.
    # N=256, 500 samples: ~64k/33k real points depending on lam; asymptotic
    # KS noise 1/sqrt(count) ~ 0.004-0.006, calibrated headroom x4.
    "real_density_ks": 0.02,
    # |mean real fraction - |1-2 lam||; exponential finite-N convergence
    # away from lam=1/2 leaves pure Monte Carlo noise ~ 1/sqrt(N*samples).
    "fraction_abs_err": 0.01,
    # share of complex eigenvalues outside the boundary inflated by
    # delta = 4/(m sqrt(N)); edge width scales like N^{-1/2}.
    "outlier_fraction": 0.01,
    # uniformity of the pair density over interior cells (expected >= 50
    # counts; auto-coarsening targets thousands per cell so Poisson noise
    # stays a few percent).
    "uniformity_max_rel_dev": 0.10,
    "uniformity_min_expected": 50.0,
    # total complex mass vs nu = 1 - |1-2 lam|
    "complex_mass_abs_err": 0.01,
    # solver vs closed form on interior grid points
    "gap_alpha2_abs": 1e-8,
    # phase-boundary bisection vs closed-form radii
    "boundary_abs": 1e-6,
    # finite-N identity residuals (relative to scale)
    "finite_n_identity": 1e-9,
    # averaged self-consistency at N=64, s=0.1, 500 samples; pinned from a
    # 5000-sample oracle run (residuals there ~ the s-bias floor).
    "averaged_gap_rel": 0.05,
    # vanishing moments: |mean| <= k sigma of its standard error
    "moment_sigma_factor": 4.0,
    # sample variance of the trace statistic vs u/(N^2 m^2)
    "trace_var_rel": 0.10,
    # identity-metric resolvent vs the hermitian closed form (pointwise)
    "gue_pointwise": 1e-10,
    # structural identities w G = 1 + m^2(a^2+b^2) and the unified map form
    "structural_identity": 1e-8,
    # KS for the lam=0 semicircle reduction
    "semicircle_ks": 0.02,
    # holomorphic-phase solver residual ceiling (flat-metric demo path too)
    "solver_residual": 1e-9,
    # maximum share of unresolved grid points in gap_grid
    "unresolved_fraction": 0.001,
    # Monte Carlo resolvent vs solved resolvent, N=128, 500 samples
    "resolvent_mc_rel": 0.03,
}
