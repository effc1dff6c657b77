"""Advanced Parameters that control the behavior of mddc analytics"""

class AdvancedParameters:
    """Globally defined defaults for the MDDC algorithm and data generation"""
    # Tukey's coefficient for the boxplot fences
    boxplot_coef = 1.5
    # |cor| threshold for a "connected" AE
    corr_limit = 0.8
    mc_reps = 10000
    mc_quantile = 0.95
    signal_alpha = 0.05
    # cells with counts at or below this value go to Fisher's exact test
    sparse_count_limit = 5
    # fewest pairwise-complete positions for a correlation or a regression
    min_complete_pairs = 3
    # adaptive coefficient search
    coef_step = 0.1
    coef_ceiling = 10.0
    target_fdr = 0.05
    # data generation
    within_cluster_rho = 0.5
    max_regeneration_attempts = 1000
    # eigenvalues above -psd_tolerance are clipped to zero
    psd_tolerance = 1e-8
    # output formatting
    missing_token = "NA"
    report_decimals = 4
