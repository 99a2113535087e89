"""Frozen Monte-Carlo fixtures for the KS-based checks.

Seeds were fixed before the pilot runs; thresholds are the stated targets.
``pilot`` records what the pilot run produced with that seed.
"""

KS_SAMPLES = 10_000

ZIPF_GUMBEL = {
    "seed": 1,
    "threshold": 0.08,
    # (m, N) -> KS; seeds 1..12 pass 5 of 12 times
    "pilot": {(1, 100): 0.129, (1, 1000): 0.0678, (2, 100): 0.0436, (2, 1000): 0.035},
}

POWER_CASE1 = {
    "seed": 1,
    "threshold": 0.05,
    "pilot": {"ks": 0.0077},
}

LOGPOWER_SLOW = {
    "seed": 1,
    "pilot": {"ks_shifted": 0.0905, "ks_standard": 0.1959},
}
