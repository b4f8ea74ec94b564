#!/usr/bin/env python3
"""Brute-force Bayes bounds for the `complementary` synthetic benchmark.

Mirrors the window-level statistics of the generative model in src/synth.cpp
(segment-interior windows, base rates conditioned away) and computes the
accuracy of the Bayes-optimal classifier three ways:

  ecg_only   observe (u, heart-rate ratio)     - u is a fair coin, rate is the cue
  eda_only   observe (v, SCR count in 10 s)    - v is a fair coin, count is the cue
  joint      observe (u, v, rate, count)       - class = u XOR v exactly

The resulting numbers gate the multimodal-gain benchmark: a unimodal network
cannot beat its single-modality bound (plus sampling slack), while the fused
network should approach the joint bound.

Run:  python3 tools/bayes_oracle.py [--samples N] [--seed S]
"""

import argparse
import json
import math

import numpy as np

# constants mirrored from src/synth.cpp
RATE_STRESS_GAIN = 0.10
RATE_JITTER = 0.09
RATE_EST_NOISE = 0.03 / math.sqrt(12.0)  # per-window beat-count estimation noise
SCR_RATE_NON = 0.32
SCR_RATE_STRESS = 0.40
SCR_RATE_JITTER = 0.19
WINDOW_S = 10.0


def simulate_scr_count(lam, rng):
    """Events in a 10 s window of the quasi-periodic process (gap = (0.7+0.6U)/lam)."""
    t = -rng.uniform(0.0, 1.0) * (0.7 + 0.6 * rng.uniform()) / lam  # random phase
    count = 0
    while True:
        t += (0.7 + 0.6 * rng.uniform()) / lam
        if t >= WINDOW_S:
            return count
        if t >= 0.0:
            count += 1


def rate_log_density(r, stress):
    mu = math.log(1.0 + RATE_STRESS_GAIN) if stress else 0.0
    sigma2 = RATE_JITTER**2 + RATE_EST_NOISE**2
    return -((math.log(r) - mu) ** 2) / (2.0 * sigma2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=400_000)
    ap.add_argument("--seed", type=int, default=20260810)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    n = args.samples
    stress = rng.uniform(size=n) < 0.5
    u = rng.uniform(size=n) < 0.5
    v = u ^ stress

    # ECG rate observation (ratio to the subject baseline)
    mu = np.where(stress, math.log(1.0 + RATE_STRESS_GAIN), 0.0)
    log_r = rng.normal(mu, math.sqrt(RATE_JITTER**2 + RATE_EST_NOISE**2))
    r = np.exp(log_r)

    # ECG-only Bayes: u carries no information; decide on the rate likelihoods
    ll_s = np.array([rate_log_density(x, True) for x in r])
    ll_n = np.array([rate_log_density(x, False) for x in r])
    ecg_acc = float(np.mean((ll_s > ll_n) == stress))

    # EDA count observation with per-segment rate jitter
    lam = np.where(stress, SCR_RATE_STRESS, SCR_RATE_NON) * np.exp(
        rng.normal(0.0, SCR_RATE_JITTER, size=n)
    )
    py_rng = np.random.default_rng(args.seed + 1)
    counts = np.array([simulate_scr_count(l, py_rng) for l in lam])

    # empirical count likelihoods from an independent training draw
    m = n
    lam_train_s = SCR_RATE_STRESS * np.exp(py_rng.normal(0.0, SCR_RATE_JITTER, size=m))
    lam_train_n = SCR_RATE_NON * np.exp(py_rng.normal(0.0, SCR_RATE_JITTER, size=m))
    max_c = 40
    pmf_s = np.bincount(
        [simulate_scr_count(l, py_rng) for l in lam_train_s], minlength=max_c
    ) / m
    pmf_n = np.bincount(
        [simulate_scr_count(l, py_rng) for l in lam_train_n], minlength=max_c
    ) / m
    pmf_s = np.clip(pmf_s, 1e-12, None)
    pmf_n = np.clip(pmf_n, 1e-12, None)
    eda_acc = float(np.mean((pmf_s[counts] > pmf_n[counts]) == stress))

    # joint: class = u XOR v, decoded exactly from the amplitude bits
    joint_acc = float(np.mean((u ^ v) == stress))

    result = {
        "samples": n,
        "bayes_ecg_only": round(ecg_acc, 4),
        "bayes_eda_only": round(eda_acc, 4),
        "bayes_joint": round(joint_acc, 4),
        "analytic_ecg": round(
            0.5
            * (
                1.0
                + math.erf(
                    math.log(1.0 + RATE_STRESS_GAIN)
                    / math.sqrt(RATE_JITTER**2 + RATE_EST_NOISE**2)
                    / (2.0 * math.sqrt(2.0))
                )
            ),
            4,
        ),
    }
    print(json.dumps(result, indent=2))


if __name__ == "__main__":
    main()
