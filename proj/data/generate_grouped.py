"""Draws the synthetic grouped mixtures from the full observation model.

Each row: y_j ~ N(sum p q (mu_s + mu_c) / sum p q,
                  sum p^2 q^2 (sd_s^2 + sd_c^2) / (sum p q)^2 + sigma_j^2).
"""
import csv

import numpy as np

rng = np.random.default_rng(20240601)

mu_s = np.array([[-11.17, 6.49], [-30.88, 4.43], [-11.17, 11.19], [-14.06, 9.82]])
sd_s = np.array([[1.21, 1.46], [0.64, 2.27], [1.96, 1.11], [1.17, 0.83]])
mu_c = np.array([[1.63, 3.54]] * 4)
sd_c = np.array([[0.63, 0.74]] * 4)
q = np.array([[0.36, 0.03], [0.4, 0.04], [0.21, 0.02], [0.18, 0.01]])
sigma = np.array([0.5, 0.4])

groups = {
    "Period 1": ([0.60, 0.08, 0.14, 0.18], 30),
    "Period 2": ([0.15, 0.10, 0.30, 0.45], 25),
    "Period 3": ([0.10, 0.40, 0.25, 0.25], 35),
    "Period 4": ([0.25, 0.25, 0.25, 0.25], 28),
    "Period 5": ([0.05, 0.15, 0.20, 0.60], 32),
    "Period 6": ([0.05, 0.20, 0.15, 0.60], 30),
    "Period 7": ([0.30, 0.05, 0.50, 0.15], 27),
    "Period 8": ([0.40, 0.30, 0.10, 0.20], 24),
}

with open("grouped_mixtures.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["d13C_Pl", "d15N_Pl", "group"])
    for name, (p, n) in groups.items():
        p = np.array(p)
        pq = p[:, None] * q
        mean = (pq * (mu_s + mu_c)).sum(0) / pq.sum(0)
        var = (pq**2 * (sd_s**2 + sd_c**2)).sum(0) / pq.sum(0) ** 2 + sigma**2
        for _ in range(n):
            y = rng.normal(mean, np.sqrt(var))
            w.writerow([f"{y[0]:.3f}", f"{y[1]:.3f}", name])
