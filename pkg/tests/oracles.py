"""Independent reference computations used as test oracles.

Each oracle is written from the mathematical definition with plain loops or
a different numerical route than the library, so agreement is evidence.
"""

import itertools
import math

import numpy as np
from scipy.ndimage import maximum_filter1d


def best_subset_utility(profit, welfare, alpha):
    """Max over all 0/1 decision vectors of the mean alpha-composite (itertools)."""
    n = len(profit)
    best = -math.inf
    for d in itertools.product((0, 1), repeat=n):
        u = sum(((1 - alpha) * p + alpha * w) * x for p, w, x in zip(profit, welfare, d)) / n
        best = max(best, u)
    return best


def scalar_posterior_mean(obs, sigma, sigma_eps):
    """Posterior mean of a zero-mean Gaussian observed with independent Gaussian noise."""
    return obs * sigma ** 2 / (sigma ** 2 + sigma_eps ** 2)


def gaussian_posterior_joint(pred_p, pred_w, sp, sw, rho, ep, ew, dependent=False):
    """E[(p, w) | observation] via the joint-Gaussian formula on the 4-vector (p, w, p_hat, w_hat)."""
    c = rho * sp * sw
    s = np.array([[sp * sp, c], [c, sw * sw]])
    cross = ep * ew if dependent else 0.0
    noise = np.array([[ep * ep, cross], [cross, ew * ew]])
    full = np.block([[s, s], [s, s + noise]])
    k = full[:2, 2:] @ np.linalg.inv(full[2:, 2:])
    return k @ np.array([pred_p, pred_w])


def ridge_normal_equations(X, y, lam):
    """Ridge with standardized columns and free intercept via an augmented least-squares system."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    Z = (X - X.mean(axis=0)) / sd
    n, d = Z.shape
    A = np.vstack([np.column_stack([np.ones(n), Z]),
                   np.column_stack([np.zeros(d), math.sqrt(lam) * np.eye(d)])])
    b = np.concatenate([y, np.zeros(d)])
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    return coef[0], coef[1:]


def top_share_profit(profits, beta, mass=1.0):
    """Mass times the mean profit over the top beta share, with a fractional boundary member."""
    p = sorted(profits, reverse=True)
    n = len(p)
    take, total = beta * n, 0.0
    for v in p:
        if take <= 0:
            break
        part = min(1.0, take)
        total += part * v
        take -= part
    return mass * total / n


def dp_grid_brute_force(fa, fb, k_band):
    """Max of fa[i] + fb[j] over grid indices with |i - j| <= k_band."""
    band = maximum_filter1d(fb, size=2 * k_band + 1, mode="constant", cval=-np.inf)
    return float(np.max(fa + band))


def dp_grid_brute_force_loops(fa, fb, k_band):
    best = -math.inf
    for i, a in enumerate(fa):
        for j in range(max(0, i - k_band), min(len(fb), i + k_band + 1)):
            best = max(best, a + fb[j])
    return best


def normal_expected_positive_part(sd):
    """E[max(Y, 0)] for Y ~ N(0, sd^2) by numerical quadrature."""
    from scipy.integrate import quad
    if sd == 0:
        return 0.0
    # a finite interval on the integrand's own scale; quad over [0, inf) misses tiny sd
    val, _ = quad(lambda y: y * math.exp(-0.5 * (y / sd) ** 2) / (sd * math.sqrt(2 * math.pi)),
                  0, 40 * sd)
    return val


def union_of_boxes_area(points, ref):
    """Area of the union of boxes [ref, point] by coordinate compression."""
    boxes = [(p, w) for p, w in points if p > ref[0] and w > ref[1]]
    xs = sorted({ref[0], *(p for p, _ in boxes)})
    ys = sorted({ref[1], *(w for _, w in boxes)})
    area = 0.0
    for x0, x1 in zip(xs, xs[1:]):
        for y0, y1 in zip(ys, ys[1:]):
            if any(p >= x1 and w >= y1 for p, w in boxes):
                area += (x1 - x0) * (y1 - y0)
    return area
