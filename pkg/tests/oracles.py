"""Independent brute-force oracles.

Everything here is written straight from the defining formulas with
scalar loops (or stdlib helpers), deliberately sharing no code with the
package's optimised implementations. Tests freeze expected values from
these, never the other way around.
"""

from __future__ import annotations

import colorsys
import math
from bisect import bisect_left

import numpy as np

# offsets identical conventions to the package (direction sign is
# irrelevant under symmetric counting)
ANGLE_STEPS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}
LBP_OFFSETS = [(0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1)]


def glcm_reference(arr, levels, distances, angles):
    """Double-loop symmetric pair counting pooled over all offsets."""
    h, w = arr.shape
    counts = [[0] * levels for _ in range(levels)]
    for d in distances:
        for angle in angles:
            dr, dc = ANGLE_STEPS[angle]
            dr, dc = dr * d, dc * d
            for r in range(h):
                for c in range(w):
                    r2, c2 = r + dr, c + dc
                    if 0 <= r2 < h and 0 <= c2 < w:
                        a, b = int(arr[r, c]), int(arr[r2, c2])
                        counts[a][b] += 1
                        counts[b][a] += 1
    counts = np.array(counts, dtype=np.int64)
    return counts / counts.sum()


def glcm_stats_reference(probs):
    """(contrast, homogeneity, energy, correlation) by direct summation."""
    levels = probs.shape[0]
    contrast = homogeneity = energy = 0.0
    for i in range(levels):
        for j in range(levels):
            p = probs[i, j]
            contrast += (i - j) ** 2 * p
            homogeneity += p / (1 + abs(i - j))
            energy += p * p
    mu_i = sum(i * probs[i, j] for i in range(levels) for j in range(levels))
    mu_j = sum(j * probs[i, j] for i in range(levels) for j in range(levels))
    var_i = sum((i - mu_i) ** 2 * probs[i, j] for i in range(levels) for j in range(levels))
    var_j = sum((j - mu_j) ** 2 * probs[i, j] for i in range(levels) for j in range(levels))
    if var_i <= 1e-12 or var_j <= 1e-12:
        correlation = 0.0
    else:
        cov = sum(
            (i - mu_i) * (j - mu_j) * probs[i, j]
            for i in range(levels)
            for j in range(levels)
        )
        correlation = cov / math.sqrt(var_i * var_j)
    return contrast, homogeneity, energy, correlation


def lbp_riu2_reference(arr):
    """Per-pixel transition counting on interior pixels; 10-bin histogram."""
    h, w = arr.shape
    hist = [0] * 10
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            center = int(arr[r, c])
            bits = [
                1 if int(arr[r + dr, c + dc]) >= center else 0
                for dr, dc in LBP_OFFSETS
            ]
            transitions = sum(bits[p] != bits[(p + 1) % 8] for p in range(8))
            code = sum(bits) if transitions <= 2 else 9
            hist[code] += 1
    return np.array(hist, dtype=np.int64)


def clahe_reference(arr, depth_max, clip_limit, grid):
    """Straightforward tile-by-tile histogram clipping CLAHE.

    Mirrors the documented algorithm (256 bins, floor tile edges, uniform
    excess redistribution, bilinear blending between tile lookup tables)
    with per-pixel loops.
    """
    h, w = arr.shape
    n_bins = 256
    shift = 8 if depth_max == 65535 else 0
    r_edges = [(i * h) // grid for i in range(grid + 1)]
    c_edges = [(i * w) // grid for i in range(grid + 1)]
    luts = [[None] * grid for _ in range(grid)]
    centers_r = [(r_edges[i] + r_edges[i + 1] - 1) / 2.0 for i in range(grid)]
    centers_c = [(c_edges[j] + c_edges[j + 1] - 1) / 2.0 for j in range(grid)]
    for ti in range(grid):
        for tj in range(grid):
            hist = [0] * n_bins
            area = 0
            for r in range(r_edges[ti], r_edges[ti + 1]):
                for c in range(c_edges[tj], c_edges[tj + 1]):
                    hist[int(arr[r, c]) >> shift] += 1
                    area += 1
            threshold = max(1, int(clip_limit * area / n_bins))
            excess = sum(max(v - threshold, 0) for v in hist)
            hist = [min(v, threshold) for v in hist]
            hist = [v + excess // n_bins for v in hist]
            for b in range(excess % n_bins):
                hist[b] += 1
            lut = []
            acc = 0
            for v in hist:
                acc += v
                lut.append(math.floor(acc * depth_max / area + 0.5))
            luts[ti][tj] = lut
    out = np.zeros_like(arr)
    for r in range(h):
        i1 = min(bisect_left(centers_r, float(r)), grid - 1)
        i0 = min(max(i1 - 1, 0), grid - 1)
        span_r = centers_r[i1] - centers_r[i0]
        fy = (r - centers_r[i0]) / span_r if span_r > 0 else 0.0
        fy = min(max(fy, 0.0), 1.0)
        for c in range(w):
            j1 = min(bisect_left(centers_c, float(c)), grid - 1)
            j0 = min(max(j1 - 1, 0), grid - 1)
            span_c = centers_c[j1] - centers_c[j0]
            fx = (c - centers_c[j0]) / span_c if span_c > 0 else 0.0
            fx = min(max(fx, 0.0), 1.0)
            b = int(arr[r, c]) >> shift
            l00 = luts[i0][j0][b]
            l01 = luts[i0][j1][b]
            l10 = luts[i1][j0][b]
            l11 = luts[i1][j1][b]
            v0 = l00 * (1.0 - fx) + l01 * fx
            v1 = l10 * (1.0 - fx) + l11 * fx
            val = v0 * (1.0 - fy) + v1 * fy
            out[r, c] = min(max(math.floor(val + 0.5), 0), depth_max)
    return out


def hsv_reference(pixels):
    """Per-pixel HSV via colorsys; H in degrees, S and V in [0, 1]."""
    h, w, _ = pixels.shape
    hh = np.zeros((h, w))
    ss = np.zeros((h, w))
    vv = np.zeros((h, w))
    for r in range(h):
        for c in range(w):
            hs, sat, val = colorsys.rgb_to_hsv(
                pixels[r, c, 0] / 255.0,
                pixels[r, c, 1] / 255.0,
                pixels[r, c, 2] / 255.0,
            )
            hh[r, c] = hs * 360.0
            ss[r, c] = sat
            vv[r, c] = val
    return hh, ss, vv


def moments_reference(values):
    """(mean, population std, skewness, excess kurtosis) from definitions."""
    values = [float(v) for v in values]
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    std = math.sqrt(var)
    if std == 0.0:
        return mean, 0.0, 0.0, 0.0
    skew = sum(((v - mean) / std) ** 3 for v in values) / n
    kurt = sum(((v - mean) / std) ** 4 for v in values) / n - 3.0
    return mean, std, skew, kurt


def entropy_energy_reference(hist):
    total = sum(hist)
    entropy = 0.0
    energy = 0.0
    for count in hist:
        if count:
            p = count / total
            entropy -= p * math.log2(p)
            energy += p * p
    return entropy, energy


def cubic_kernel_reference(t):
    """Keys bicubic kernel, a = -0.5, from the closed form."""
    at = abs(t)
    if at <= 1.0:
        return ((1.5 * at - 2.5) * at) * at + 1.0
    if at < 2.0:
        return ((-0.5 * at + 2.5) * at - 4.0) * at + 2.0
    return 0.0


def _resample_axis_reference(arr, n_out):
    """Scalar-loop separable pass over axis 0 (float64 in/out)."""
    n_in = arr.shape[0]
    out = np.zeros((n_out,) + arr.shape[1:])
    for j in range(n_out):
        src = (j + 0.5) * (n_in / n_out) - 0.5
        base = math.floor(src)
        t = src - base
        weights = [cubic_kernel_reference(t - off) for off in (-1, 0, 1, 2)]
        s = weights[0] + weights[1] + weights[2] + weights[3]
        weights = [wk / s for wk in weights]
        acc = np.zeros(arr.shape[1:])
        for k, off in enumerate((-1, 0, 1, 2)):
            idx = min(max(base + off, 0), n_in - 1)
            acc = acc + weights[k] * arr[idx]
        out[j] = acc
    return out


def bicubic_reference(arr, target, depth_max):
    """Separable Catmull-Rom resize with clamped edge taps, scalar loops."""
    vals = arr.astype(np.float64)
    vals = _resample_axis_reference(vals, target)
    vals = np.swapaxes(_resample_axis_reference(np.swapaxes(vals, 0, 1), target), 0, 1)
    return np.clip(np.floor(vals + 0.5), 0, depth_max)


def project_capped_simplex(v, cap):
    """Euclidean projection onto {0 <= a <= cap, sum(a) = 1} by bisection."""
    lo = float(np.min(v)) - cap - 1.0
    hi = float(np.max(v))
    for _ in range(200):
        tau = (lo + hi) / 2.0
        total = float(np.clip(v - tau, 0.0, cap).sum())
        if total > 1.0:
            lo = tau
        else:
            hi = tau
    return np.clip(v - hi, 0.0, cap)


def ocsvm_dual_reference(kernel, cap, max_iter=300_000, tol=1e-13):
    """Dense projected-gradient solver for min 1/2 a'Ka on the capped simplex."""
    m = kernel.shape[0]
    lipschitz = float(np.linalg.eigvalsh(kernel).max())
    step = 1.0 / max(lipschitz, 1e-12)
    alpha = project_capped_simplex(np.full(m, 1.0 / m), cap)
    for _ in range(max_iter):
        grad = kernel @ alpha
        new = project_capped_simplex(alpha - step * grad, cap)
        if float(np.abs(new - alpha).max()) < tol:
            alpha = new
            break
        alpha = new
    grad = kernel @ alpha
    margin = 1e-9 * cap
    free = (alpha > margin) & (alpha < cap - margin)
    if free.any():
        rho = float(grad[free].mean())
    else:
        lower = grad[alpha >= cap - margin]
        upper = grad[alpha <= margin]
        if lower.size and upper.size:
            rho = float((lower.max() + upper.min()) / 2.0)
        elif lower.size:
            rho = float(lower.max())
        else:
            rho = float(upper.min())
    return alpha, rho


def normal_cdf_reference(x):
    """Standard normal CDF from the Taylor series of its integral."""
    # Phi(x) = 1/2 + pdf(x) * sum_{k>=0} x^(2k+1) / (1*3*...*(2k+1))
    term = float(x)
    total = term
    for k in range(1, 300):
        term *= x * x / (2 * k + 1)
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1.0):
            break
    return 0.5 + total * math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
