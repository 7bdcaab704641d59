"""Independent brute-force reference implementations used only by tests.

These deliberately use naive loops and closed forms, never the library's
own code paths.
"""

import math
from itertools import permutations


def mse_bf(ref, mod):
    total = 0.0
    n = 0
    for r_row, m_row in zip(ref.tolist(), mod.tolist()):
        for r, m in zip(r_row, m_row):
            total += (r - m) ** 2
            n += 1
    return total / n


def psnr_bf(ref, mod):
    err = mse_bf(ref, mod)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / err)


def hist_bf(img):
    counts = [0] * 256
    n = 0
    for row in img.tolist():
        for v in row:
            counts[min(max(int(math.floor(v)), 0), 255)] += 1
            n += 1
    return [c / n for c in counts]


def emd_bf(ref, mod):
    hr, hm = hist_bf(ref), hist_bf(mod)
    cr = cm = 0.0
    total = 0.0
    for k in range(256):
        cr += hr[k]
        cm += hm[k]
        total += abs(cr - cm)
    return total


def entropy_bf(img):
    h = 0.0
    for p in hist_bf(img):
        if p > 0:
            h -= p * math.log2(p)
    return h


def mi_bf(ref, mod):
    joint = [[0] * 64 for _ in range(64)]
    n = 0
    for r_row, m_row in zip(ref.tolist(), mod.tolist()):
        for r, m in zip(r_row, m_row):
            a = min(max(int(r // 4), 0), 63)
            b = min(max(int(m // 4), 0), 63)
            joint[a][b] += 1
            n += 1
    pa = [sum(joint[a]) / n for a in range(64)]
    pb = [sum(joint[a][b] for a in range(64)) / n for b in range(64)]
    mi = 0.0
    for a in range(64):
        for b in range(64):
            p = joint[a][b] / n
            if p > 0:
                mi += p * math.log2(p / (pa[a] * pb[b]))
    return mi


def seg_bf(ref, mod, ignore=255):
    """Per-class dice/iou/accuracy by direct pixel enumeration."""
    pixels = [
        (int(r), int(m))
        for r_row, m_row in zip(ref.tolist(), mod.tolist())
        for r, m in zip(r_row, m_row)
        if r != ignore
    ]
    classes = sorted({r for r, _ in pixels} | {m for _, m in pixels} - {ignore})
    classes = [c for c in classes if c != ignore]
    ref_classes = {r for r, _ in pixels}
    dices, ious, accs = [], [], []
    for c in classes:
        inter = sum(1 for r, m in pixels if r == c and m == c)
        n_ref = sum(1 for r, _ in pixels if r == c)
        n_mod = sum(1 for _, m in pixels if m == c)
        union = n_ref + n_mod - inter
        dices.append(2 * inter / (n_ref + n_mod) if n_ref + n_mod else 0.0)
        ious.append(inter / union if union else 0.0)
        if c in ref_classes:
            accs.append(inter / n_ref)
    return (
        sum(dices) / len(dices),
        sum(ious) / len(ious),
        sum(accs) / len(accs),
    )


def frechet_diag_bf(mu_a, var_a, mu_b, var_b):
    """Closed-form Fréchet distance for diagonal covariances."""
    d = sum((ma - mb) ** 2 for ma, mb in zip(mu_a, mu_b))
    d += sum(
        (math.sqrt(va) - math.sqrt(vb)) ** 2 for va, vb in zip(var_a, var_b)
    )
    return d


def best_assignment_iou_sum(iou_matrix, thresh):
    """Optimal one-to-one assignment score by exhaustive enumeration."""
    n_ref = len(iou_matrix)
    n_mod = len(iou_matrix[0]) if n_ref else 0
    best = 0.0
    k = min(n_ref, n_mod)
    for ref_subset in permutations(range(n_ref), k):
        for mod_subset in permutations(range(n_mod), k):
            score = 0.0
            for ri, mi in zip(ref_subset, mod_subset):
                if iou_matrix[ri][mi] >= thresh:
                    score += iou_matrix[ri][mi]
            best = max(best, score)
    return best
