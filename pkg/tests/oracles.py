"""Independent pure-Python reference implementations used by the tests."""
import math


def sodp_points(x):
    return [(x[k + 1] - x[k], x[k + 2] - x[k + 1]) for k in range(len(x) - 2)]


def region_counts(x, radii=None):
    """Per-point loop: differences, signs and norms recomputed from scratch."""
    x = [float(v) for v in x]
    pts = sodp_points(x)
    norms = [math.sqrt(a * a + b * b) for a, b in pts]
    if radii is None:
        d = math.sqrt(math.fsum(r * r for r in norms) / len(norms))
        if d == 0:
            d = 1e-12
        radii = (d, 2 * d, 3 * d)
    counts = [0] * 16
    for (a, b), r in zip(pts, norms):
        if a >= 0 and b >= 0:
            q = 1
        elif a < 0 and b >= 0:
            q = 2
        elif a < 0 and b < 0:
            q = 3
        else:
            q = 4
        if r <= radii[0]:
            band = 1
        elif r <= radii[1]:
            band = 2
        elif r <= radii[2]:
            band = 3
        else:
            band = 4
        counts[(q - 1) * 4 + (band - 1)] += 1
    return counts


def swap_quadrants(counts):
    """Map counts of x to the expected counts of -x: I<->III, II<->IV band-wise."""
    blocks = [list(counts[i * 4:(i + 1) * 4]) for i in range(4)]
    return blocks[2] + blocks[3] + blocks[0] + blocks[1]
