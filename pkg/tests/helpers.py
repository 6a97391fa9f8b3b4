import numpy as np


def within(est_mean, target, stderr, k=4.0):
    """Per-coordinate |mean - target| <= k * stderr."""
    return np.all(np.abs(np.asarray(est_mean) - np.asarray(target)) <= k * np.asarray(stderr))
