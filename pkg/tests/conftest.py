"""Shared generators for randomized oracle tests."""

import numpy as np
import pytest

from hyperqaoa import hypergraph as hg


def random_connected(rng, n, probs, max_tries=400):
    """One connected random instance, or None if the draw is unlucky."""
    seed = int(rng.integers(2**63))
    try:
        return hg.generate_random(hg.GenerationSpec(n, probs, seed, max_retries=max_tries))
    except hg.GenerationError:
        return None


def girth4_instances(count, seed, n_range=(4, 10), include_k1=True):
    """Connected instances with Berge girth >= 4, mixed localities."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        probs = {2: 1.6 / n, 3: 3.0 / n**2}
        if n >= 6:
            probs[4] = 4.0 / n**3
        if include_k1 and rng.random() < 0.5:
            probs[1] = 0.2
        h = random_connected(rng, n, probs)
        if h is None or hg.has_short_berge_cycle(h):
            continue
        out.append(h)
    return out


def cyclic_instances(count, seed, n_range=(4, 8), require_short_cycle=False):
    """Connected instances dense enough to carry short Berge cycles."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        probs = {2: 0.45, 3: 0.12}
        if rng.random() < 0.4:
            probs[1] = 0.3
        h = random_connected(rng, n, probs)
        if h is None:
            continue
        if require_short_cycle and not hg.has_short_berge_cycle(h):
            continue
        out.append(h)
    return out


@pytest.fixture(scope="session")
def small_girth4_batch():
    return girth4_instances(30, seed=424242)


@pytest.fixture(scope="session")
def small_cyclic_batch():
    return cyclic_instances(30, seed=313131)
