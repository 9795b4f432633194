"""Shared test utilities."""

import numpy as np

from sawdilate.walk import walk_from_sites


def random_saw(rng, n):
    """Simple-sampling SAW (retry on trap): an oracle-side generator that is
    independent of the pivot machinery under test."""
    while True:
        sites = [(0, 0)]
        occ = {(0, 0)}
        ok = True
        for _ in range(n):
            x, y = sites[-1]
            options = [
                s for s in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1))
                if s not in occ
            ]
            if not options:
                ok = False
                break
            nxt = options[rng.integers(len(options))]
            sites.append(nxt)
            occ.add(nxt)
        if ok:
            return walk_from_sites(sites)
