"""On-disk cache of band sweeps keyed by a content hash of their inputs."""

import hashlib
import json
import os
import tempfile

import numpy as np

CACHE_VERSION = 1


def cache_key(W, b, size, quad_order, n_bands, grid):
    payload = {
        "version": CACHE_VERSION,
        "period": W.period,
        "cos": list(W.cos_coeffs),
        "sin": list(W.sin_coeffs),
        "b": b,
        "N": size,
        "Q": quad_order,
        "n_bands": n_bands,
        "grid": grid,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


class BandCache:
    """Stores (k_grid, energies, derivatives) arrays as versioned .npz files."""

    def __init__(self, directory):
        self.directory = directory

    def _path(self, key):
        return os.path.join(self.directory, f"bands-{key}.npz")

    def load(self, key):
        path = self._path(key)
        if not os.path.exists(path):
            return None
        try:
            with np.load(path) as data:
                if int(data["version"]) != CACHE_VERSION:
                    raise ValueError("stale cache version")
                return data["k"].copy(), data["energies"].copy(), data["derivs"].copy()
        except (ValueError, KeyError, OSError):
            os.remove(path)
            return None

    def store(self, key, k, energies, derivs):
        os.makedirs(self.directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".npz")
        os.close(fd)
        np.savez(tmp, version=CACHE_VERSION, k=k, energies=energies, derivs=derivs)
        os.replace(tmp, self._path(key))

    def sweep(self, bands, k, threads=1):
        """Cached equivalent of ``bands.sweep(k)``."""
        key = cache_key(bands.W, bands.b, bands.basis.size, bands.basis.quad_order, bands.n_bands, len(k))
        hit = self.load(key)
        if hit is not None and np.array_equal(hit[0], k):
            return hit[1], hit[2]
        energies, derivs = bands.sweep(k, threads=threads)
        self.store(key, np.asarray(k), energies, derivs)
        return energies, derivs
