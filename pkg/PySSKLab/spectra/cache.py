from __future__ import annotations

import os
import tempfile
from typing import Optional

import numpy as np

from ..core import lab
from ..logger import LOGGER
from ..measure import Measure
from .sample import SpectralSample, sample_matrix


class SampleCache:
    """Binary cache of spectral samples keyed by measure hash, N, λ and seed.

    Each sample is one .npz file holding v and the eigenvalues; dense
    matrices are never cached.
    """

    def __init__(self, cache_dir: Optional[str] = None) -> None:
        self._cache_dir = cache_dir or lab.cache_dir
        if self._cache_dir is None:
            raise ValueError("SampleCache needs a directory, set Laboratory.cache_dir or pass one.")
        os.makedirs(self._cache_dir, exist_ok=True)

    @property
    def cache_dir(self) -> str:
        return self._cache_dir

    def path(self, measure: Measure, lam: float, N: int, seed: int) -> str:
        """Returns the file the sample is stored under."""
        key = f"{measure.spec_hash()[:16]}_N{N}_lam{float(lam)!r}_seed{int(seed)}.npz"
        return os.path.join(self._cache_dir, key)

    def get(self, measure: Measure, lam: float, N: int, seed: int) -> Optional[SpectralSample]:
        path = self.path(measure, lam, N, seed)
        if not os.path.exists(path):
            return None
        with np.load(path) as stored:
            v, eigs = stored["v"], stored["eigs"]
        if eigs.size != N:
            LOGGER.warning(f"SampleCache: {path} holds {eigs.size} eigenvalues, expected {N}; ignored.")
            return None
        v.setflags(write=False)
        eigs.setflags(write=False)
        return SpectralSample(lam=float(lam), v=v, eigs=eigs, seed=int(seed))

    def put(self, measure: Measure, sample: SpectralSample) -> str:
        """Store the sample; the file appears under its final name only once complete."""
        path = self.path(measure, sample.lam, sample.N, sample.seed)
        handle, partial = tempfile.mkstemp(suffix=".npz.part", dir=self._cache_dir)
        try:
            with os.fdopen(handle, "wb") as stream:
                np.savez(stream, v=sample.v, eigs=sample.eigs)
            os.replace(partial, path)
        except BaseException:
            if os.path.exists(partial):
                os.remove(partial)
            raise
        return path

    def sample(self, measure: Measure, lam: float, N: int, seed: int) -> SpectralSample:
        """Returns the cached sample, drawing and storing it on a miss."""
        cached = self.get(measure, lam, N, seed)
        if cached is not None:
            LOGGER.debug(f"SampleCache: hit for N={N}, seed={seed}.")
            return cached
        sample = sample_matrix(measure, lam, N, seed)
        self.put(measure, sample)
        return sample
