"""Seeded, counter-based random number streams.

All randomness in the package flows through Philox generators keyed by a
master seed.  Replica ``i`` of a batch uses the stream derived from
``SeedSequence(master_seed, spawn_key=(i,))``; concurrent workers therefore
produce identical output regardless of scheduling.  Streams for distinct
roles inside one run (diffusion noise, boundary events, initialisation) are
split the same way one level deeper.
"""

from __future__ import annotations

import numpy as np

SeedLike = "int | np.random.SeedSequence | np.random.Generator"


def seed_sequence(seed) -> np.random.SeedSequence:
    """Normalise an int / tuple of ints / SeedSequence into a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (int, np.integer)):
        return np.random.SeedSequence(int(seed))
    if isinstance(seed, (tuple, list)) and all(isinstance(v, (int, np.integer)) for v in seed):
        return np.random.SeedSequence([int(v) for v in seed])
    raise TypeError(f"expected int, ints or SeedSequence, got {type(seed).__name__}")


def generator(seed) -> np.random.Generator:
    """Philox generator for ``seed``; passes Generators through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed_sequence(seed)))


def replica_seed(master_seed, replica: int) -> np.random.SeedSequence:
    """The documented split: replica ``i`` gets spawn_key ``(i,)``."""
    base = seed_sequence(master_seed)
    return np.random.SeedSequence(
        entropy=base.entropy, spawn_key=tuple(base.spawn_key) + (int(replica),)
    )


def replica_generator(master_seed, replica: int) -> np.random.Generator:
    return generator(replica_seed(master_seed, replica))


def split(seed, n: int) -> list[np.random.SeedSequence]:
    """``n`` child sequences of ``seed`` (role streams within one run)."""
    return [replica_seed(seed, i) for i in range(n)]


def state_to_jsonable(gen: np.random.Generator) -> dict:
    """Serialise generator state for checkpoint manifests."""

    def _convert(obj):
        if isinstance(obj, dict):
            return {k: _convert(v) for k, v in obj.items()}
        if isinstance(obj, np.ndarray):
            return {"__ndarray__": obj.tolist(), "dtype": str(obj.dtype)}
        if isinstance(obj, np.integer):
            return int(obj)
        return obj

    return _convert(gen.bit_generator.state)


def generator_from_state(state: dict) -> np.random.Generator:
    """Rebuild a generator from :func:`state_to_jsonable` output."""

    def _restore(obj):
        if isinstance(obj, dict):
            if "__ndarray__" in obj:
                return np.asarray(obj["__ndarray__"], dtype=obj["dtype"])
            return {k: _restore(v) for k, v in obj.items()}
        return obj

    restored = _restore(state)
    bitgen_name = restored.get("bit_generator", "Philox")
    bitgen = getattr(np.random, bitgen_name)()
    bitgen.state = restored
    return np.random.Generator(bitgen)
