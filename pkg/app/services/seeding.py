import numpy as np

from app.exceptions import InvalidInputError


def spawn_seeds(seed: int, n: int) -> list[int]:
    """Derivar n semillas independientes de una sola semilla (SeedSequence)"""
    if seed < 0:
        raise InvalidInputError(f"seed must be non-negative, got {seed}")
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(child.generate_state(1)[0]) for child in children]
