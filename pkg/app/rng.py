#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Random streams
Counter-based Philox generators, one independent stream per (seed, stream id)
"""

from typing import Dict, Any

import numpy as np

ALGORITHM = "philox4x64"


def make_stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """
    Create the generator for a (seed, stream id) pair

    Args:
        seed: Non-negative 64-bit seed
        stream_id: Replica or worker index

    Returns:
        numpy Generator backed by Philox
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(sequence))


def stream_metadata(seed: int, stream_id: int = 0) -> Dict[str, Any]:
    """Metadata describing a stream, for output headers"""
    return {"rng": ALGORITHM, "seed": int(seed), "stream": int(stream_id)}
