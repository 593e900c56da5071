import zlib

import numpy as np


def stream_key(name):
    """
    :param name: Name of a random sub-stream (string or integer).
    :return: A stable non-negative integer for the name. Strings are hashed
             with CRC32 so the key does not depend on ``PYTHONHASHSEED``.
    """
    if isinstance(name, (int, np.integer)):
        if name < 0:
            raise ValueError("Stream indices must be non-negative, got {}".format(name))
        return int(name)
    return zlib.crc32(str(name).encode("utf-8"))


def make_rng(seed, *streams):
    """
    All the randomness of a run flows from one 64-bit seed through named
    sub-streams, e.g. ``make_rng(seed, "chain", 3)`` or
    ``make_rng(seed, "replicate", 7, "simulate")``.

    :param seed: Master seed (non-negative integer).
    :param streams: Names or indices identifying the sub-stream.
    :return: A ``numpy.random.Generator`` for that sub-stream.
    """
    if seed is None:
        raise ValueError("A seed is required for reproducible streams")
    if int(seed) < 0:
        raise ValueError("Seeds must be non-negative, got {}".format(seed))
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [stream_key(s) for s in streams]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def retained_indices(iters, burnin, thin):
    """
    :param iters: Total number of iterations of a chain (burn-in included).
    :param burnin: Number of initial iterations that are discarded.
    :param thin: Keep one iteration out of ``thin`` after the burn-in.
    :return: Integer array with the (0-based) iterations that are recorded.
    """
    if iters <= burnin:
        raise ValueError("iters ({}) must exceed burnin ({})".format(iters, burnin))
    if burnin < 0 or thin < 1:
        raise ValueError("burnin must be >= 0 and thin >= 1")
    return np.arange(burnin, iters, thin)


def next_pow_two(size):
    """
    :param size: Minimum length required.
    :return: Smallest power of two that is greater or equal than ``size``.
    """
    return 1 << max(int(size) - 1, 0).bit_length()
