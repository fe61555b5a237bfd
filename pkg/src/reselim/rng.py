"""Counter-based random streams.

Every Monte Carlo draw is a pure function of ``(master_seed, run, edge)``,
so the outcome of run ``i`` does not depend on batching, thread count or
the order in which runs are executed.
"""
import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_EDGE_SALT = 0xD1B54A32D192ED03
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def mix64(x):
    """splitmix64 finalizer on a python int."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _C1) & MASK64
    x = ((x ^ (x >> 27)) * _C2) & MASK64
    return x ^ (x >> 31)


def _mix64_array(x):
    # uint64 array arithmetic wraps modulo 2**64
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_C1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_C2)
    return x ^ (x >> np.uint64(31))


def derive_seed(master_seed, tag):
    """Sub-seed for a named consumer (``"tr"``, ``"mc"``, ...).

    Adding a new tag never shifts the streams of existing ones.
    """
    digest = hashlib.blake2b(f"{int(master_seed)}:{tag}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def run_key(master_seed, run):
    return mix64(mix64(master_seed) + (run + 1) * _GOLDEN)


def edge_key(edge):
    return mix64((edge + 1) * _EDGE_SALT)


def run_keys(master_seed, runs):
    base = np.uint64(mix64(master_seed))
    r = np.asarray(runs, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64_array(base + (r + np.uint64(1)) * np.uint64(_GOLDEN))


def edge_keys(edges):
    e = np.asarray(edges, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64_array((e + np.uint64(1)) * np.uint64(_EDGE_SALT))


def uniforms(rkeys, ekeys):
    """Vectorised uniforms in [0, 1) for paired run and edge keys."""
    with np.errstate(over="ignore"):
        bits = _mix64_array(rkeys ^ ekeys)
    return (bits >> np.uint64(11)).astype(np.float64) * _INV_2_53


class RunStream:
    """The random stream of one Monte Carlo run.

    ``uniform(edge)`` is the coin for the single activation attempt that
    ``edge`` gets in this run.
    """

    def __init__(self, master_seed, run):
        self.master_seed = int(master_seed)
        self.run = int(run)
        self._key = run_key(self.master_seed, self.run)

    def uniform(self, edge):
        bits = mix64(self._key ^ edge_key(int(edge)))
        return (bits >> 11) * _INV_2_53
