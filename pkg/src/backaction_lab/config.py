"""Process-wide numerical defaults.

Only scalars live here. Everything that depends on them reads the current
value at call time, so ``using(hbar=...)`` affects every call made inside
the block.
"""

from contextlib import contextmanager
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Settings:
    hbar: float = 1.0
    joint_dim_cap: int = 2**20
    amp_tol: float = 1e-10
    degeneracy_tol: float = 1e-9
    fd_step: float = 1e-4


_current = Settings()


def get_settings():
    return _current


def get_hbar():
    return _current.hbar


def set_settings(**changes):
    """Replace fields of the global settings; returns the previous settings."""
    global _current
    previous = _current
    new = replace(_current, **changes)
    if not new.hbar > 0:
        raise ValueError(f"hbar must be positive, got {new.hbar}")
    if new.joint_dim_cap < 1:
        raise ValueError("joint_dim_cap must be >= 1")
    if not 0 < new.amp_tol < 1:
        raise ValueError(f"amp_tol must lie in (0, 1), got {new.amp_tol}")
    _current = new
    return previous


@contextmanager
def using(**changes):
    global _current
    previous = set_settings(**changes)
    try:
        yield _current
    finally:
        _current = previous
