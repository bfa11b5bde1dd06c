"""Numerical tolerances shared by all modules.

The defaults are module-level constants in :data:`TOL`.  They can be replaced
for a block of code with :func:`overridden`, which is what the CLI does when a
config file carries ``tol.<name> = value`` lines.
"""

from __future__ import annotations

import contextlib
import dataclasses
import threading


@dataclasses.dataclass(frozen=True)
class Tolerances:
    det: float = 1e-9
    eig: float = 1e-8
    pt: float = 1e-9
    inc: float = 1e-9
    conic: float = 1e-8
    side: float = 1e-10
    cr: float = 1e-8
    rel: float = 1e-7
    angle: float = 1e-12
    flag: float = 1e-6


_lock = threading.Lock()
TOL = Tolerances()


def current() -> Tolerances:
    return TOL


@contextlib.contextmanager
def overridden(**changes):
    """Temporarily replace some tolerances, e.g. ``overridden(inc=1e-8)``."""
    global TOL
    with _lock:
        previous = TOL
        TOL = dataclasses.replace(previous, **changes)
    try:
        yield TOL
    finally:
        with _lock:
            TOL = previous
