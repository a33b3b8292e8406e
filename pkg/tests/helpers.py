"""Random local problems shared by the minimizer tests and the acceptance suite."""

import numpy as np

from slhjb.controls import ControlSet, SectorSet
from slhjb.local import LocalCost

BALL2 = ControlSet.ball(2)
BALL3 = ControlSet.ball(3)
BOX = ControlSet.symmetric_box([0.3, 0.3])


def sector(U: ControlSet, lo, hi) -> SectorSet:
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    signs = tuple(int(s) for s in np.where(lo >= 0, 1, -1))
    return SectorSet(signs, np.zeros((U.m, U.m)), np.zeros(U.m), lo, hi, U)


def orthant(U: ControlSet, signs) -> SectorSet:
    s = np.asarray(signs)
    if U.is_ball:
        return sector(U, np.where(s < 0, -U.radius, 0.0), np.where(s < 0, 0.0, U.radius))
    return sector(U, np.where(s < 0, U.lower, 0.0), np.where(s < 0, 0.0, U.upper))


def random_sub_box(rng, U: ControlSet) -> SectorSet:
    """Orthant of the box, or (half the time) a box straddling zero."""
    if rng.random() < 0.5:
        return orthant(U, rng.choice([-1, 1], U.m))
    lo = U.lower * rng.uniform(0.2, 1.0, U.m)
    hi = U.upper * rng.uniform(0.2, 1.0, U.m)
    return sector(U, lo, hi)


# family name -> (control set, quad?, bilinear/linear-only?, l1?)
FAMILIES = {
    "quadratic": (BALL2, True, False),
    "quadratic_3d": (BALL3, True, False),
    "quadratic_box": (BOX, True, False),
    "minimum_time": (BALL2, False, False),
    "minimum_time_3d": (BALL3, False, False),
    "minimum_time_l1": (BALL2, False, True),
    "quadratic_l1": (BALL2, True, True),
    "quadratic_l1_box": (BOX, True, True),
}


def random_instance(rng, family: str) -> LocalCost:
    U, quad, l1 = FAMILIES[family]
    m = U.m
    sec = orthant(U, rng.choice([-1, 1], m)) if U.is_ball else random_sub_box(rng, U)
    q = np.full(m, rng.uniform(0.01, 1.0)) if quad else np.zeros(m)
    bilinear = rng.normal() if (not quad and m == 2) else 0.0
    w = np.full(m, rng.uniform(0.0, 0.5)) if l1 else np.zeros(m)
    return LocalCost(q, rng.normal(size=m), float(rng.normal()), w, bilinear, sector=sec)
