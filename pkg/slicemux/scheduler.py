"""
Per-slot bandwidth allocation

Each slot the slices' demands are compared with the capacity of the scheme.
Under contention a deficit-weighted knapsack picks the slices to serve in
full, and leftover bandwidth is handed out to the ones that were not.
"""
from dataclasses import dataclass
from math import floor
import re

import numpy

from . import NOSH, SH, SHT
from .exceptions import InvalidParams, InvariantError, PreconditionViolated
from .utils import getLogger


log = getLogger(__name__)

CAPACITY_TOL = 1e-9


@dataclass(frozen=True)
class Scheme:
    """
    Allocation scheme

    NoSh: no sharing, capacity is the sum of the slices' percentile demands
    and only slices within their percentile take part in the knapsack.
    Sh: sharing, all slices take part.  ShT<n>: sharing with a sample-size n
    anomaly test, slices tested H1 are served last.
    """
    kind: str
    n: int = None

    @classmethod
    def parse(cls, text, default_n=None):
        text = str(text).strip()
        if text in (NOSH, SH):
            return cls(text)
        m = re.fullmatch(SHT + r'(\d*)', text)
        if m is None:
            raise InvalidParams(f'unknown scheme: {text!r}')
        n = int(m[1]) if m[1] else default_n
        if n is None:
            raise InvalidParams(f'scheme {text!r} needs a sample size')
        return cls(SHT, n)

    def __str__(self):
        if self.kind == SHT:
            return f'{SHT}{self.n}'
        return self.kind

    @property
    def tests(self):
        return self.kind == SHT

    def capacity(self, plan):
        if self.kind == NOSH:
            return plan.sum_w_h
        return plan.w_c


def update_deficits(deficits, accepted, p_h):
    """ d(t + 1) = max(d(t) - u(t), 0) + P^H """
    deficits = numpy.asarray(deficits, dtype=float)
    accepted = numpy.asarray(accepted, dtype=float)
    return numpy.maximum(deficits - accepted, 0.0) + numpy.asarray(p_h)


def knapsack(weights, demands, capacity):
    """
    Exact 0/1 knapsack: maximize sum(weights * u) with
    sum(demands * u) <= capacity

    Among optimal selections the one with the larger total accepted demand
    wins, then the lexicographically smallest set of indexes.  Values within
    a relative 1e-9 count as equal.  Dynamic program over integer capacity,
    O(len(demands) * capacity).

    :return: numpy bool array u
    """
    weights = numpy.asarray(weights, dtype=float)
    demands = numpy.asarray(demands, dtype=int)
    size = len(demands)
    if size == 0:
        return numpy.zeros(0, dtype=bool)
    if capacity < 0 or (demands < 0).any() or (weights < 0).any():
        raise InvalidParams('knapsack needs nonnegative weights, demands and '
                            'capacity')
    cap = int(floor(capacity + CAPACITY_TOL))
    tol = 1e-9 * max(1.0, float(weights.sum()))

    # best (value, load) using items i and up with capacity c
    value = numpy.zeros((size + 1, cap + 1))
    load = numpy.zeros((size + 1, cap + 1), dtype=int)
    for i in range(size - 1, -1, -1):
        value[i] = value[i + 1]
        load[i] = load[i + 1]
        w = demands[i]
        if w > cap:
            continue
        take_v = value[i + 1, :cap + 1 - w] + weights[i]
        take_l = load[i + 1, :cap + 1 - w] + w
        skip_v = value[i + 1, w:]
        skip_l = load[i + 1, w:]
        better = (take_v > skip_v + tol) \
            | ((numpy.abs(take_v - skip_v) <= tol) & (take_l > skip_l))
        value[i, w:] = numpy.where(better, take_v, skip_v)
        load[i, w:] = numpy.where(better, take_l, skip_l)

    # take items in index order whenever that still reaches the optimum
    chosen = numpy.zeros(size, dtype=bool)
    c = cap
    for i in range(size):
        if load[i, c] == 0 and value[i, c] <= tol:
            # nothing more needed, the empty rest is smallest
            break
        w = demands[i]
        if w > c:
            continue
        if abs(value[i + 1, c - w] + weights[i] - value[i, c]) <= tol \
                and load[i + 1, c - w] + w == load[i, c]:
            chosen[i] = True
            c -= w
    return chosen


def residual_allocate(demands, w_r, steps=None):
    """
    Share leftover bandwidth among slices that were not served

    :param dict demands: slice index -> demand, all larger than w_r
    :param float w_r: leftover bandwidth
    :param dict steps: slice index -> grant granularity; without it grants
                       are continuous and all of w_r goes to the smallest
                       demand (ties to the lowest index)
    :return: dict slice index -> grant
    """
    if not demands:
        return {}
    if w_r < 0:
        raise PreconditionViolated(f'negative leftover bandwidth: {w_r}')
    if w_r >= min(demands.values()):
        raise PreconditionViolated(
            f'leftover {w_r} could serve a demand of {min(demands.values())}'
        )
    order = sorted(demands, key=lambda i: (demands[i], i))
    grants = {i: 0.0 for i in demands}
    if steps is None:
        grants[order[0]] = float(w_r)
        return grants

    left = w_r
    for i in order:
        grant = min(demands[i], left // steps[i] * steps[i])
        grants[i] = float(grant)
        left -= grant
    return grants


@dataclass
class AllocationOutcome:
    """
    Result of one slot's allocation

    accepted: u, set_a: slices that took part in the first knapsack round,
    set_b: slices left out of it, set_ar: slices of set_a not served,
    residual: leftover grants, leftover: unused capacity
    """
    accepted: numpy.ndarray
    set_a: tuple
    set_b: tuple
    set_ar: tuple
    residual: numpy.ndarray
    capacity: int
    leftover: float
    tested: bool = False


def allocate_slot(demands, deficits, plan, scheme, detect=None, steps=None):
    """
    Allocate one slot's bandwidth

    :param demands: per-slice PRB demand
    :param deficits: per-slice deficits, knapsack weights
    :param ProvisionPlan plan:
    :param Scheme scheme:
    :param detect: callable returning per-slice H1 flags; only called for
                   ShT schemes in a slot with contention
    :param dict steps: per-slice grant granularity for quantized residual
                       grants, None for continuous grants
    """
    demands = numpy.asarray(demands, dtype=int)
    deficits = numpy.asarray(deficits, dtype=float)
    size = len(demands)
    capacity = scheme.capacity(plan)
    everyone = tuple(range(size))

    if demands.sum() <= capacity:
        return AllocationOutcome(
            accepted=numpy.ones(size, dtype=bool),
            set_a=everyone,
            set_b=(),
            set_ar=(),
            residual=numpy.zeros(size),
            capacity=capacity,
            leftover=float(capacity - demands.sum()),
        )

    tested = False
    if scheme.kind == NOSH:
        in_a = demands <= numpy.asarray(plan.w_h)
    elif scheme.kind == SH:
        in_a = numpy.ones(size, dtype=bool)
    else:
        if detect is None:
            raise InvalidParams(f'{scheme} needs a detector')
        in_a = ~numpy.asarray(detect(), dtype=bool)
        tested = True
    set_a = tuple(numpy.flatnonzero(in_a).tolist())
    set_b = tuple(numpy.flatnonzero(~in_a).tolist())

    # slices without demand cost nothing
    accepted = demands == 0
    residual = numpy.zeros(size)
    left = float(capacity)

    def serve(candidates, room):
        cand = [i for i in candidates if demands[i] > 0]
        if not cand:
            return [], room
        chosen = knapsack(deficits[cand], demands[cand], room)
        for i, yes in zip(cand, chosen.tolist()):
            if yes:
                accepted[i] = True
                room -= demands[i]
        return [i for i in cand if not accepted[i]], room

    def grant(unserved, room):
        if not unserved or room <= 0:
            return room
        grants = residual_allocate(
            {i: int(demands[i]) for i in unserved},
            room,
            None if steps is None else {i: steps[i] for i in unserved},
        )
        for i, g in grants.items():
            residual[i] = g
        return room - sum(grants.values())

    set_ar, left = serve(set_a, left)
    if set_ar:
        left = grant(set_ar, left)
    elif set_b:
        # everyone in A got served, B gets the rest
        set_br, left = serve(set_b, left)
        left = grant(set_br, left)

    used = float((demands * accepted).sum() + residual.sum())
    if used > capacity + CAPACITY_TOL:
        raise InvariantError(f'allocated {used} PRBs with capacity {capacity}')

    return AllocationOutcome(
        accepted=accepted,
        set_a=set_a,
        set_b=set_b,
        set_ar=tuple(set_ar),
        residual=residual,
        capacity=capacity,
        leftover=left,
        tested=tested,
    )
