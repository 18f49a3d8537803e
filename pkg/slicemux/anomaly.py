"""
Synthetic anomalies

A slice misbehaves by sticking to its high-load states: the lowest states of
its chain are removed, their probability moved to the surviving states, and
a stretch of the regular-phase series is resampled from the resulting chain.
"""
from dataclasses import dataclass
from math import ceil

import numpy

from .exceptions import (AllStatesRemoved, BadEntryState,
                         DisconnectedRemainder, InvalidParams, NoEntryPoint)
from .markov import TransitionMatrix, count_transitions, sample_trajectory
from .trace import SliceSeries
from .utils import getLogger


log = getLogger(__name__)

ANOMALY_CHAINS = ('users', 'joint')


def removal_count(size, beta=None, k=None):
    """
    Number of states to remove: ceil(beta * size) or k
    """
    if (beta is None) == (k is None):
        raise InvalidParams('need exactly one of beta and k')
    if beta is not None:
        if not 0 <= beta < 1:
            raise InvalidParams(f'beta must be in [0, 1): {beta}')
        # rounding keeps e.g. 0.3 * 10 at 3
        return ceil(round(beta * size, 9))
    if k < 0:
        raise InvalidParams(f'k must not be negative: {k}')
    return int(k)


def remove_low_states(matrix, beta=None, k=None):
    """
    Drop the lowest states of a chain

    States are ordered by label.  Each surviving row gets the probability of
    its removed entries added to its largest surviving entry, ties going to
    the larger state.  A row without surviving entries becomes a self-loop.
    Returns the input matrix unchanged if nothing is removed.
    """
    space = matrix.space
    count = removal_count(len(space), beta=beta, k=k)
    if count == 0:
        return matrix
    if count >= len(space):
        raise AllStatesRemoved(
            f'removing {count} of {len(space)} states leaves nothing'
        )

    order = sorted(space)
    survivors = order[count:]
    keep = [space.index(i) for i in survivors]
    drop = [space.index(i) for i in order[:count]]

    rows = []
    for pos, i in enumerate(keep):
        row = matrix.rows[i, keep].copy()
        mass = matrix.rows[i, drop].sum()
        if mass > 0:
            if row.max() > 0:
                j = max(range(len(row)), key=lambda j: (row[j], j))
                row[j] += mass
            else:
                log.warning(f'state {survivors[pos]} only led to removed '
                            f'states, it gets a self-loop')
                row[:] = 0.0
                row[pos] = 1.0
        rows.append(row)

    result = TransitionMatrix(survivors, rows)
    if not result.is_irreducible():
        raise DisconnectedRemainder(
            f'surviving {len(survivors)} states do not form an irreducible '
            f'chain'
        )
    return result


def choose_anomaly_window(labels, survivors, n, t_s=None):
    """
    Pick the anomalous stretch [t_s, t_e] of a regular-phase series

    t_s is the first slot after n whose state survived the removal, t_e is
    len(labels) - n - 1.  A given t_s is used as-is if it is inside
    (n, t_e].
    """
    size = len(labels)
    if not size > 2 * n:
        raise InvalidParams(
            f'regular phase of {size} slots is too short for n={n}'
        )
    t_e = size - n - 1
    if t_s is not None:
        if not n < t_s <= t_e:
            raise InvalidParams(f'anomaly start {t_s} not in ({n}, {t_e}]')
        return t_s, t_e
    for t in range(n + 1, t_e + 1):
        if labels[t] in survivors:
            return t, t_e
    raise NoEntryPoint(f'series never visits a surviving state between '
                       f'slots {n + 1} and {t_e}')


def splice(labels, p_prime, window, seed):
    """
    Resample the window of a label series from the modified chain

    The state at t_s is kept and starts the new trajectory.

    :return: (new labels, numpy bool array flagging slots t_s through t_e)
    """
    t_s, t_e = window
    labels = list(labels)
    flags = numpy.zeros(len(labels), dtype=bool)
    if t_s > t_e:
        return labels, flags
    start = labels[t_s]
    if start not in p_prime.space:
        raise BadEntryState(f'state {start} at slot {t_s} was removed')
    labels[t_s:t_e + 1] = sample_trajectory(p_prime, start, t_e - t_s + 1,
                                            seed)
    flags[t_s:t_e + 1] = True
    return labels, flags


@dataclass
class InjectedAnomaly:
    series: SliceSeries
    window: tuple
    chain: TransitionMatrix


def inject_anomaly(trial, regular, demand_model, n, beta=None, k=None,
                   t_s=None, seed=0, chain='users'):
    """
    Make a slice's regular-phase series misbehave

    The chain to modify is estimated from the trial series: the user-count
    chain (the MCS sequence is left alone) or the joint (users, mcs) chain.
    Demands are recomputed from the new states.  Returns None if beta or k
    remove nothing.
    """
    if chain == 'users':
        trial_labels = trial.users.tolist()
        labels = regular.users.tolist()
    elif chain == 'joint':
        trial_labels = list(zip(trial.users.tolist(), trial.mcs.tolist()))
        labels = list(zip(regular.users.tolist(), regular.mcs.tolist()))
    else:
        raise InvalidParams(f'unknown anomaly chain: {chain}')

    p_hat = TransitionMatrix.from_counts(count_transitions(trial_labels))
    p_prime = remove_low_states(p_hat, beta=beta, k=k)
    if p_prime is p_hat:
        return None
    window = choose_anomaly_window(labels, set(p_prime.space), n, t_s)
    labels, flags = splice(labels, p_prime, window, seed)

    if chain == 'users':
        users, mcs = labels, regular.mcs
    else:
        users = [i[0] for i in labels]
        mcs = [i[1] for i in labels]
    series = SliceSeries(
        users=users,
        mcs=mcs,
        demand=demand_model.many(users, mcs),
        name=regular.name,
        anomalous=flags,
    )
    log.info(f'anomaly in slice {regular.name!r}: slots {window[0]}-'
             f'{window[1]}, {len(p_prime)} of {len(p_hat)} states kept')
    return InjectedAnomaly(series=series, window=window, chain=p_prime)
