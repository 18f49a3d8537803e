"""
Finite Markov chains

State spaces, row-stochastic transition matrices, stationary distributions,
trajectory sampling and the Hoeffding-type trial length bounds.

State labels are arbitrary hashable, sortable values.  In this package they
are ints (user counts, MCS indexes) or tuples of ints (composite slice
states).  JSON has no tuples, so labels are written as lists and turned back
into tuples by as_label().
"""
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from math import ceil, gcd, log as ln

import numpy
from numpy.random import Generator, PCG64
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import (InvalidParams, NotStochastic, Periodic, Reducible,
                         UnknownState)
from .utils import getLogger


log = getLogger(__name__)

ROW_SUM_TOL = 1e-9
# chains larger than this get their stationary distribution by power
# iteration instead of a dense solve
POWER_ITERATION_THRESHOLD = 2000
# eigenvalues of larger chains are a diagnostic only
SPECTRAL_STATE_LIMIT = 500


def as_label(value):
    """ Turn a JSON-decoded state label back into a hashable label """
    if isinstance(value, list):
        return tuple(as_label(i) for i in value)
    return value


def label_to_json(label):
    """ Turn a state label into something json can serialize """
    if isinstance(label, tuple):
        return [label_to_json(i) for i in label]
    if isinstance(label, numpy.integer):
        return int(label)
    if isinstance(label, numpy.floating):
        return float(label)
    return label


def make_rng(seed):
    """
    Get the random generator used everywhere in slicemux

    PCG64 streams are fixed across platforms and numpy versions, so a seed
    fully determines every sampled trajectory.
    """
    return Generator(PCG64(seed))


def count_transitions(labels):
    """
    Count the one-step transitions in a sequence of state labels

    Returns a Counter mapping (z, z') to the number of t with
    labels[t] == z and labels[t + 1] == z'.
    """
    labels = list(labels)
    return Counter(zip(labels[:-1], labels[1:]))


class StateSpace:
    """
    Ordered, duplicate-free set of state labels
    """
    def __init__(self, states):
        states = tuple(states)
        index = {}
        for pos, state in enumerate(states):
            if state in index:
                raise InvalidParams(f'duplicate state in state space: {state}')
            index[state] = pos
        self.states = states
        self._index = index

    @classmethod
    def from_observed(cls, labels):
        """ Make state space from observed labels, in sorted order """
        return cls(sorted(set(labels)))

    def index(self, state):
        try:
            return self._index[state]
        except KeyError:
            raise UnknownState(f'not in state space: {state}') from None

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, state):
        return state in self._index

    def __getitem__(self, pos):
        return self.states[pos]

    def __eq__(self, other):
        if isinstance(other, StateSpace):
            return self.states == other.states
        return NotImplemented

    def __repr__(self):
        return f'{type(self).__name__}({list(self.states)})'


class TransitionMatrix:
    """
    Row-stochastic matrix over a state space

    rows[i, j] is the probability to move from state space[i] to space[j].
    The rows array is read-only.
    """
    def __init__(self, space, rows, tol=ROW_SUM_TOL):
        if not isinstance(space, StateSpace):
            space = StateSpace(space)
        rows = numpy.array(rows, dtype=float)
        size = len(space)
        if size == 0:
            raise NotStochastic('empty state space')
        if rows.shape != (size, size):
            raise NotStochastic(
                f'expected {size}x{size} matrix, got shape {rows.shape}'
            )
        if not numpy.isfinite(rows).all():
            raise NotStochastic('matrix has non-finite entries')
        if (rows < -tol).any() or (rows > 1 + tol).any():
            raise NotStochastic('matrix has entries outside of [0, 1]')
        sums = rows.sum(axis=1)
        bad = numpy.flatnonzero(numpy.abs(sums - 1.0) > tol)
        if bad.size:
            i = bad[0]
            raise NotStochastic(f'row of state {space[i]} sums to {sums[i]!r}')
        rows[rows < 0] = 0.0
        rows.setflags(write=False)
        self.space = space
        self.rows = rows

    @classmethod
    def from_counts(cls, counts, states=None):
        """
        Maximum-likelihood estimate from transition counts

        :param counts: mapping (z, z') -> count
        :param states: optional state order, by default the sorted set of
                       all states appearing in counts

        States without outgoing transitions (only seen as the last state of
        the sequence) get a self-loop with probability 1.
        """
        if states is None:
            states = sorted({z for pair in counts for z in pair})
        space = StateSpace(states)
        mat = numpy.zeros((len(space), len(space)))
        for (src, dst), num in counts.items():
            mat[space.index(src), space.index(dst)] += num
        out = mat.sum(axis=1)
        dangling = numpy.flatnonzero(out == 0)
        if dangling.size:
            log.warning('self-loop added for states without outgoing '
                        'transitions:', [space[i] for i in dangling])
            mat[dangling, dangling] = 1.0
            out[dangling] = 1.0
        return cls(space, mat / out[:, None])

    @classmethod
    def from_dict(cls, data):
        try:
            states = [as_label(i) for i in data['states']]
            rows = data['rows']
        except (KeyError, TypeError) as e:
            raise NotStochastic(f'bad transition matrix data: {e}') from e
        return cls(states, rows)

    def to_dict(self):
        return {
            'states': [label_to_json(i) for i in self.space],
            'rows': self.rows.tolist(),
        }

    def prob(self, src, dst):
        return float(self.rows[self.space.index(src), self.space.index(dst)])

    def row(self, state):
        """ Outgoing probabilities of a state as dict, zeros left out """
        i = self.space.index(state)
        return {
            self.space[j]: float(p)
            for j, p in enumerate(self.rows[i])
            if p > 0
        }

    def __len__(self):
        return len(self.space)

    def __eq__(self, other):
        if isinstance(other, TransitionMatrix):
            return (self.space == other.space
                    and numpy.array_equal(self.rows, other.rows))
        return NotImplemented

    def __repr__(self):
        return f'<{type(self).__name__} {len(self.space)} states>'

    def _components(self):
        graph = csr_matrix(self.rows > 0)
        return connected_components(graph, directed=True, connection='strong')

    def communicating_classes(self):
        """ List of communicating classes, each a tuple of states """
        num, labels = self._components()
        return [
            tuple(self.space[i] for i in numpy.flatnonzero(labels == c))
            for c in range(num)
        ]

    def closed_classes(self):
        """ Communicating classes that cannot be left """
        num, labels = self._components()
        src, dst = numpy.nonzero(self.rows > 0)
        leaving = set(labels[src][labels[src] != labels[dst]].tolist())
        return [
            tuple(self.space[i] for i in numpy.flatnonzero(labels == c))
            for c in range(num)
            if c not in leaving
        ]

    def is_irreducible(self):
        return self._components()[0] == 1

    def period(self):
        """
        Period of an irreducible chain

        Uses BFS levels from the first state: the period is the gcd over all
        edges (u, v) of level(u) + 1 - level(v).
        """
        if not self.is_irreducible():
            raise Reducible('period is only defined for irreducible chains')
        level = {0: 0}
        queue = [0]
        for u in queue:
            for v in numpy.flatnonzero(self.rows[u] > 0).tolist():
                if v not in level:
                    level[v] = level[u] + 1
                    queue.append(v)
        period = 0
        src, dst = numpy.nonzero(self.rows > 0)
        for u, v in zip(src.tolist(), dst.tolist()):
            period = gcd(period, level[u] + 1 - level[v])
        return abs(period)


class StationaryDistribution:
    def __init__(self, space, probs):
        self.space = space
        self.probs = numpy.asarray(probs, dtype=float)

    def __getitem__(self, state):
        return float(self.probs[self.space.index(state)])

    def as_dict(self):
        return {s: float(p) for s, p in zip(self.space, self.probs)}

    def residual(self, matrix):
        """ sup-norm of pi P - pi """
        return float(numpy.abs(self.probs @ matrix.rows - self.probs).max())


def _power_iteration(rows, tol=1e-12, max_iter=100000):
    # the lazy chain has the same stationary distribution and is aperiodic
    lazy = 0.5 * (rows + numpy.eye(rows.shape[0]))
    pi = numpy.full(rows.shape[0], 1.0 / rows.shape[0])
    for _ in range(max_iter):
        nxt = pi @ lazy
        if numpy.abs(nxt - pi).max() < tol:
            return nxt
        pi = nxt
    log.warning('power iteration did not converge within', max_iter,
                'steps')
    return pi


def stationary_distribution(matrix):
    """
    Compute the stationary distribution of a chain

    The chain must have a single closed class.  Transient states get
    probability zero.  Solves pi (P - I) = 0 with one equation replaced by
    sum(pi) = 1; above POWER_ITERATION_THRESHOLD states power iteration is
    used instead.
    """
    closed = matrix.closed_classes()
    if len(closed) > 1:
        raise Reducible(
            f'chain has {len(closed)} closed classes, stationary distribution '
            f'is not unique'
        )
    size = len(matrix.space)
    if size > POWER_ITERATION_THRESHOLD:
        pi = _power_iteration(matrix.rows)
    else:
        a = matrix.rows.T - numpy.eye(size)
        a[-1, :] = 1.0
        b = numpy.zeros(size)
        b[-1] = 1.0
        pi = numpy.linalg.solve(a, b)
    pi = numpy.clip(pi, 0.0, None)
    pi /= pi.sum()
    return StationaryDistribution(matrix.space, pi)


def sample_indices(matrix, start, length, rng):
    """
    Sample a trajectory of state positions

    :param int start: position of the start state, first element of output
    :param int length: number of states in the output
    :param rng: numpy Generator, see make_rng()
    """
    if length <= 0:
        return []
    cum = numpy.cumsum(matrix.rows, axis=1)
    cum /= cum[:, -1:]
    cum = cum.tolist()
    out = [start]
    cur = start
    for u in rng.random(length - 1).tolist():
        cur = bisect_right(cum[cur], u)
        out.append(cur)
    return out


def sample_trajectory(matrix, start, length, seed):
    """
    Draw a trajectory of the given length starting at state start

    The first element is start itself.  Identical seeds give identical
    trajectories.
    """
    space = matrix.space
    positions = sample_indices(matrix, space.index(start), length,
                               make_rng(seed))
    return [space[i] for i in positions]


def spectral_gap_lambda(matrix):
    """
    Second-largest eigenvalue modulus of an ergodic chain

    Returns 0.0 for a single-state chain.  Meant for chains of up to
    SPECTRAL_STATE_LIMIT states, beyond that the result is a diagnostic.
    """
    size = len(matrix.space)
    if size == 1:
        return 0.0
    if not matrix.is_irreducible():
        raise Reducible('chain is not irreducible')
    if matrix.period() > 1:
        raise Periodic(f'chain has period {matrix.period()}')
    if size > SPECTRAL_STATE_LIMIT:
        log.warning(f'eigenvalues of {size}-state chain computed densely, '
                    f'treat result as diagnostic')
    moduli = numpy.sort(numpy.abs(numpy.linalg.eigvals(matrix.rows)))[::-1]
    return float(moduli[1])


@dataclass(frozen=True)
class SampleSizeParams:
    """
    Accuracy parameters for the trial length bounds

    epsilon: tolerated estimation error, delta: confidence parameter,
    h_z: bound on the expected hitting time, lam: second eigenvalue modulus.
    """
    epsilon: float
    delta: float
    h_z: float = None
    lam: float = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParams(f'epsilon must be positive: {self.epsilon}')
        if not 0 < self.delta < 1:
            raise InvalidParams(f'delta must be in (0, 1): {self.delta}')
        if self.h_z is not None and not self.h_z >= 1:
            raise InvalidParams(f'h_z must be at least 1: {self.h_z}')
        if self.lam is not None and not 0 <= self.lam < 1:
            raise InvalidParams(f'lambda must be in [0, 1): {self.lam}')


def _hoeffding_length(params, factor):
    return ceil(ln(2 / params.delta) * factor / (2 * params.epsilon ** 2))


def trial_length_hitting(params):
    """ T = ceil(ln(2/delta) H^2 / (2 epsilon^2)) """
    if params.h_z is None:
        raise InvalidParams('hitting time bound h_z is required')
    return _hoeffding_length(params, params.h_z ** 2)


def trial_length_spectral(params):
    """ T = ceil(ln(2/delta) (1 + lambda) / ((1 - lambda) 2 epsilon^2)) """
    if params.lam is None:
        raise InvalidParams('second eigenvalue modulus lam is required')
    return _hoeffding_length(params, (1 + params.lam) / (1 - params.lam))
