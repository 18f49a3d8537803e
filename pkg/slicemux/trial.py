"""
Trial phase

From per-slice slot series of the trial period, learn each slice's
transition model and its percentile demand, and provision the shared
capacity.
"""
from collections import Counter
from dataclasses import dataclass, field

import numpy

from .exceptions import (InvalidParams, InvalidProbability, InvariantError,
                         LengthMismatch, TrialTooShort, UserDataError)
from .markov import TransitionMatrix, as_label, count_transitions
from .utils import getLogger


log = getLogger(__name__)

CHAIN_MODES = ('state', 'users', 'full', 'factored')
TRANSFORMS = ('clip', 'zero', 'none')
ESTIMATORS = ('joint', 'convolution')

# names of the chain components per chain mode
CHAIN_NAMES = {
    'state': ('state',),
    'users': ('users',),
    'full': ('full',),
    'factored': ('users', 'mcs'),
}


def slot_labels(mode, users, mcs, demand):
    """
    The chain labels of one slot, a tuple with one label per chain
    component
    """
    if mode == 'state':
        return ((users, mcs),)
    if mode == 'users':
        return (users,)
    if mode == 'full':
        return ((users, mcs, demand),)
    if mode == 'factored':
        return (users, mcs)
    raise InvalidParams(f'unknown chain mode: {mode}')


def chain_labels(series, mode):
    """ Label sequences of a slot series, one per chain component """
    rows = [
        slot_labels(mode, *i)
        for i in zip(series.users.tolist(), series.mcs.tolist(),
                     series.demand.tolist())
    ]
    return [[row[k] for row in rows] for k in range(len(CHAIN_NAMES[mode]))]


class Pmf:
    """
    Empirical probability mass function

    Holds nonnegative weights (counts or probabilities) over a sortable
    support.  Values with zero weight are dropped.
    """
    def __init__(self, weights):
        self.weights = {k: float(v) for k, v in dict(weights).items() if v > 0}
        if not self.weights:
            raise InvalidParams('empty distribution')
        self.total = sum(self.weights.values())

    @classmethod
    def from_samples(cls, values):
        return cls(Counter(values))

    @property
    def support(self):
        return sorted(self.weights)

    def items(self):
        """ (value, probability) pairs in support order """
        return [(k, self.weights[k] / self.total) for k in self.support]

    def prob(self, value):
        return self.weights.get(value, 0.0) / self.total

    def cdf(self, value):
        return sum(w for k, w in self.weights.items() if k <= value) \
            / self.total

    def __repr__(self):
        return f'<{type(self).__name__} {len(self.weights)} values>'


def percentile_demand(pmf, p_h):
    """
    Smallest value v of the support with P(W <= v) >= p_h
    """
    if not 0 < p_h <= 1:
        raise InvalidProbability(f'percentile must be in (0, 1]: {p_h}')
    support = pmf.support
    cum = numpy.cumsum([pmf.weights[k] for k in support])
    # relative slack so that 0.4 + 0.2 + 0.2 counts as reaching 0.8
    idx = int(numpy.searchsorted(cum, p_h * cum[-1] * (1 - 1e-12),
                                 side='left'))
    return support[min(idx, len(support) - 1)]


def transform_demand(w, w_h, mode='clip'):
    """
    Per-slice demand transform used for provisioning

    clip: min(w, w_h), zero: demands above w_h count as 0, none: identity
    """
    if mode == 'clip':
        return min(w, w_h)
    if mode == 'zero':
        return w if w <= w_h else 0
    if mode == 'none':
        return w
    raise InvalidParams(f'unknown demand transform: {mode}')


def provision(joint, w_h, p_target, transform='clip'):
    """
    Shared capacity from the joint demand pmf

    Smallest s with P(sum of transformed demands <= s) >= p_target, where
    joint is a Pmf over demand vectors.
    """
    totals = Counter()
    for vec, prob in joint.items():
        totals[sum(transform_demand(w, h, transform)
                   for w, h in zip(vec, w_h))] += prob
    return percentile_demand(Pmf(totals), p_target)


def provision_convolution(marginals, w_h, p_target, transform='clip'):
    """
    Shared capacity assuming independent slices

    The total demand pmf is the convolution of the transformed per-slice
    marginals.
    """
    total = {0: 1.0}
    for pmf, h in zip(marginals, w_h):
        mapped = Counter()
        for value, prob in pmf.items():
            mapped[transform_demand(value, h, transform)] += prob
        conv = Counter()
        for a, pa in total.items():
            for b, pb in mapped.items():
                conv[a + b] += pa * pb
        total = conv
    return percentile_demand(Pmf(total), p_target)


def fit_transitions(counts, states=None):
    """
    Maximum-likelihood transition matrix from transition counts

    Rows are counts divided by out-degree, states without outgoing
    transitions get a self-loop.
    """
    return TransitionMatrix.from_counts(counts, states=states)


def observed_policy(series):
    """
    Demand observed for each (users, mcs) state of a series

    States seen with more than one demand are left out.
    """
    seen = {}
    conflicts = set()
    for u, m, w in zip(series.users.tolist(), series.mcs.tolist(),
                       series.demand.tolist()):
        if seen.setdefault((u, m), w) != w:
            conflicts.add((u, m))
    if conflicts:
        log.warning(f'slice {series.name!r}: demand is not a function of the '
                    f'state for {len(conflicts)} state(s)')
    for i in conflicts:
        del seen[i]
    return seen


@dataclass
class TrialStatistics:
    """ everything collected from the trial period """
    names: tuple
    length: int
    chain_mode: str
    joint: Pmf
    marginals: list
    total: Pmf
    transitions: list
    policies: list


def collect(series_list, chain_mode='state'):
    """
    Collect demand distributions and transition counts

    :param list series_list: one SliceSeries per slice, all of equal length
    """
    if chain_mode not in CHAIN_MODES:
        raise InvalidParams(f'unknown chain mode: {chain_mode}')
    if not series_list:
        raise TrialTooShort('no slices given')
    lengths = {len(i) for i in series_list}
    if len(lengths) > 1:
        raise LengthMismatch(
            'trial series have different lengths: '
            + ', '.join(f'{i.name}={len(i)}' for i in series_list)
        )
    length = lengths.pop()
    if length < 2:
        raise TrialTooShort(
            f'trial of {length} slot(s) has no observable transitions'
        )

    demands = numpy.vstack([i.demand for i in series_list])
    return TrialStatistics(
        names=tuple(i.name for i in series_list),
        length=length,
        chain_mode=chain_mode,
        joint=Pmf.from_samples(tuple(i) for i in demands.T.tolist()),
        marginals=[Pmf.from_samples(row) for row in demands.tolist()],
        total=Pmf.from_samples(demands.sum(axis=0).tolist()),
        transitions=[
            [count_transitions(labels)
             for labels in chain_labels(i, chain_mode)]
            for i in series_list
        ],
        policies=[observed_policy(i) for i in series_list],
    )


@dataclass
class SliceModel:
    """
    What the trial phase learned about one slice

    chains holds one transition matrix per chain component of the chain
    mode; for all modes but "factored" that is a single chain.  policy maps
    (users, mcs) to the demand seen for that state.
    """
    name: str
    chains: tuple
    w_h: int
    p_h: float
    alpha: float
    chain_mode: str = 'state'
    policy: dict = field(default_factory=dict)

    @property
    def p_hat(self):
        return self.chains[0]

    @property
    def space(self):
        return self.chains[0].space

    @property
    def dofs(self):
        return tuple(len(i) ** 2 - len(i) for i in self.chains)

    @property
    def dof(self):
        return self.dofs[0]

    def to_dict(self):
        return {
            'name': self.name,
            'chain_mode': self.chain_mode,
            'chains': {
                name: chain.to_dict()
                for name, chain in zip(CHAIN_NAMES[self.chain_mode],
                                       self.chains)
            },
            'w_h': int(self.w_h),
            'p_h': self.p_h,
            'alpha': self.alpha,
            'dof': list(self.dofs),
            'policy': [[u, m, w] for (u, m), w in sorted(self.policy.items())],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            mode = data['chain_mode']
            chains = tuple(
                TransitionMatrix.from_dict(data['chains'][name])
                for name in CHAIN_NAMES[mode]
            )
            return cls(
                name=data['name'],
                chains=chains,
                w_h=int(data['w_h']),
                p_h=float(data['p_h']),
                alpha=float(data['alpha']),
                chain_mode=mode,
                policy={
                    (as_label(u), as_label(m)): w
                    for u, m, w in data.get('policy', [])
                },
            )
        except (KeyError, TypeError, ValueError) as e:
            raise UserDataError(f'bad slice model data: {e!r}') from e


@dataclass
class ProvisionPlan:
    """ per-slice percentile demands and the shared capacity """
    names: tuple
    w_h: tuple
    p_h: tuple
    w_c: int
    transform: str = 'clip'
    estimator: str = 'joint'

    @property
    def sum_w_h(self):
        return int(sum(self.w_h))

    def to_dict(self):
        return {
            'names': list(self.names),
            'w_h': [int(i) for i in self.w_h],
            'p_h': list(self.p_h),
            'w_c': int(self.w_c),
            'sum_w_h': self.sum_w_h,
            'transform': self.transform,
            'estimator': self.estimator,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                names=tuple(data['names']),
                w_h=tuple(int(i) for i in data['w_h']),
                p_h=tuple(float(i) for i in data['p_h']),
                w_c=int(data['w_c']),
                transform=data.get('transform', 'clip'),
                estimator=data.get('estimator', 'joint'),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise UserDataError(f'bad provision plan data: {e!r}') from e


def run_trial(series_list, p_h, alpha, chain_mode='state', transform='clip',
              estimator='joint'):
    """
    Learn slice models and the provision plan from trial series

    :param list series_list: SliceSeries per slice, equal lengths
    :param p_h: per-slice percentile levels P^H
    :param alpha: per-slice significance levels
    :return: (list of SliceModel, ProvisionPlan)
    """
    if len(p_h) != len(series_list) or len(alpha) != len(series_list):
        raise LengthMismatch('need one p_h and one alpha per slice')
    for i in p_h:
        if not 0 < i <= 1:
            raise InvalidProbability(f'P^H must be in (0, 1]: {i}')
    for i in alpha:
        if not 0 < i < 1:
            raise InvalidProbability(f'alpha must be in (0, 1): {i}')
    if transform not in TRANSFORMS:
        raise InvalidParams(f'unknown demand transform: {transform}')
    if estimator not in ESTIMATORS:
        raise InvalidParams(f'unknown estimator: {estimator}')

    stats = collect(series_list, chain_mode)
    w_h = tuple(
        int(percentile_demand(pmf, p))
        for pmf, p in zip(stats.marginals, p_h)
    )
    if estimator == 'joint':
        w_c = provision(stats.joint, w_h, max(p_h), transform)
    else:
        w_c = provision_convolution(stats.marginals, w_h, max(p_h), transform)
    w_c = int(w_c)
    if transform != 'none' and w_c > sum(w_h):
        raise InvariantError(f'shared capacity {w_c} exceeds sum of '
                             f'percentile demands {sum(w_h)}')

    models = []
    for series, counts, policy, w, p, a in zip(
        series_list, stats.transitions, stats.policies, w_h, p_h, alpha
    ):
        chains = tuple(fit_transitions(i) for i in counts)
        models.append(SliceModel(
            name=series.name,
            chains=chains,
            w_h=w,
            p_h=p,
            alpha=a,
            chain_mode=chain_mode,
            policy=policy,
        ))
        log.info(f'slice {series.name!r}: W^H={w} states='
                 + '/'.join(str(len(i)) for i in chains))

    plan = ProvisionPlan(
        names=stats.names,
        w_h=w_h,
        p_h=tuple(p_h),
        w_c=w_c,
        transform=transform,
        estimator=estimator,
    )
    log.info(f'trial of {stats.length} slots: W^c={w_c} sum W^H='
             f'{plan.sum_w_h}')
    return models, plan
