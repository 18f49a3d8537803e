"""
Sliding-window likelihood-ratio test for slice behavior

A slice is declared anomalous (H1) when the last n states it visited are
explained much better by their own maximum-likelihood chain than by the chain
learned in the trial phase.
"""
from collections import deque
from dataclasses import dataclass
import enum
from functools import cached_property
from math import exp, inf, log as ln

from scipy.special import gammaincinv

from .exceptions import (InvalidParams, InvalidProbability, WindowNotFull,
                         WindowTooShort)
from .markov import TransitionMatrix, count_transitions
from .trial import slot_labels
from .utils import getLogger


log = getLogger(__name__)


class Hypothesis(enum.Enum):
    H0 = 'H0'
    H1 = 'H1'


def chi_square_quantile(dof, p):
    """
    Inverse CDF of the chi-square distribution

    Uses the inverse of the regularized lower incomplete gamma function:
    F^-1(p) = 2 P^-1(dof / 2, p).
    """
    if not 0 <= p < 1:
        raise InvalidProbability(f'probability must be in [0, 1): {p}')
    if not dof > 0:
        raise InvalidParams(f'degrees of freedom must be positive: {dof}')
    if p == 0:
        return 0.0
    return float(2 * gammaincinv(dof / 2, p))


def log_gamma_threshold(alpha, dof, corrected=False):
    """
    Natural log of the test threshold gamma

    Default: F^-1(1 - alpha / 2).  Corrected: F^-1(1 - alpha) / 2, which
    accounts for 2 log L being the chi-square distributed statistic.
    """
    if not 0 < alpha < 1:
        raise InvalidProbability(f'alpha must be in (0, 1): {alpha}')
    if corrected:
        return chi_square_quantile(dof, 1 - alpha) / 2
    return chi_square_quantile(dof, 1 - alpha / 2)


def gamma_threshold(alpha, dof, corrected=False):
    """ The test threshold gamma, inf if it does not fit into a float """
    x = log_gamma_threshold(alpha, dof, corrected)
    return exp(x) if x < 709 else inf


@dataclass(frozen=True)
class DetectorConfig:
    n: int
    alpha: float
    dof: int
    corrected: bool = False

    def __post_init__(self):
        if not self.n >= 2:
            raise WindowTooShort(f'window size must be at least 2: {self.n}')
        if not 0 < self.alpha < 1:
            raise InvalidProbability(f'alpha must be in (0, 1): {self.alpha}')
        if not self.dof >= 1:
            raise InvalidParams(f'need at least 1 degree of freedom: '
                                f'{self.dof}')

    @cached_property
    def log_gamma(self):
        return log_gamma_threshold(self.alpha, self.dof, self.corrected)

    @property
    def gamma(self):
        return gamma_threshold(self.alpha, self.dof, self.corrected)


def window_mle(labels):
    """
    Maximum-likelihood chain of a window of states

    Transition counts over n - 1 transitions divided by the source state's
    out-degree; the states are those visited in the window.
    """
    return TransitionMatrix.from_counts(count_transitions(labels))


def likelihood_ratio(labels, p_hat):
    """
    log L = sum over the window's transitions of ln Q(z'|z) - ln P(z'|z)

    Q is the window's own maximum-likelihood chain.  Returns inf if the
    window leaves the trial state space or takes a transition of probability
    zero under p_hat.
    """
    counts = count_transitions(labels)
    out = {}
    for (src, _), num in counts.items():
        out[src] = out.get(src, 0) + num
    space = p_hat.space
    total = 0.0
    for (src, dst), num in counts.items():
        if src not in space or dst not in space:
            return inf
        p = p_hat.rows[space.index(src), space.index(dst)]
        if p <= 0:
            return inf
        total += num * (ln(num / out[src]) - ln(p))
    return total


def test(labels, p_hat, config):
    """
    Decide H0 or H1 on the last config.n labels

    Raises WindowNotFull if fewer than n labels are given.
    """
    labels = list(labels)
    if len(labels) < config.n:
        raise WindowNotFull(f'{len(labels)} of {config.n} samples')
    labels = labels[-config.n:]
    if any(i not in p_hat.space for i in labels):
        return Hypothesis.H1
    if likelihood_ratio(labels, p_hat) >= config.log_gamma:
        return Hypothesis.H1
    return Hypothesis.H0


class SliceDetector:
    """
    Keeps the sliding window of one slice and runs the test on demand

    Before the window is full the decision is H0.  If the model knows the
    demand of a state, a window slot with a different demand for that state
    means H1 right away, since demand is a function of the state for a
    well-behaved slice.
    """
    def __init__(self, model, n, alpha=None, corrected=False,
                 check_policy=True):
        self.model = model
        self.n = n
        self.configs = [
            DetectorConfig(
                n=n,
                alpha=model.alpha if alpha is None else alpha,
                dof=max(dof, 1),
                corrected=corrected,
            )
            for dof in model.dofs
        ]
        self.check_policy = check_policy
        self.window = deque(maxlen=n)
        self.last_score = None

    def push(self, users, mcs, demand):
        labels = slot_labels(self.model.chain_mode, users, mcs, demand)
        self.window.append((labels, (users, mcs), demand))

    def policy_violated(self):
        policy = self.model.policy
        for _, state, demand in self.window:
            expected = policy.get(state)
            if expected is not None and expected != demand:
                return True
        return False

    def decide(self):
        if len(self.window) < self.n:
            return Hypothesis.H0
        if self.check_policy and self.policy_violated():
            self.last_score = inf
            return Hypothesis.H1
        for k, (chain, config) in enumerate(zip(self.model.chains,
                                                self.configs)):
            labels = [i[0][k] for i in self.window]
            self.last_score = likelihood_ratio(labels, chain)
            if self.last_score >= config.log_gamma:
                return Hypothesis.H1
        return Hypothesis.H0
