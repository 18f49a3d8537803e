"""
Utilities module
"""
from contextlib import contextmanager
import logging
import time

from django.conf import settings


logging.addLevelName(25, 'SUCCESS')


class PrintLikeLogging(logging.LoggerAdapter):
    """
    Adapter to log just like print
    """
    def log(self, level, *msg, sep=' ', **kwargs):
        """
        Adapter to log just like print

        Except end, file, and flush keyword args are not to be used
        """
        super().log(level, sep.join([str(i) for i in msg]), **kwargs)

    def success(self, *msg, **kwargs):
        self.log(25, *msg, **kwargs)


def getLogger(name):
    """
    Wrapper around logging.getLogger()
    """
    return PrintLikeLogging(logging.getLogger(name), {})


# package defaults, overridable via SLICEMUX_* django settings
DEFAULTS = {
    'TRIAL_LENGTH': 7200,
    'USER_WINDOW': 10,
    'MAX_PRB': 110,
    'MCS_TABLE': None,
    'MIMO_FACTOR': 2,
    'ALPHA': 0.05,
    'WINDOW': 100,
    'CORRECTED_THRESHOLD': False,
    'TRANSFORM': 'clip',
    'ESTIMATOR': 'joint',
    'CHAIN_MODE': 'state',
    'RESIDUAL': 'continuous',
    'REPORT_TIMING': False,
}


def get_setting(name):
    """
    Get a slicemux setting

    Looks up SLICEMUX_<name> in the django settings and falls back to the
    package default, which also works when django settings are not
    configured, e.g. when the library is used outside of a project.
    """
    if settings.configured:
        try:
            return getattr(settings, 'SLICEMUX_' + name)
        except AttributeError:
            pass
    return DEFAULTS[name]


class Timer:
    """
    Accumulates wall-clock time over repeated measurements

    Usage:
        timer = Timer()
        for ...:
            with timer.measure():
                do_work()
        timer.mean_ms
    """
    def __init__(self):
        self.total = 0.0
        self.count = 0

    @contextmanager
    def measure(self):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.total += time.perf_counter() - t0
            self.count += 1

    @property
    def mean_ms(self):
        if not self.count:
            return None
        return 1000 * self.total / self.count
