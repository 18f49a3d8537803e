"""
Helpers for testing and for poking at the simulator interactively
"""
from contextlib import contextmanager
from copy import deepcopy
from io import StringIO
import json
from pathlib import Path
from tempfile import TemporaryDirectory

from django.core.management import call_command
from django.core.management.base import CommandError
import numpy

from .load import DATA_DIR
from .markov import TransitionMatrix, sample_trajectory
from .trace import SliceSeries


DEMO_SCENARIO = DATA_DIR / 'demo_scenario.json'

# a few chains with known properties
TWO_STATE = TransitionMatrix(['a', 'b'], [[0.9, 0.1], [0.1, 0.9]])
THREE_STATE = TransitionMatrix(
    [0, 1, 2],
    [[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]],
)
# period 2
FLIP = TransitionMatrix([0, 1], [[0.0, 1.0], [1.0, 0.0]])
# two closed classes
SPLIT = TransitionMatrix([0, 1], [[1.0, 0.0], [0.0, 1.0]])


def demo_scenario_data():
    """ a fresh copy of the bundled demo scenario as dict """
    with DEMO_SCENARIO.open() as f:
        return json.load(f)


def iid_chain(levels, probs):
    """ chain rows that ignore the current state """
    return [list(probs) for _ in levels]


def make_series(users, mcs=28, demand=None, name=''):
    """
    Build a SliceSeries with little typing

    A scalar mcs is repeated, demand defaults to the user count (one PRB per
    user at the top MCS with the bundled table).
    """
    users = numpy.asarray(users, dtype=int)
    if numpy.isscalar(mcs):
        mcs = numpy.full(len(users), mcs)
    if demand is None:
        demand = users
    return SliceSeries(users, mcs, demand, name=name)


def sample_series(matrix, length, seed, start=None, name=''):
    """ user-count series sampled from a chain over user counts """
    if start is None:
        start = matrix.space[0]
    return make_series(sample_trajectory(matrix, start, length, seed),
                       name=name)


@contextmanager
def workdir():
    """ temporary directory as Path, removed afterwards """
    with TemporaryDirectory() as tmp:
        yield Path(tmp)


def write_json(path, data):
    path = Path(path)
    with path.open('w') as f:
        json.dump(data, f, indent=1)
    return path


def write_csv(path, header, rows):
    path = Path(path)
    with path.open('w') as f:
        if header:
            f.write(','.join(header) + '\n')
        for row in rows:
            f.write(','.join(str(i) for i in row) + '\n')
    return path


def run_command(name, *args, **options):
    """
    Run a management command

    Returns (return code, stdout text, error message); the return code is 0
    on success and the CommandError's returncode otherwise.
    """
    out = StringIO()
    try:
        call_command(name, *args, stdout=out, **options)
    except CommandError as e:
        return e.returncode, out.getvalue(), str(e)
    return 0, out.getvalue(), ''


def scenario_copy(data, **changes):
    """ deep copy of scenario data with top-level keys replaced """
    data = deepcopy(data)
    data.update(changes)
    return data
