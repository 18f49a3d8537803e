"""
Trace processing: from downlink control records to slot series

The pipeline is: decoded control records -> connected users and average MCS
per second -> one quantized slice state per slot -> PRB demand per slot.
"""
from dataclasses import dataclass, field
from math import ceil

import numpy
import pandas

from .exceptions import (InvalidParams, LengthMismatch, McsOutOfTable,
                         NoSamples, UnsortedInput)
from .utils import getLogger


log = getLogger(__name__)

DOWNLINK = 1
UPLINK = 0
MAX_MCS = 31
RECORD_COLUMNS = ('timestamp', 'sfn', 'subframe', 'rnti', 'direction',
                  'mcs_idx', 'nof_prb')
SLOT_COLUMNS = ('slot', 'users_q', 'mcs_q', 'demand_prb')


@dataclass(frozen=True)
class RawRecord:
    """ one decoded downlink control message """
    timestamp: float
    sfn: int
    subframe: int
    rnti: int
    direction: int
    mcs_idx: int
    nof_prb: int


def records_frame(records):
    """
    Get records as DataFrame with the canonical columns

    Accepts a DataFrame (returned as-is) or an iterable of RawRecord.
    """
    if isinstance(records, pandas.DataFrame):
        return records
    rows = [
        (r.timestamp, r.sfn, r.subframe, r.rnti, r.direction, r.mcs_idx,
         r.nof_prb)
        for r in records
    ]
    frame = pandas.DataFrame(rows, columns=list(RECORD_COLUMNS))
    return frame.astype({'timestamp': float})


def check_sorted(frame):
    ts = frame['timestamp'].to_numpy()
    bad = numpy.flatnonzero(numpy.diff(ts) < 0)
    if bad.size:
        i = bad[0] + 1
        raise UnsortedInput(
            f'timestamps decrease at record {i}: {ts[i - 1]} -> {ts[i]}'
        )


def drop_decode_errors(records, max_prb=110):
    """
    Remove records allocating more PRBs than the carrier has

    Such records are decoding errors.  The number of dropped records is
    logged.
    """
    frame = records_frame(records)
    bad = frame['nof_prb'] > max_prb
    if bad.any():
        log.warning(f'dropping {int(bad.sum())} record(s) with nof_prb > '
                    f'{max_prb} (decoding errors)')
        frame = frame.loc[~bad]
    return frame


def _seconds(frame):
    return numpy.floor(frame['timestamp'].to_numpy()).astype(int)


def count_connected_users(records, window_seconds, start=None, end=None):
    """
    Count connected users per second

    The count at second t is the number of distinct RNTIs among downlink
    records whose timestamp falls into seconds t - window_seconds through t,
    both included.

    :param int start: first second of the output, default: first record
    :param int end: last second of the output, default: last record
    :return: pandas.Series of ints indexed by second
    """
    frame = records_frame(records)
    check_sorted(frame)
    seconds = _seconds(frame)
    if start is None:
        start = int(seconds.min()) if seconds.size else None
    if end is None:
        end = int(seconds.max()) if seconds.size else None
    if start is None or end is None or end < start:
        return pandas.Series([], dtype=int, name='users')

    down = frame['direction'].to_numpy() == DOWNLINK
    pairs = pandas.DataFrame({
        'rnti': frame['rnti'].to_numpy()[down],
        'second': seconds[down],
    }).drop_duplicates().sort_values(['rnti', 'second'])

    # +1/-1 at the boundaries of each rnti's coverage intervals
    diff = numpy.zeros(end - start + 2, dtype=int)

    def add(lo, hi):
        lo, hi = max(lo, start), min(hi, end)
        if lo <= hi:
            diff[lo - start] += 1
            diff[hi - start + 1] -= 1

    for _, secs in pairs.groupby('rnti')['second']:
        lo = hi = None
        for s in secs.tolist():
            if hi is not None and s <= hi + 1:
                hi = s + window_seconds
            else:
                if hi is not None:
                    add(lo, hi)
                lo, hi = s, s + window_seconds
        add(lo, hi)

    return pandas.Series(
        numpy.cumsum(diff[:-1]),
        index=pandas.RangeIndex(start, end + 1),
        name='users',
    )


def average_mcs(records, second):
    """ Mean MCS index over the downlink records within the given second """
    frame = records_frame(records)
    sel = (_seconds(frame) == second) \
        & (frame['direction'].to_numpy() == DOWNLINK)
    if not sel.any():
        raise NoSamples(f'no downlink records in second {second}')
    return float(frame['mcs_idx'].to_numpy()[sel].mean())


def average_mcs_series(records, start, end):
    """
    Mean MCS per second from start to end

    Seconds without downlink records hold the last value; seconds before the
    first downlink record take the first value.
    """
    frame = records_frame(records)
    down = frame['direction'].to_numpy() == DOWNLINK
    if not down.any():
        raise NoSamples('no downlink records at all')
    means = pandas.Series(
        frame['mcs_idx'].to_numpy()[down].astype(float),
        index=_seconds(frame)[down],
    ).groupby(level=0).mean()
    means = means.reindex(pandas.RangeIndex(start, end + 1))
    return means.ffill().bfill().rename('avg_mcs')


class DemandMapTable:
    """
    Deliverable rate per PRB as function of MCS

    The table holds single-layer rates in kbps per PRB for some MCS indexes;
    rates in between are linearly interpolated.  rate() applies the MIMO
    factor.
    """
    def __init__(self, rates, mimo_factor=1):
        items = sorted((int(k), float(v)) for k, v in dict(rates).items())
        if not items:
            raise InvalidParams('MCS table is empty')
        mcs, kbps = zip(*items)
        if min(kbps) <= 0:
            raise InvalidParams('MCS table rates must be positive')
        if any(b < a for a, b in zip(kbps[:-1], kbps[1:])):
            raise InvalidParams('MCS table rates must be nondecreasing in MCS')
        if not mimo_factor > 0:
            raise InvalidParams(f'bad MIMO factor: {mimo_factor}')
        self.mcs = numpy.array(mcs)
        self.kbps = numpy.array(kbps)
        self.mimo_factor = mimo_factor

    def rate(self, mcs):
        """ kbps per PRB at given MCS, after MIMO factor """
        if mcs < self.mcs[0] or mcs > self.mcs[-1]:
            raise McsOutOfTable(
                f'MCS {mcs} outside of table range {self.mcs[0]}-'
                f'{self.mcs[-1]}'
            )
        return float(numpy.interp(mcs, self.mcs, self.kbps)) \
            * self.mimo_factor

    def __repr__(self):
        return (f'<{type(self).__name__} MCS {self.mcs[0]}-{self.mcs[-1]} '
                f'x{self.mimo_factor}>')


@dataclass(frozen=True, order=True)
class SliceState:
    """ quantized slice state: connected users and average MCS """
    users: int
    avg_mcs: int

    def as_label(self):
        return (self.users, self.avg_mcs)


def demand_map(state, r_kbps, table):
    """
    PRBs needed to give each user r_kbps at the state's MCS

    Returns users * ceil(r / rate(mcs)), 0 for a state without users.
    """
    if state.users == 0:
        return 0
    # tolerance keeps float noise from adding a PRB on exact ratios
    per_user = ceil(r_kbps / table.rate(state.avg_mcs) - 1e-9)
    return state.users * per_user


def ceil_to_step(value, step):
    return -(-value // step) * step


@dataclass(frozen=True)
class DemandModel:
    """ the deterministic map from slice state to PRB demand """
    table: DemandMapTable
    rate_kbps: float
    demand_step: int = 1

    def __call__(self, users, mcs):
        demand = demand_map(SliceState(int(users), int(mcs)), self.rate_kbps,
                            self.table)
        return ceil_to_step(demand, self.demand_step)

    def many(self, users, mcs):
        """ vectorized over arrays of users and MCS """
        cache = {}
        out = numpy.empty(len(users), dtype=int)
        for i, key in enumerate(zip(numpy.asarray(users).tolist(),
                                    numpy.asarray(mcs).tolist())):
            if key not in cache:
                cache[key] = self(*key)
            out[i] = cache[key]
        return out


@dataclass(frozen=True)
class AggregationConfig:
    """
    How to turn the per-second series into slots

    slot_seconds: slot length D, users_step: U, mcs_step: M, demand_step:
    PRB granularity W, rate_kbps: R
    """
    slot_seconds: int = 10
    users_step: int = 1
    mcs_step: int = 1
    demand_step: int = 1
    rate_kbps: float = 1000.0

    def __post_init__(self):
        for name in ('slot_seconds', 'users_step', 'mcs_step', 'demand_step'):
            if not getattr(self, name) >= 1:
                raise InvalidParams(f'{name} must be at least 1')
        if not self.rate_kbps > 0:
            raise InvalidParams('rate_kbps must be positive')


@dataclass
class SliceSeries:
    """
    Per-slot series of one slice

    users and mcs are the quantized state components, demand the PRB demand
    in each slot.
    """
    users: numpy.ndarray
    mcs: numpy.ndarray
    demand: numpy.ndarray
    name: str = ''
    anomalous: numpy.ndarray = field(default=None)

    def __post_init__(self):
        self.users = numpy.asarray(self.users, dtype=int)
        self.mcs = numpy.asarray(self.mcs, dtype=int)
        self.demand = numpy.asarray(self.demand, dtype=int)
        if self.anomalous is None:
            self.anomalous = numpy.zeros(len(self.users), dtype=bool)
        else:
            self.anomalous = numpy.asarray(self.anomalous, dtype=bool)
        lengths = {len(self.users), len(self.mcs), len(self.demand),
                   len(self.anomalous)}
        if len(lengths) > 1:
            raise LengthMismatch(
                f'series {self.name!r} has components of different lengths'
            )

    def __len__(self):
        return len(self.users)

    def states(self):
        return [SliceState(u, m)
                for u, m in zip(self.users.tolist(), self.mcs.tolist())]

    def window(self, start, stop=None):
        """ Sub-series of slots start up to (not including) stop """
        return SliceSeries(
            users=self.users[start:stop],
            mcs=self.mcs[start:stop],
            demand=self.demand[start:stop],
            name=self.name,
            anomalous=self.anomalous[start:stop],
        )

    def to_frame(self):
        return pandas.DataFrame({
            'slot': numpy.arange(len(self)),
            'users_q': self.users,
            'mcs_q': self.mcs,
            'demand_prb': self.demand,
        }, columns=list(SLOT_COLUMNS))

    @classmethod
    def from_frame(cls, frame, name=''):
        frame = frame.sort_values('slot')
        return cls(
            users=frame['users_q'].to_numpy(),
            mcs=frame['mcs_q'].to_numpy(),
            demand=frame['demand_prb'].to_numpy(),
            name=name,
        )


def empty_series(name=''):
    return SliceSeries([], [], [], name=name)


def aggregate(per_second, cfg, table):
    """
    Turn a per-second series into a slot series

    :param per_second: DataFrame indexed by second with columns users and
                       avg_mcs; missing seconds hold the last value
    :param AggregationConfig cfg:
    :param DemandMapTable table:

    Every slot_seconds-th second is sampled, starting with the first.  Users
    and MCS are floored to multiples of their steps, the demand is rounded
    up to a multiple of demand_step.
    """
    if per_second.empty:
        return empty_series()
    per_second = per_second.sort_index()
    full = per_second.reindex(pandas.RangeIndex(per_second.index.min(),
                                                per_second.index.max() + 1))
    full = full.ffill()
    sampled = full.iloc[::cfg.slot_seconds]
    users = numpy.floor(sampled['users'].to_numpy()).astype(int)
    users = users // cfg.users_step * cfg.users_step
    mcs = numpy.floor(sampled['avg_mcs'].to_numpy()).astype(int)
    mcs = numpy.clip(mcs // cfg.mcs_step * cfg.mcs_step, 0, MAX_MCS)
    demand = DemandModel(table, cfg.rate_kbps, cfg.demand_step)
    return SliceSeries(users, mcs, demand.many(users, mcs))


def extract_slot_series(records, cfg, table, window_seconds=10, users=None,
                        max_prb=110, name=''):
    """
    Full trace pipeline for one slice

    :param records: DataFrame or iterable of RawRecord, sorted by time
    :param users: optional precomputed per-second user counts (Series indexed
                  by second), replaces counting RNTIs
    """
    frame = drop_decode_errors(records_frame(records), max_prb)
    check_sorted(frame)
    if frame.empty:
        log.warning(f'no records for slice {name!r}, slot series is empty')
        return empty_series(name)

    seconds = _seconds(frame)
    start, end = int(seconds.min()), int(seconds.max())
    index = pandas.RangeIndex(start, end + 1)
    if users is None:
        users = count_connected_users(frame, window_seconds, start, end)
    else:
        users = users.reindex(index).ffill().fillna(0)
    per_second = pandas.DataFrame({
        'users': users.to_numpy(),
        'avg_mcs': average_mcs_series(frame, start, end).to_numpy(),
    }, index=index)
    series = aggregate(per_second, cfg, table)
    series.name = name
    log.info(f'slice {name!r}: {len(frame)} records, {end - start + 1} s ->',
             len(series), 'slots')
    return series
