"""
Reading and writing the CSV files slicemux works with

Each file format is declared as a CSV_Spec listing the required columns and
their types.  Extra columns are ignored, missing ones are an error naming the
column, and malformed values raise InputFileError with the line number.
"""
from pathlib import Path

import numpy
import pandas

from .exceptions import InputFileError, UserDataError
from .trace import DemandMapTable, SliceSeries, empty_series
from .utils import getLogger


log = getLogger(__name__)

DATA_DIR = Path(__file__).parent / 'data'
DEFAULT_MCS_TABLE = DATA_DIR / 'mcs_table.csv'


class CSV_Spec:
    """
    Specification of a comma-separated input file with a header row

    :param column_specs: pairs of (column name, int or float)
    :param dict checks: column name -> (predicate over Series, message), the
                        predicate is True for good values
    """
    def __init__(self, *column_specs, checks=None, sep=','):
        self.col_names = [name for name, _ in column_specs]
        self.col_types = dict(column_specs)
        self.checks = checks or {}
        self.sep = sep

    def empty_frame(self):
        return pandas.DataFrame({
            name: pandas.Series([], dtype=kind)
            for name, kind in self.col_types.items()
        })

    def process_header(self, head, path):
        """
        checks the column headers against the declared columns
        """
        missing = [i for i in self.col_names if i not in head]
        if missing:
            raise UserDataError(
                f'{path}: column(s) {", ".join(missing)} not found in '
                f'header: {", ".join(head)}'
            )

    def convert(self, df, path):
        """
        Convert the string columns to numbers, row by row errors are fatal
        """
        data = {}
        for col, kind in self.col_types.items():
            raw = df[col]
            values = pandas.to_numeric(raw.str.strip(), errors='coerce')
            bad = values.isna()
            if kind is int:
                bad |= values.notna() & (values % 1 != 0)
            if bad.any():
                pos = int(numpy.flatnonzero(bad.to_numpy())[0])
                # header is line 1
                raise InputFileError(
                    f'{path}: line {pos + 2}: column {col}: not a valid '
                    f'{kind.__name__}: {raw.iloc[pos]!r}'
                )
            data[col] = values.astype(kind)

            if col in self.checks:
                good, msg = self.checks[col]
                ok = good(data[col]).to_numpy()
                if not ok.all():
                    pos = int(numpy.flatnonzero(~ok)[0])
                    raise InputFileError(
                        f'{path}: line {pos + 2}: column {col}: {msg}: '
                        f'{raw.iloc[pos]!r}'
                    )
        return pandas.DataFrame(data, columns=self.col_names)

    def read(self, path):
        """ Read file into a DataFrame with the declared columns """
        path = Path(path)
        try:
            df = pandas.read_csv(path, sep=self.sep, dtype=str,
                                 keep_default_na=False,
                                 skipinitialspace=True)
        except pandas.errors.EmptyDataError:
            log.warning(f'{path}: file is empty')
            return self.empty_frame()
        except pandas.errors.ParserError as e:
            raise InputFileError(f'{path}:', e) from e
        except OSError as e:
            raise UserDataError(f'{path}: {e}') from e

        self.process_header([str(i).strip() for i in df.columns], path)
        df.columns = [str(i).strip() for i in df.columns]
        if df.empty:
            log.warning(f'{path}: no data rows')
            return self.empty_frame()
        return self.convert(df[self.col_names], path)


RECORDS_SPEC = CSV_Spec(
    ('timestamp', float),
    ('sfn', int),
    ('subframe', int),
    ('rnti', int),
    ('direction', int),
    ('mcs_idx', int),
    ('nof_prb', int),
    checks={
        'direction': (lambda s: s.isin([0, 1]), 'direction must be 0 or 1'),
        'mcs_idx': (lambda s: s.between(0, 31), 'MCS must be in 0-31'),
        'nof_prb': (lambda s: s >= 0, 'PRB count must not be negative'),
    },
)

USERS_SPEC = CSV_Spec(
    ('second', int),
    ('users', int),
    checks={'users': (lambda s: s >= 0, 'user count must not be negative')},
)

MCS_TABLE_SPEC = CSV_Spec(
    ('mcs_idx', int),
    ('kbps_per_prb', float),
)

SLOTS_SPEC = CSV_Spec(
    ('slot', int),
    ('users_q', int),
    ('mcs_q', int),
    ('demand_prb', int),
    checks={
        'users_q': (lambda s: s >= 0, 'user count must not be negative'),
        'demand_prb': (lambda s: s >= 0, 'demand must not be negative'),
    },
)


def read_records(path):
    """ Read decoded control records, sorted as in the file """
    return RECORDS_SPEC.read(path)


def read_users(path):
    """ Read precomputed per-second user counts as Series """
    df = USERS_SPEC.read(path)
    return df.set_index('second')['users'].sort_index()


def read_mcs_table(path=None, mimo_factor=2):
    """
    Read the MCS -> kbps/PRB table

    Without a path the bundled table is used.  Table rates are single-layer,
    the MIMO factor is applied by the returned DemandMapTable.
    """
    if path is None:
        path = DEFAULT_MCS_TABLE
    df = MCS_TABLE_SPEC.read(path)
    if df.empty:
        raise UserDataError(f'{path}: MCS table has no rows')
    return DemandMapTable(
        dict(zip(df['mcs_idx'].tolist(), df['kbps_per_prb'].tolist())),
        mimo_factor=mimo_factor,
    )


def read_slot_series(path, name=''):
    df = SLOTS_SPEC.read(path)
    if df.empty:
        return empty_series(name)
    return SliceSeries.from_frame(df, name=name)


def write_slot_series(series, path):
    series.to_frame().to_csv(path, index=False)
