from pathlib import Path

from slicemux.forms import IngestForm, IngestSliceForm, validate, validate_list
from slicemux.harness import load_json
from slicemux.load import read_mcs_table, read_records, read_users, \
    write_slot_series
from slicemux.management.base import AbstractSliceMuxCommand
from slicemux.trace import AggregationConfig, extract_slot_series
from slicemux.utils import get_setting


class Command(AbstractSliceMuxCommand):
    help = ('Turn decoded control-channel records into per-slice slot '
            'series, one <slice name>.csv per slice')
    config_help = (
        'JSON file with a "slices" list, each with a name, a records CSV '
        '(columns timestamp, sfn, subframe, rnti, direction, mcs_idx, '
        'nof_prb), and optionally a per-second users CSV and aggregation '
        'parameters'
    )

    def run(self, out_dir, config, **options):
        base_dir = Path(config).parent
        data = validate(IngestForm, load_json(config))
        table_path = data['mcs_table'] or get_setting('MCS_TABLE')
        if table_path:
            table_path = base_dir / table_path
        table = read_mcs_table(
            table_path,
            data['mimo_factor'] or get_setting('MIMO_FACTOR'),
        )

        paths = []
        for item in validate_list(IngestSliceForm, data['slices'], 'slices'):
            cfg = AggregationConfig(
                slot_seconds=item['slot_seconds'] or 10,
                users_step=item['users_step'] or 1,
                mcs_step=item['mcs_step'] or 1,
                demand_step=item['demand_step'] or 1,
                rate_kbps=item['rate_kbps'] or 1000.0,
            )
            users = None
            if item['users']:
                users = read_users(base_dir / item['users'])
            window = item['window_seconds']
            if window is None:
                window = get_setting('USER_WINDOW')
            self.stdout.write(f'Loading {item["records"]} ...')
            series = extract_slot_series(
                read_records(base_dir / item['records']),
                cfg,
                table,
                window_seconds=window,
                users=users,
                max_prb=item['max_prb'] or get_setting('MAX_PRB'),
                name=item['name'],
            )
            path = out_dir / f'{item["name"]}.csv'
            write_slot_series(series, path)
            paths.append(path)
            self.stdout.write(f' {item["name"]}: {len(series)} slots')

        self.write_paths(paths)
        return f'{len(paths)} slot series'
