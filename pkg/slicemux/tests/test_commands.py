import json

from django.test import SimpleTestCase
import pandas

from slicemux.management.base import EXIT_USER_ERROR
from slicemux.test import (DEMO_SCENARIO, demo_scenario_data, run_command,
                           scenario_copy, workdir, write_csv, write_json)
from slicemux.trace import RECORD_COLUMNS


SLOT_HEADER = ('slot', 'users_q', 'mcs_q', 'demand_prb')


def write_slots(path, users):
    return write_csv(path, SLOT_HEADER,
                     [(t, u, 28, u) for t, u in enumerate(users)])


def short_demo(**changes):
    """ the demo scenario with a shorter regular phase """
    return scenario_copy(demo_scenario_data(), regular_length=600, **changes)


class IngestCommandTests(SimpleTestCase):
    def test_records_to_slots(self):
        with workdir() as d:
            rows = [(float(t), 0, 0, 100 + t % 3, 1, 28, 5)
                    for t in range(60)]
            write_csv(d / 'cell.csv', RECORD_COLUMNS, rows)
            write_json(d / 'ingest.json', {
                'slices': [{'name': 'x', 'records': 'cell.csv',
                            'slot_seconds': 10, 'window_seconds': 10}],
            })
            code, out, err = run_command('ingest', str(d / 'ingest.json'),
                                         out=str(d / 'out'))
            self.assertEqual(code, 0, err)
            self.assertIn('All done', out)
            slots = pandas.read_csv(d / 'out' / 'x.csv')
        self.assertEqual(list(slots.columns), list(SLOT_HEADER))
        self.assertEqual(len(slots), 6)
        self.assertEqual(slots['users_q'].tolist()[1:], [3] * 5)
        self.assertEqual(slots['mcs_q'].tolist(), [28] * 6)

    def test_empty_input(self):
        with workdir() as d:
            (d / 'cell.csv').write_text('')
            write_json(d / 'ingest.json', {
                'slices': [{'name': 'x', 'records': 'cell.csv'}],
            })
            with self.assertLogs('slicemux', 'WARNING'):
                code, _, err = run_command('ingest', str(d / 'ingest.json'),
                                           out=str(d))
            self.assertEqual(code, 0, err)
            self.assertTrue((d / 'x.csv').exists())

    def test_header_mismatch(self):
        with workdir() as d:
            write_csv(d / 'cell.csv', RECORD_COLUMNS[:-1],
                      [(0.0, 0, 0, 1, 1, 28)])
            write_json(d / 'ingest.json', {
                'slices': [{'name': 'x', 'records': 'cell.csv'}],
            })
            code, _, err = run_command('ingest', str(d / 'ingest.json'),
                                       out=str(d))
        self.assertEqual(code, EXIT_USER_ERROR)
        self.assertIn('nof_prb', err)

    def test_missing_config(self):
        with workdir() as d:
            code, _, _ = run_command('ingest', str(d / 'none.json'),
                                     out=str(d))
        self.assertEqual(code, EXIT_USER_ERROR)


class TrialCommandTests(SimpleTestCase):
    def test_plan(self):
        with workdir() as d:
            write_slots(d / 'a.csv', [2, 4] * 50)
            write_slots(d / 'b.csv', [3, 5] * 50)
            write_json(d / 'trial.json', {
                'slices': [{'name': 'a', 'series': 'a.csv'},
                           {'name': 'b', 'series': 'b.csv'}],
                'epsilon': 0.01,
                'delta': 0.05,
                'lam': 0.0,
            })
            code, out, err = run_command('trial', str(d / 'trial.json'),
                                         out=str(d / 'm'))
            self.assertEqual(code, 0, err)
            plan = json.loads((d / 'm' / 'plan.json').read_text())
            self.assertTrue((d / 'm' / 'model_a.json').exists())
        self.assertEqual(plan['w_h'], [4, 5])
        self.assertEqual(plan['w_c'], 9)
        self.assertIn('W^c=9', out)
        self.assertIn('bound asks for', out)

    def test_too_short(self):
        with workdir() as d:
            write_slots(d / 'a.csv', [2])
            write_json(d / 'trial.json', {
                'slices': [{'name': 'a', 'series': 'a.csv'}],
            })
            code, _, err = run_command('trial', str(d / 'trial.json'),
                                       out=str(d))
        self.assertEqual(code, EXIT_USER_ERROR)
        self.assertTrue(err)

    def test_trial_length_beyond_series(self):
        with workdir() as d:
            write_slots(d / 'a.csv', [2, 3] * 5)
            write_json(d / 'trial.json', {
                'slices': [{'name': 'a', 'series': 'a.csv'}],
                'trial_length': 50,
            })
            code, _, err = run_command('trial', str(d / 'trial.json'),
                                       out=str(d))
        self.assertEqual(code, EXIT_USER_ERROR)
        self.assertIn('trial length', err)

    def test_series_required(self):
        with workdir() as d:
            write_json(d / 'trial.json', {'slices': [{'name': 'a'}]})
            code, _, err = run_command('trial', str(d / 'trial.json'),
                                       out=str(d))
        self.assertEqual(code, EXIT_USER_ERROR)
        self.assertIn('series', err)


class SimulateCommandTests(SimpleTestCase):
    def test_demo(self):
        with workdir() as d:
            write_json(d / 'demo.json', short_demo())
            code, out, err = run_command('simulate', str(d / 'demo.json'),
                                         out=str(d / 'out'))
            self.assertEqual(code, 0, err)
            report = pandas.read_csv(d / 'out' / 'report.csv')
            self.assertTrue((d / 'out' / 'slots.csv').exists())
            self.assertTrue((d / 'out' / 'summary.csv').exists())
        self.assertEqual(report['scheme'].tolist(), ['NoSh', 'Sh', 'ShT100'])
        self.assertIn('savings_pct', out)

    def test_config_flag(self):
        with workdir() as d:
            write_json(d / 'demo.json', short_demo(anomaly=None, sweep=None))
            code, _, err = run_command('simulate', '--config',
                                       str(d / 'demo.json'), out=str(d))
            self.assertEqual(code, 0, err)
            self.assertTrue((d / 'report.csv').exists())
            code, _, err = run_command('simulate', str(d / 'demo.json'),
                                       '--config', str(d / 'other.json'),
                                       out=str(d))
            self.assertEqual(code, EXIT_USER_ERROR)
            self.assertIn('only once', err)
            code, _, err = run_command('simulate', out=str(d))
        self.assertEqual(code, EXIT_USER_ERROR)
        self.assertIn('configuration file', err)

    def test_unknown_scheme(self):
        with workdir() as d:
            write_json(d / 's.json', short_demo(schemes=['NoSh', 'Magic']))
            code, _, err = run_command('simulate', str(d / 's.json'),
                                       out=str(d))
            self.assertFalse((d / 'report.csv').exists())
        self.assertEqual(code, EXIT_USER_ERROR)
        self.assertIn('Magic', err)

    def test_seed_option(self):
        reports = []
        with workdir() as d:
            write_json(d / 'demo.json', short_demo(anomaly=None, sweep=None))
            for seed, out in ((1, 'a'), (1, 'b'), (2, 'c')):
                code, _, err = run_command('simulate', str(d / 'demo.json'),
                                           out=str(d / out), seed=seed)
                self.assertEqual(code, 0, err)
                reports.append((d / out / 'slots.csv').read_bytes())
        self.assertEqual(reports[0], reports[1])
        self.assertNotEqual(reports[0], reports[2])

    def test_bundled_scenario_is_valid(self):
        with workdir() as d:
            code, _, err = run_command('synth', str(DEMO_SCENARIO),
                                       out=str(d))
            self.assertEqual(code, 0, err)
            self.assertTrue((d / 'embb.csv').exists())
            self.assertTrue((d / 'iot.csv').exists())
            data = json.loads((d / 'scenario.json').read_text())
        self.assertEqual(data['slices'][1]['series'], 'iot.csv')


class SweepCommandTests(SimpleTestCase):
    def test_sweep(self):
        data = short_demo(schemes=['NoSh', 'ShT'])
        with workdir() as d:
            write_json(d / 'sweep.json', data)
            code, _, err = run_command('sweep', str(d / 'sweep.json'),
                                       out=str(d), jobs=1)
            self.assertEqual(code, 0, err)
            report = pandas.read_csv(d / 'report.csv')
        self.assertEqual(set(report['case']), {'k=4'})
        self.assertEqual(report['scheme'].tolist(),
                         ['NoSh', 'ShT50', 'ShT100', 'ShT150', 'ShT200'])
        self.assertEqual(report['rc_embb'].tolist()[1], 0.0)
