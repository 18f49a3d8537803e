from dataclasses import replace
import json

from django.test import SimpleTestCase
import numpy
import pandas

from slicemux.exceptions import (DisconnectedRemainder, MissingModel,
                                 UserDataError)
from slicemux.harness import (SLOT_LOG_COLUMNS, Case, expand_schemes,
                              load_models, load_scenario, prepare,
                              random_chain, run_case, save_models,
                              scenario_cases, scenario_from_dict,
                              scenario_to_dict, simulate, synthesize_scenario,
                              synthesize_series)
from slicemux.load import read_mcs_table
from slicemux.markov import TransitionMatrix
from slicemux.scheduler import Scheme
from slicemux.test import (DEMO_SCENARIO, demo_scenario_data, scenario_copy,
                           workdir, write_json)
from slicemux.trace import DemandModel


def small_scenario(**changes):
    """ two synthetic slices with short phases """
    data = {
        'name': 'small',
        'seed': 3,
        'trial_length': 2000,
        'regular_length': 500,
        'slices': [
            {'name': 'a', 'synthetic': {'users': {'levels': [1, 2, 3, 5]}}},
            {'name': 'b', 'synthetic': {'users': {'levels': [2, 4]},
                                        'mcs': {'levels': [20, 28]}}},
        ],
        'schemes': ['NoSh', 'Sh', 'ShT'],
        'detector': {'n': [20, 40]},
    }
    data.update(changes)
    return data


class ScenarioTests(SimpleTestCase):
    def test_demo(self):
        s = load_scenario(DEMO_SCENARIO)
        self.assertEqual(s.names, ('embb', 'iot'))
        self.assertEqual(s.windows, (100,))
        self.assertEqual(s.anomaly.slice, 0)
        self.assertEqual(s.anomaly.beta, 0.5)
        self.assertEqual(s.anomaly.seed, 11)
        self.assertEqual(s.sweep_k, (4,))
        self.assertEqual(s.sweep_n, (50, 100, 150, 200))
        self.assertEqual(s.slices[1].synthetic.user_levels, (4, 6, 8))
        self.assertEqual(s.slices[0].alpha, 0.05)

    def test_defaults_from_settings(self):
        s = scenario_from_dict(small_scenario(detector=None))
        self.assertEqual(s.windows, (100,))
        self.assertEqual(s.chain_mode, 'state')
        self.assertEqual(s.slices[0].p_h, 0.9)
        self.assertIsNone(s.anomaly)

    def test_explicit_uncorrected_threshold(self):
        with self.settings(SLICEMUX_CORRECTED_THRESHOLD=True):
            s = scenario_from_dict(small_scenario())
            self.assertTrue(s.corrected)
            s = scenario_from_dict(small_scenario(
                detector={'n': [20], 'corrected_threshold': False},
            ))
            self.assertFalse(s.corrected)
        s = scenario_from_dict(small_scenario(
            detector={'corrected_threshold': True},
        ))
        self.assertTrue(s.corrected)

    def test_round_trip(self):
        s = load_scenario(DEMO_SCENARIO)
        self.assertEqual(scenario_from_dict(scenario_to_dict(s)), s)

    def test_with_seed(self):
        s = load_scenario(DEMO_SCENARIO).with_seed(99)
        self.assertEqual(s.seed, 99)
        self.assertEqual(s.anomaly.seed, 99)

    def test_errors_name_the_field(self):
        bad = [
            (small_scenario(schemes=['Foo']), 'schemes'),
            (small_scenario(slices=[]), 'slices'),
            (small_scenario(trial_length=1), 'trial_length'),
            (small_scenario(anomaly={'slice': 'zzz'}), 'anomaly.slice'),
            (small_scenario(sweep={'beta': [0.5]}), 'sweep'),
            (small_scenario(detector={'n': [1]}), 'detector.n'),
        ]
        for data, field in bad:
            with self.assertRaisesRegex(UserDataError, field):
                scenario_from_dict(data)

    def test_duplicate_names(self):
        data = small_scenario()
        data['slices'][1]['name'] = 'a'
        with self.assertRaisesRegex(UserDataError, 'unique'):
            scenario_from_dict(data)

    def test_series_or_synthetic(self):
        data = small_scenario()
        data['slices'][0]['series'] = 'a.csv'
        with self.assertRaisesRegex(UserDataError, r'slices\[0\]'):
            scenario_from_dict(data)

    def test_anomaly_slice_by_index(self):
        s = scenario_from_dict(small_scenario(anomaly={'slice': '1',
                                                       'remove_k': 1}))
        self.assertEqual(s.anomaly.slice, 1)
        self.assertEqual(s.anomaly.seed, 3)
        self.assertEqual(scenario_cases(s), [Case('k=1', k=1)])

    def test_bad_json(self):
        with workdir() as d:
            path = d / 'x.json'
            path.write_text('{"name": ')
            with self.assertRaisesRegex(UserDataError, 'JSON'):
                load_scenario(path)
            with self.assertRaises(UserDataError):
                load_scenario(d / 'missing.json')


class CasesTests(SimpleTestCase):
    def test_schemes(self):
        self.assertEqual(
            expand_schemes(['NoSh', 'ShT', 'ShT100'], (50, 100)),
            [Scheme('NoSh'), Scheme('ShT', 50), Scheme('ShT', 100)],
        )

    def test_cases(self):
        s = load_scenario(DEMO_SCENARIO)
        self.assertEqual(scenario_cases(s), [Case('beta=0.5', beta=0.5)])
        self.assertEqual(
            scenario_cases(s, sweep=True), [Case('k=4', k=4)],
        )
        s = scenario_from_dict(small_scenario())
        self.assertEqual(scenario_cases(s, sweep=True), [Case('baseline')])
        self.assertFalse(Case('beta=0', beta=0.0).active)


class SyntheticTests(SimpleTestCase):
    def test_random_chain(self):
        rng = numpy.random.default_rng(0)
        for heavy in (False, True):
            rows = random_chain(5, rng, heavy_tail=heavy)
            chain = TransitionMatrix(list(range(5)), rows)
            self.assertTrue(chain.is_irreducible())
            self.assertEqual(chain.period(), 1)

    def test_series(self):
        s = scenario_from_dict(small_scenario())
        spec = s.slices[1].synthetic
        model = DemandModel(read_mcs_table(), 1000)
        a = synthesize_series(spec, 300, [3, 1], model, name='b')
        b = synthesize_series(spec, 300, [3, 1], model, name='b')
        self.assertEqual(a.users.tolist(), b.users.tolist())
        self.assertEqual(a.mcs.tolist(), b.mcs.tolist())
        self.assertEqual(set(a.users.tolist()), {2, 4})
        self.assertTrue(set(a.mcs.tolist()) <= {20, 28})
        self.assertEqual(a.demand.tolist(),
                         model.many(a.users, a.mcs).tolist())
        c = synthesize_series(spec, 300, [4, 1], model)
        self.assertNotEqual(a.users.tolist(), c.users.tolist())

    def test_synthesize_scenario(self):
        s = scenario_from_dict(small_scenario())
        with workdir() as d:
            files = synthesize_scenario(s, d)
            self.assertEqual([i.name for i in files],
                             ['a.csv', 'b.csv', 'scenario.json'])
            data = json.loads((d / 'scenario.json').read_text())
            self.assertEqual(data['slices'][0]['series'], 'a.csv')
            self.assertEqual(data['regular_length'], 500)
            again = load_scenario(d / 'scenario.json')
            direct = prepare(s)
            from_files = prepare(again)
        self.assertEqual(direct.plan, from_files.plan)
        self.assertEqual(direct.regular[1].users.tolist(),
                         from_files.regular[1].users.tolist())

    def test_regular_length_needed(self):
        s = scenario_from_dict(small_scenario(regular_length=None))
        with self.assertRaisesRegex(UserDataError, 'regular_length'):
            prepare(s)


class ModelFilesTests(SimpleTestCase):
    def test_models_dir(self):
        s = scenario_from_dict(small_scenario())
        prepared = prepare(s)
        with workdir() as d:
            save_models(prepared.models, prepared.plan, d)
            models, plan = load_models(d, s.names)
            self.assertEqual(plan, prepared.plan)
            self.assertEqual([i.p_hat for i in models],
                             [i.p_hat for i in prepared.models])
            with self.assertRaises(MissingModel):
                load_models(d, ('a', 'c'))
            (d / 'model_b.json').unlink()
            with self.assertRaises(MissingModel):
                load_models(d, s.names)
            with self.assertRaises(MissingModel):
                load_models(d / 'nothing', s.names)


class DemoSimulationTests(SimpleTestCase):
    """ the bundled demo: a misbehaving eMBB slice next to an IoT slice """

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.scenario = load_scenario(DEMO_SCENARIO)
        cls.prepared = prepare(cls.scenario)
        cls.result = simulate(cls.scenario, prepared=cls.prepared)
        cls.report = cls.result.report().set_index('scheme')

    def test_plan(self):
        plan = self.prepared.plan
        self.assertEqual(plan.w_h, (10, 8))
        self.assertEqual(plan.sum_w_h, 18)
        self.assertLessEqual(plan.w_c, 16)
        self.assertGreaterEqual(plan.w_c, 10)

    def test_report_layout(self):
        report = self.result.report()
        self.assertEqual(
            list(report.columns),
            ['case', 'anomaly', 'scheme', 'prbs', 'a_embb', 'a_iot',
             'rc_embb', 'rc_iot', 'rw_embb', 'rw_iot'],
        )
        self.assertEqual(report['scheme'].tolist(), ['NoSh', 'Sh', 'ShT100'])
        self.assertEqual(set(report['case']), {'beta=0.5'})
        self.assertEqual(set(report['anomaly']), {'embb'})
        self.assertTrue(pandas.isna(self.report.loc['NoSh', 'rc_embb']))

    def test_isolation(self):
        r = self.report
        self.assertEqual(r.loc['NoSh', 'a_iot'], 1.0)
        # sharing alone lets the anomaly eat into the IoT slice's SLA
        self.assertLess(r.loc['Sh', 'a_iot'], 0.9)
        self.assertGreaterEqual(r.loc['ShT100', 'a_iot'], 0.9)
        self.assertEqual(r.loc['NoSh', 'prbs'], 18)
        self.assertLess(r.loc['Sh', 'a_iot'], r.loc['ShT100', 'a_iot'])
        self.assertGreaterEqual(r.loc['ShT100', 'rc_embb'], 0.9)
        self.assertLessEqual(r.loc['ShT100', 'rw_iot'], 0.05)

    def test_small_window_misses(self):
        runs = run_case(self.prepared, Case('beta=0.5', beta=0.5),
                        [Scheme('ShT', 50), Scheme('ShT', 100)])
        self.assertEqual(runs[0].rc['embb'], 0.0)
        self.assertGreaterEqual(runs[1].rc['embb'], 0.9)

    def test_deficits_start_at_percentile_level(self):
        slots = self.result.slots()
        first = slots[slots['slot'] == 0]
        self.assertEqual(len(first), 3 * 2)
        for _, row in first.iterrows():
            self.assertAlmostEqual(row['deficit'], 0.9)

    def test_false_rejections_grow_with_window(self):
        schemes = [Scheme('ShT', n) for n in (100, 150, 200, 250)]
        runs = run_case(self.prepared, Case('beta=0.5', beta=0.5), schemes)
        rw = [i.rw['embb'] for i in runs]
        for a, b in zip(rw[:-1], rw[1:]):
            self.assertLess(a, b, rw)

    def test_unbuildable_anomaly(self):
        # removing 2 of the 8 eMBB states strands the low ones
        with self.assertRaises(DisconnectedRemainder):
            run_case(self.prepared, Case('beta=0.25', beta=0.25),
                     [Scheme('NoSh')])
        s = replace(self.scenario, schemes=('NoSh',),
                    sweep_beta=(0.25, 0.5), sweep_k=())
        with self.assertLogs('slicemux.harness', 'WARNING'):
            result = simulate(s, sweep=True, prepared=self.prepared)
        self.assertEqual(result.report()['case'].tolist(), ['beta=0.5'])

    def test_baseline(self):
        schemes = expand_schemes(self.scenario.schemes, (100,))
        runs = run_case(self.prepared, Case('baseline'), schemes)
        for run in runs:
            self.assertEqual(run.anomaly, '')
            for name, p_h in zip(self.prepared.names,
                                 self.prepared.plan.p_h):
                self.assertGreaterEqual(run.acceptance[name], p_h - 0.05)
        self.assertGreaterEqual(runs[0].prbs, runs[1].prbs)
        zero = run_case(self.prepared, Case('beta=0', beta=0.0), schemes)
        for a, b in zip(runs, zero):
            self.assertEqual(a.acceptance, b.acceptance)
            # rows only differ in the case label
            self.assertEqual([i[:-1] for i in a.slot_rows],
                             [i[:-1] for i in b.slot_rows])

    def test_slot_log(self):
        slots = self.result.slots()
        self.assertEqual(list(slots.columns), list(SLOT_LOG_COLUMNS))
        self.assertEqual(len(slots), 3 * 2000 * 2)
        embb = slots[(slots['slice'] == 'embb') & (slots['scheme'] == 'Sh')]
        self.assertGreater(embb['anomalous'].sum(), 1000)
        self.assertEqual(slots[slots['slice'] == 'iot']['anomalous'].sum(), 0)
        # in_A and in_B partition the slices
        self.assertTrue((slots['in_A'] + slots['in_B'] == 1).all())
        nosh = slots[slots['scheme'] == 'NoSh']
        self.assertEqual(nosh['tested'].sum(), 0)

    def test_summary(self):
        summary = self.result.summary().set_index('scheme')
        plan = self.prepared.plan
        self.assertEqual(summary.loc['NoSh', 'savings_pct'], 0.0)
        self.assertAlmostEqual(summary.loc['Sh', 'savings_pct'],
                               100 * (18 - plan.w_c) / 18)
        self.assertEqual(summary.loc['NoSh', 'isolation_pct'], 100.0)
        self.assertTrue(summary['alloc_ms'].isna().all())

    def test_write(self):
        with workdir() as d:
            paths = self.result.write(d)
            self.assertEqual([i.name for i in paths],
                             ['report.csv', 'slots.csv', 'summary.csv'])
            report = pandas.read_csv(d / 'report.csv')
        self.assertEqual(report['scheme'].tolist(), ['NoSh', 'Sh', 'ShT100'])
        self.assertTrue(report['rc_embb'].isna()[0])


class ReproducibilityTests(SimpleTestCase):
    def test_same_files(self):
        s = scenario_from_dict(small_scenario(
            anomaly={'slice': 'a', 'beta': 0.5},
        ))
        contents = []
        for _ in range(2):
            with workdir() as d:
                paths = simulate(s).write(d)
                contents.append([i.read_bytes() for i in paths])
        self.assertEqual(contents[0], contents[1])

    def test_seed_changes_output(self):
        s = scenario_from_dict(small_scenario())
        a = simulate(s).slots()
        b = simulate(s.with_seed(4)).slots()
        self.assertFalse(a.equals(b))

    def test_parallel_sweep(self):
        data = scenario_copy(
            small_scenario(),
            anomaly={'slice': 'a', 'beta': 0.5},
            sweep={'beta': [0.25, 0.5], 'n': [20, 40]},
        )
        s = scenario_from_dict(data)
        serial = simulate(s, sweep=True)
        parallel = simulate(s, sweep=True, jobs=2)
        report = serial.report()
        self.assertEqual(report['case'].tolist(),
                         ['beta=0.25'] * 4 + ['beta=0.5'] * 4)
        self.assertEqual(report['scheme'].tolist(),
                         ['NoSh', 'Sh', 'ShT20', 'ShT40'] * 2)
        pandas.testing.assert_frame_equal(report, parallel.report())
        pandas.testing.assert_frame_equal(serial.slots(), parallel.slots())

    def test_from_files(self):
        with workdir() as d:
            write_json(d / 's.json', demo_scenario_data())
            s = load_scenario(d / 's.json')
        self.assertEqual(s.names, ('embb', 'iot'))
