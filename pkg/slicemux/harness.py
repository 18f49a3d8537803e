"""
Simulation harness

Runs scenarios end to end: get per-slice slot series (from files or
synthesized), split them into trial and regular phase, learn the models and
the provision plan, optionally make one slice misbehave, and drive the
allocation schemes slot by slot while logging every decision.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import json
from pathlib import Path

import numpy
import pandas

from . import NOSH
from .anomaly import inject_anomaly
from .detector import Hypothesis, SliceDetector
from .exceptions import (AllStatesRemoved, DisconnectedRemainder, MissingModel,
                         NoEntryPoint, UserDataError)
from .forms import (AnomalyForm, DetectorForm, ScenarioForm, SliceForm,
                    SweepForm, SyntheticChainForm, SyntheticForm, validate,
                    validate_list)
from .load import read_mcs_table, read_slot_series, write_slot_series
from .markov import (TransitionMatrix, make_rng, sample_trajectory,
                     stationary_distribution)
from .scheduler import Scheme, allocate_slot, update_deficits
from .trace import DemandModel, SliceSeries
from .trial import ProvisionPlan, SliceModel, run_trial
from .utils import Timer, get_setting, getLogger


log = getLogger(__name__)

DEFAULT_P_H = 0.9
DEFAULT_RATE_KBPS = 1000.0
DEFAULT_MCS_LEVEL = 28
DEFAULT_SCHEMES = ('NoSh', 'Sh', 'ShT')

SLOT_LOG_COLUMNS = (
    'slot', 'slice', 'demand', 'accepted', 'in_A', 'in_B', 'in_AR',
    'residual_grant', 'deficit', 'tested', 'rejected', 'anomalous', 'scheme',
    'case',
)
FLOAT_FORMAT = '%.6g'


@dataclass(frozen=True)
class SyntheticSpec:
    user_levels: tuple
    user_rows: tuple = None
    mcs_levels: tuple = (DEFAULT_MCS_LEVEL,)
    mcs_rows: tuple = None
    heavy_tail: bool = False


@dataclass(frozen=True)
class SliceConfig:
    name: str
    series_path: Path = None
    synthetic: SyntheticSpec = None
    rate_kbps: float = DEFAULT_RATE_KBPS
    p_h: float = DEFAULT_P_H
    alpha: float = 0.05
    users_step: int = 1
    mcs_step: int = 1
    demand_step: int = 1


@dataclass(frozen=True)
class AnomalySpec:
    slice: int
    beta: float = None
    remove_k: int = None
    t_s: int = None
    seed: int = 0
    chain: str = 'users'


@dataclass(frozen=True)
class Scenario:
    """
    A validated scenario, see scenario_from_dict()
    """
    slices: tuple
    name: str = 'scenario'
    seed: int = 0
    trial_length: int = 7200
    regular_length: int = None
    schemes: tuple = DEFAULT_SCHEMES
    windows: tuple = (100,)
    corrected: bool = False
    chain_mode: str = 'state'
    transform: str = 'clip'
    estimator: str = 'joint'
    residual: str = 'continuous'
    anomaly: AnomalySpec = None
    sweep_beta: tuple = ()
    sweep_k: tuple = ()
    sweep_n: tuple = ()
    models_dir: Path = None
    mcs_table: Path = None
    mimo_factor: float = 2
    report_timing: bool = False

    @property
    def names(self):
        return tuple(i.name for i in self.slices)

    def with_seed(self, seed):
        """ copy with every seed replaced """
        anomaly = self.anomaly
        if anomaly is not None:
            anomaly = replace(anomaly, seed=seed)
        return replace(self, seed=seed, anomaly=anomaly)


def _resolve(base_dir, path):
    if not path:
        return None
    path = Path(path)
    if not path.is_absolute():
        path = Path(base_dir) / path
    return path


def _synthetic_spec(data, prefix):
    data = validate(SyntheticForm, data, prefix)
    users = validate(SyntheticChainForm, data['users'], prefix + 'users.')
    mcs = data['mcs']
    if mcs is None:
        mcs = {'levels': [DEFAULT_MCS_LEVEL]}
    mcs = validate(SyntheticChainForm, mcs, prefix + 'mcs.')
    if max(mcs['levels']) > 31:
        raise UserDataError(f'{prefix}mcs.levels: MCS must be in 0-31')

    def rows(value):
        return None if value is None else tuple(tuple(i) for i in value)

    return SyntheticSpec(
        user_levels=tuple(users['levels']),
        user_rows=rows(users['rows']),
        mcs_levels=tuple(mcs['levels']),
        mcs_rows=rows(mcs['rows']),
        heavy_tail=data['heavy_tail'],
    )


def scenario_from_dict(data, base_dir='.'):
    """
    Validate scenario data and build a Scenario

    Relative paths are taken relative to base_dir.  Unset values come from
    the SLICEMUX_* settings.
    """
    top = validate(ScenarioForm, data)
    detector = validate(DetectorForm, top['detector'] or {}, 'detector.')
    default_alpha = detector['alpha'] or get_setting('ALPHA')

    slices = []
    for num, item in enumerate(validate_list(SliceForm, top['slices'],
                                             'slices')):
        prefix = f'slices[{num}].'
        synthetic = None
        if item['synthetic'] is not None:
            synthetic = _synthetic_spec(item['synthetic'], prefix
                                        + 'synthetic.')
        slices.append(SliceConfig(
            name=item['name'],
            series_path=_resolve(base_dir, item['series']),
            synthetic=synthetic,
            rate_kbps=item['rate_kbps'] or DEFAULT_RATE_KBPS,
            p_h=item['p_h'] or DEFAULT_P_H,
            alpha=item['alpha'] or default_alpha,
            users_step=item['users_step'] or 1,
            mcs_step=item['mcs_step'] or 1,
            demand_step=item['demand_step'] or 1,
        ))
    names = [i.name for i in slices]
    if len(set(names)) != len(names):
        raise UserDataError('slices: slice names must be unique')

    anomaly = None
    if top['anomaly']:
        a = validate(AnomalyForm, top['anomaly'], 'anomaly.')
        if a['slice'] in names:
            index = names.index(a['slice'])
        elif a['slice'].isdigit() and int(a['slice']) < len(names):
            index = int(a['slice'])
        else:
            raise UserDataError(f'anomaly.slice: no such slice: {a["slice"]}')
        anomaly = AnomalySpec(
            slice=index,
            beta=a['beta'],
            remove_k=a['remove_k'],
            t_s=a['t_s'],
            seed=(top['seed'] or 0) if a['seed'] is None else a['seed'],
            chain=a['chain'] or 'users',
        )

    sweep = validate(SweepForm, top['sweep'] or {}, 'sweep.')
    if (sweep['beta'] or sweep['remove_k']) and anomaly is None:
        raise UserDataError('sweep: an anomaly section naming the slice is '
                            'required to sweep beta or remove_k')

    return Scenario(
        slices=tuple(slices),
        name=top['name'] or 'scenario',
        seed=top['seed'] or 0,
        trial_length=top['trial_length'] or get_setting('TRIAL_LENGTH'),
        regular_length=top['regular_length'],
        schemes=tuple(top['schemes'] or DEFAULT_SCHEMES),
        windows=tuple(detector['n'] or [get_setting('WINDOW')]),
        corrected=(get_setting('CORRECTED_THRESHOLD')
                   if detector['corrected_threshold'] is None
                   else detector['corrected_threshold']),
        chain_mode=top['chain_mode'] or get_setting('CHAIN_MODE'),
        transform=top['transform'] or get_setting('TRANSFORM'),
        estimator=top['estimator'] or get_setting('ESTIMATOR'),
        residual=top['residual'] or get_setting('RESIDUAL'),
        anomaly=anomaly,
        sweep_beta=tuple(sweep['beta']),
        sweep_k=tuple(sweep['remove_k']),
        sweep_n=tuple(sweep['n']),
        models_dir=_resolve(base_dir, top['models']),
        mcs_table=_resolve(base_dir, top['mcs_table']
                           or get_setting('MCS_TABLE')),
        mimo_factor=top['mimo_factor'] or get_setting('MIMO_FACTOR'),
        report_timing=get_setting('REPORT_TIMING'),
    )


def load_json(path):
    path = Path(path)
    try:
        with path.open() as f:
            return json.load(f)
    except OSError as e:
        raise UserDataError(f'{path}: {e}') from e
    except json.JSONDecodeError as e:
        raise UserDataError(f'{path}: not valid JSON: {e}') from e


def load_scenario(path):
    path = Path(path)
    return scenario_from_dict(load_json(path), base_dir=path.parent)


def random_chain(size, rng, heavy_tail=False):
    """
    Random ergodic birth-death chain

    Every state has a self-loop and moves to its neighbors, so the chain is
    irreducible and aperiodic.  With heavy_tail, downward moves are three
    times as likely, so the stationary mass decays towards high states.
    """
    rows = numpy.zeros((size, size))
    for i in range(size):
        stay = rng.uniform(0.2, 1.0)
        up = rng.uniform(0.2, 1.0) if i < size - 1 else 0.0
        down = rng.uniform(0.2, 1.0) if i > 0 else 0.0
        if heavy_tail:
            down *= 3
        total = stay + up + down
        rows[i, i] = stay / total
        if up:
            rows[i, i + 1] = up / total
        if down:
            rows[i, i - 1] = down / total
    return rows


def synthesize_series(spec, length, seed, demand_model, name=''):
    """
    Generate a slot series from independent user and MCS chains

    Chains not given explicitly are drawn at random.  Both trajectories
    start in a state drawn from the chain's stationary distribution.
    """
    chain_seed, users_seed, mcs_seed = (
        int(i.generate_state(1)[0])
        for i in numpy.random.SeedSequence(seed).spawn(3)
    )
    rng = make_rng(chain_seed)
    user_rows = spec.user_rows
    if user_rows is None:
        user_rows = random_chain(len(spec.user_levels), rng, spec.heavy_tail)
    mcs_rows = spec.mcs_rows
    if mcs_rows is None:
        mcs_rows = random_chain(len(spec.mcs_levels), rng)
    users_chain = TransitionMatrix(spec.user_levels, user_rows)
    mcs_chain = TransitionMatrix(spec.mcs_levels, mcs_rows)

    def start(chain):
        pi = stationary_distribution(chain).probs
        return chain.space[int(rng.choice(len(pi), p=pi))]

    users = sample_trajectory(users_chain, start(users_chain), length,
                              users_seed)
    mcs = sample_trajectory(mcs_chain, start(mcs_chain), length, mcs_seed)
    return SliceSeries(users, mcs, demand_model.many(users, mcs), name=name)


def demand_models(scenario):
    table = read_mcs_table(scenario.mcs_table, scenario.mimo_factor)
    return [
        DemandModel(table, i.rate_kbps, i.demand_step)
        for i in scenario.slices
    ]


def phase_lengths(scenario, available=None):
    trial = scenario.trial_length
    regular = scenario.regular_length
    if regular is None:
        if available is None:
            raise UserDataError('regular_length is required for synthetic '
                                'slices')
        regular = available - trial
    if regular < 1:
        raise UserDataError(
            f'series of {available} slots leave nothing for the regular phase '
            f'after a trial of {trial} slots'
        )
    return trial, regular


def load_series(scenario, models=None):
    """
    Full-length slot series of all slices

    Synthetic slices get trial_length + regular_length slots; series read
    from files are checked to be long enough.
    """
    if models is None:
        models = demand_models(scenario)
    from_files = {}
    for i in scenario.slices:
        if i.series_path is not None:
            from_files[i.name] = read_slot_series(i.series_path, i.name)
    available = min((len(i) for i in from_files.values()), default=None)
    trial, regular = phase_lengths(scenario, available)

    out = []
    for num, (cfg, model) in enumerate(zip(scenario.slices, models)):
        if cfg.series_path is not None:
            series = from_files[cfg.name]
            if len(series) < trial + regular:
                raise UserDataError(
                    f'{cfg.series_path}: {len(series)} slots, need '
                    f'{trial + regular}'
                )
        else:
            series = synthesize_series(cfg.synthetic, trial + regular,
                                       [scenario.seed, num], model,
                                       name=cfg.name)
        out.append(series.window(0, trial + regular))
    return out


def save_models(models, plan, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in models:
        with (out_dir / f'model_{i.name}.json').open('w') as f:
            json.dump(i.to_dict(), f, indent=1)
    with (out_dir / 'plan.json').open('w') as f:
        json.dump(plan.to_dict(), f, indent=1)


def load_models(models_dir, names):
    models_dir = Path(models_dir)
    path = models_dir / 'plan.json'
    if not path.exists():
        raise MissingModel(f'provision plan not found: {path}')
    plan = ProvisionPlan.from_dict(load_json(path))
    if tuple(plan.names) != tuple(names):
        raise MissingModel(f'{path}: plan is for slices {plan.names}, '
                           f'scenario has {names}')
    models = []
    for name in names:
        path = models_dir / f'model_{name}.json'
        if not path.exists():
            raise MissingModel(f'slice model not found: {path}')
        models.append(SliceModel.from_dict(load_json(path)))
    return models, plan


@dataclass
class Prepared:
    """ a scenario after the trial phase """
    scenario: Scenario
    trial: list
    regular: list
    models: list
    plan: ProvisionPlan
    demand_models: list

    @property
    def names(self):
        return self.scenario.names


def prepare(scenario):
    """ Get the series, split them, and run (or load) the trial phase """
    dmodels = demand_models(scenario)
    full = load_series(scenario, dmodels)
    trial_len = scenario.trial_length
    trial = [i.window(0, trial_len) for i in full]
    regular = [i.window(trial_len) for i in full]

    if scenario.models_dir is not None:
        models, plan = load_models(scenario.models_dir, scenario.names)
    else:
        models, plan = run_trial(
            trial,
            p_h=[i.p_h for i in scenario.slices],
            alpha=[i.alpha for i in scenario.slices],
            chain_mode=scenario.chain_mode,
            transform=scenario.transform,
            estimator=scenario.estimator,
        )
    return Prepared(scenario, trial, regular, models, plan, dmodels)


@dataclass(frozen=True)
class Case:
    """ one anomaly setting: none, or beta / k states removed """
    label: str
    beta: float = None
    k: int = None

    @property
    def active(self):
        return bool(self.beta) or bool(self.k)


def scenario_cases(scenario, sweep=False):
    if sweep and (scenario.sweep_beta or scenario.sweep_k):
        return [Case(f'beta={i}', beta=i) for i in scenario.sweep_beta] \
            + [Case(f'k={i}', k=i) for i in scenario.sweep_k]
    a = scenario.anomaly
    if a is None or (a.beta is None and a.remove_k is None):
        return [Case('baseline')]
    if a.beta is not None:
        return [Case(f'beta={a.beta}', beta=a.beta)]
    return [Case(f'k={a.remove_k}', k=a.remove_k)]


def expand_schemes(names, windows):
    """
    Parse scheme names, a bare ShT gets one scheme per sample size
    """
    out = []
    for name in names:
        if name.strip() == 'ShT':
            out += [Scheme.parse(name, default_n=n) for n in windows]
        else:
            out.append(Scheme.parse(name))
    # unique, order kept
    return list(dict.fromkeys(out))


@dataclass
class SchemeRun:
    case: str
    anomaly: str
    scheme: str
    prbs: int
    acceptance: dict
    rc: dict
    rw: dict
    slot_rows: list = field(repr=False)
    alloc_ms: float = None

    def report_row(self, names):
        row = {
            'case': self.case,
            'anomaly': self.anomaly,
            'scheme': self.scheme,
            'prbs': self.prbs,
        }
        for key, values in (('a', self.acceptance), ('rc', self.rc),
                            ('rw', self.rw)):
            for name in names:
                row[f'{key}_{name}'] = values.get(name)
        return row


def _ratio(num, den):
    return float(num / den) if den else None


def run_scheme(prepared, series, scheme, case, anomalous=''):
    """
    Drive one scheme over the regular phase

    :param list series: regular-phase SliceSeries per slice
    :param Scheme scheme:
    :param Case case:
    :param str anomalous: name of the misbehaving slice, if any
    """
    scenario = prepared.scenario
    plan = prepared.plan
    names = prepared.names
    size = len(names)
    length = min(len(i) for i in series)
    users = numpy.vstack([i.users[:length] for i in series])
    mcs = numpy.vstack([i.mcs[:length] for i in series])
    demand = numpy.vstack([i.demand[:length] for i in series])
    flags = numpy.vstack([i.anomalous[:length] for i in series])
    p_h = numpy.asarray(plan.p_h)

    detectors = None
    detect = None
    if scheme.tests:
        detectors = [
            SliceDetector(model, scheme.n, corrected=scenario.corrected)
            for model in prepared.models
        ]

        def detect():
            return [i.decide() is Hypothesis.H1 for i in detectors]

    steps = None
    if scenario.residual == 'quantized':
        steps = {num: cfg.demand_step
                 for num, cfg in enumerate(scenario.slices)}

    deficits = p_h.astype(float)
    served = numpy.zeros(size, dtype=int)
    # tested / rejected, in anomalous and in normal slots
    counts = numpy.zeros((4, size), dtype=int)
    timer = Timer()
    rows = []
    label = str(scheme)
    for t in range(length):
        w = demand[:, t]
        if detectors:
            for i, det in enumerate(detectors):
                det.push(int(users[i, t]), int(mcs[i, t]), int(w[i]))

        if scenario.report_timing:
            with timer.measure():
                outcome = allocate_slot(w, deficits, plan, scheme, detect,
                                        steps)
        else:
            outcome = allocate_slot(w, deficits, plan, scheme, detect, steps)

        in_a = numpy.zeros(size, dtype=bool)
        in_a[list(outcome.set_a)] = True
        in_ar = numpy.zeros(size, dtype=bool)
        in_ar[list(outcome.set_ar)] = True
        rejected = ~in_a if outcome.tested else numpy.zeros(size, dtype=bool)
        if outcome.tested:
            anom = flags[:, t]
            counts[0] += anom
            counts[1] += anom & rejected
            counts[2] += ~anom
            counts[3] += ~anom & rejected
        served += outcome.accepted

        for i in range(size):
            rows.append((
                t, names[i], int(w[i]), int(outcome.accepted[i]),
                int(in_a[i]), int(not in_a[i]), int(in_ar[i]),
                float(outcome.residual[i]), float(deficits[i]),
                int(outcome.tested), int(rejected[i]), int(flags[i, t]),
                label, case.label,
            ))
        deficits = update_deficits(deficits, outcome.accepted, p_h)

    run = SchemeRun(
        case=case.label,
        anomaly=anomalous,
        scheme=label,
        prbs=scheme.capacity(plan),
        acceptance={
            name: float(served[i] / length) if length else None
            for i, name in enumerate(names)
        },
        rc={} if not scheme.tests else {
            name: _ratio(counts[1, i], counts[0, i])
            for i, name in enumerate(names)
        },
        rw={} if not scheme.tests else {
            name: _ratio(counts[3, i], counts[2, i])
            for i, name in enumerate(names)
        },
        slot_rows=rows,
        alloc_ms=timer.mean_ms,
    )
    log.debug(f'{case.label} {label}: acceptance',
              {k: round(v, 4) for k, v in run.acceptance.items() if v})
    return run


def run_case(prepared, case, schemes, skip_invalid=False):
    """
    Run all schemes on one anomaly case, all on the same series

    With skip_invalid, a case whose anomaly can not be built for the
    scenario is logged and gives no runs.
    """
    scenario = prepared.scenario
    regular = list(prepared.regular)
    anomalous = ''
    if case.active and scenario.anomaly is not None:
        spec = scenario.anomaly
        n = max([i.n for i in schemes if i.tests],
                default=max(scenario.windows))
        i = spec.slice
        try:
            injected = inject_anomaly(
                prepared.trial[i],
                regular[i],
                prepared.demand_models[i],
                n,
                beta=case.beta,
                k=case.k,
                t_s=spec.t_s,
                seed=spec.seed,
                chain=spec.chain,
            )
        except (AllStatesRemoved, DisconnectedRemainder, NoEntryPoint) as e:
            if not skip_invalid:
                raise
            log.warning(f'skipping case {case.label}: {e}')
            return []
        if injected is not None:
            regular[i] = injected.series
            anomalous = prepared.names[i]
    return [run_scheme(prepared, regular, i, case, anomalous)
            for i in schemes]


@dataclass
class SimulationResult:
    prepared: Prepared
    runs: list

    def report(self):
        names = self.prepared.names
        return pandas.DataFrame([i.report_row(names) for i in self.runs])

    def slots(self):
        return pandas.DataFrame(
            [row for run in self.runs for row in run.slot_rows],
            columns=list(SLOT_LOG_COLUMNS),
        )

    def summary(self):
        """
        Per scheme: provisioned PRBs, savings against no sharing, and the
        share of anomaly cases where every well-behaved slice kept its
        acceptance level
        """
        plan = self.prepared.plan
        names = self.prepared.names
        p_h = dict(zip(plan.names, plan.p_h))
        rows = []
        for scheme in dict.fromkeys(i.scheme for i in self.runs):
            runs = [i for i in self.runs if i.scheme == scheme]
            prbs = runs[0].prbs
            anomalous = [i for i in runs if i.anomaly]
            isolated = [
                all(i.acceptance[name] >= p_h[name]
                    for name in names if name != i.anomaly)
                for i in anomalous
            ]
            timing = [i.alloc_ms for i in runs if i.alloc_ms is not None]
            rows.append({
                'scheme': scheme,
                'prbs': prbs,
                'savings_pct': 100 * (plan.sum_w_h - prbs) / plan.sum_w_h
                if plan.sum_w_h else 0.0,
                'isolation_pct': 100 * sum(isolated) / len(isolated)
                if isolated else None,
                'cases': len(runs),
                'alloc_ms': sum(timing) / len(timing) if timing else None,
            })
        return pandas.DataFrame(rows)

    def write(self, out_dir):
        """ write report.csv, slots.csv and summary.csv """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        self.report().to_csv(out_dir / 'report.csv', index=False,
                             float_format=FLOAT_FORMAT)
        self.slots().to_csv(out_dir / 'slots.csv', index=False,
                            float_format=FLOAT_FORMAT)
        self.summary().to_csv(out_dir / 'summary.csv', index=False,
                              float_format=FLOAT_FORMAT)
        return [out_dir / i for i in ('report.csv', 'slots.csv',
                                      'summary.csv')]


def _case_worker(args):
    prepared, case, schemes, skip_invalid = args
    return run_case(prepared, case, schemes, skip_invalid)


def simulate(scenario, sweep=False, jobs=1, prepared=None):
    """
    Run a scenario

    With sweep=True every beta/remove_k of the scenario's sweep section is a
    case, and a bare ShT scheme is expanded over the sweep's sample sizes.
    Cases run in up to jobs processes; results come back in case order.
    In a sweep, cases whose anomaly can not be built are skipped.
    """
    if prepared is None:
        prepared = prepare(scenario)
    windows = scenario.windows
    if sweep and scenario.sweep_n:
        windows = scenario.sweep_n
    schemes = expand_schemes(scenario.schemes, windows)
    cases = scenario_cases(scenario, sweep=sweep)
    log.info(f'scenario {scenario.name!r}: {len(cases)} case(s) x '
             f'{len(schemes)} scheme(s)')

    work = [(prepared, case, schemes, sweep) for case in cases]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_case_worker, work))
    else:
        results = [_case_worker(i) for i in work]
    return SimulationResult(prepared, [run for i in results for run in i])


def synthesize_scenario(scenario, out_dir):
    """
    Write the scenario's synthetic slices as slot series files

    Also writes scenario.json, the same scenario with every slice reading
    its series file, which the simulate and sweep commands accept.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    series = load_series(scenario)
    files = []
    for s in series:
        path = out_dir / f'{s.name}.csv'
        write_slot_series(s, path)
        files.append(path)
    data = scenario_to_dict(scenario)
    for item in data['slices']:
        item.pop('synthetic', None)
        item['series'] = f'{item["name"]}.csv'
    data['regular_length'] = len(series[0]) - scenario.trial_length
    path = out_dir / 'scenario.json'
    with path.open('w') as f:
        json.dump(data, f, indent=1)
    files.append(path)
    return files


def scenario_to_dict(scenario):
    """ JSON-ready dict of a scenario, inverse of scenario_from_dict() """
    slices = []
    for i in scenario.slices:
        item = {
            'name': i.name,
            'rate_kbps': i.rate_kbps,
            'p_h': i.p_h,
            'alpha': i.alpha,
            'users_step': i.users_step,
            'mcs_step': i.mcs_step,
            'demand_step': i.demand_step,
        }
        if i.series_path is not None:
            item['series'] = str(i.series_path)
        if i.synthetic is not None:
            s = i.synthetic
            item['synthetic'] = {
                'users': {'levels': list(s.user_levels)},
                'mcs': {'levels': list(s.mcs_levels)},
                'heavy_tail': s.heavy_tail,
            }
            if s.user_rows is not None:
                item['synthetic']['users']['rows'] = [list(r)
                                                      for r in s.user_rows]
            if s.mcs_rows is not None:
                item['synthetic']['mcs']['rows'] = [list(r)
                                                    for r in s.mcs_rows]
        slices.append(item)

    data = {
        'name': scenario.name,
        'seed': scenario.seed,
        'slices': slices,
        'trial_length': scenario.trial_length,
        'schemes': list(scenario.schemes),
        'detector': {
            'n': list(scenario.windows),
            'corrected_threshold': scenario.corrected,
        },
        'chain_mode': scenario.chain_mode,
        'transform': scenario.transform,
        'estimator': scenario.estimator,
        'residual': scenario.residual,
        'mimo_factor': scenario.mimo_factor,
    }
    if scenario.regular_length is not None:
        data['regular_length'] = scenario.regular_length
    if scenario.mcs_table is not None:
        data['mcs_table'] = str(scenario.mcs_table)
    if scenario.anomaly is not None:
        a = scenario.anomaly
        data['anomaly'] = {
            'slice': scenario.slices[a.slice].name,
            'seed': a.seed,
            'chain': a.chain,
        }
        for key, value in (('beta', a.beta), ('remove_k', a.remove_k),
                           ('t_s', a.t_s)):
            if value is not None:
                data['anomaly'][key] = value
    sweep = {}
    for key, value in (('beta', scenario.sweep_beta),
                       ('remove_k', scenario.sweep_k),
                       ('n', scenario.sweep_n)):
        if value:
            sweep[key] = list(value)
    if sweep:
        data['sweep'] = sweep
    return data
