from pathlib import Path

from slicemux.exceptions import Periodic, Reducible, TrialTooShort
from slicemux.forms import TrialForm, TrialSliceForm, validate, validate_list
from slicemux.harness import DEFAULT_P_H, load_json, save_models
from slicemux.load import read_slot_series
from slicemux.management.base import AbstractSliceMuxCommand
from slicemux.markov import (SPECTRAL_STATE_LIMIT, SampleSizeParams,
                             spectral_gap_lambda, trial_length_hitting,
                             trial_length_spectral)
from slicemux.trial import run_trial
from slicemux.utils import get_setting, getLogger


log = getLogger('slicemux')


class Command(AbstractSliceMuxCommand):
    help = ('Learn slice models and the provision plan from trial-phase '
            'slot series, writes model_<slice name>.json and plan.json')
    config_help = (
        'JSON file with a "slices" list, each with a name, a slot series CSV '
        'and optionally p_h and alpha'
    )

    def run(self, out_dir, config, **options):
        base_dir = Path(config).parent
        data = validate(TrialForm, load_json(config))
        slices = validate_list(TrialSliceForm, data['slices'], 'slices')
        alpha = data['alpha'] or get_setting('ALPHA')

        series = [
            read_slot_series(base_dir / i['series'], i['name'])
            for i in slices
        ]
        length = data['trial_length']
        if length is not None:
            for i in series:
                if len(i) < length:
                    raise TrialTooShort(
                        f'series {i.name!r} has {len(i)} slots, trial length '
                        f'is {length}'
                    )
            series = [i.window(0, length) for i in series]

        models, plan = run_trial(
            series,
            p_h=[i['p_h'] or DEFAULT_P_H for i in slices],
            alpha=[i['alpha'] or alpha for i in slices],
            chain_mode=data['chain_mode'] or get_setting('CHAIN_MODE'),
            transform=data['transform'] or get_setting('TRANSFORM'),
            estimator=data['estimator'] or get_setting('ESTIMATOR'),
        )
        save_models(models, plan, out_dir)

        for name, w_h in zip(plan.names, plan.w_h):
            self.stdout.write(f' {name}: W^H={w_h}')
        self.stdout.write(f' W^c={plan.w_c} (sum of W^H: {plan.sum_w_h})')

        if data['epsilon'] and data['delta']:
            self.advise(len(series[0]), models, data)
        return f'W^H={list(plan.w_h)} W^c={plan.w_c}'

    def advise(self, length, models, data):
        """
        Log the trial lengths the Hoeffding bounds ask for

        Without a given lambda, the second eigenvalue modulus of each slice's
        estimated chain is used.
        """
        lams = []
        if data['lam'] is not None:
            lams = [('given', data['lam'])]
        else:
            for i in models:
                if len(i.space) > SPECTRAL_STATE_LIMIT:
                    log.info(f'slice {i.name!r}: {len(i.space)} states, '
                             f'skipping eigenvalue advisory')
                    continue
                try:
                    lams.append((i.name, spectral_gap_lambda(i.p_hat)))
                except (Reducible, Periodic) as e:
                    log.warning(f'slice {i.name!r}: no eigenvalue bound: {e}')

        advice = []
        if data['h_z'] is not None:
            params = SampleSizeParams(data['epsilon'], data['delta'],
                                      h_z=data['h_z'])
            advice.append(('hitting time', trial_length_hitting(params)))
        for name, lam in lams:
            if lam >= 1:
                continue
            params = SampleSizeParams(data['epsilon'], data['delta'], lam=lam)
            advice.append((f'lambda={lam:.4g} ({name})',
                           trial_length_spectral(params)))

        for what, needed in advice:
            msg = f' trial length {length}, {what} bound asks for {needed}'
            self.stdout.write(msg)
            if needed > length:
                log.warning(msg.strip())
