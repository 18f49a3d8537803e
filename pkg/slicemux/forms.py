"""
Validation of JSON configuration files

The command line tools take their configuration as JSON files.  Each file
(and each nested object in it) is checked by a django form before anything
is computed; errors name the offending field.
"""
from django import forms

from .anomaly import ANOMALY_CHAINS
from .exceptions import UserDataError
from .scheduler import Scheme
from .trial import CHAIN_MODES, ESTIMATORS, TRANSFORMS
from .utils import getLogger


log = getLogger(__name__)

RESIDUAL_MODES = ('continuous', 'quantized')


def _choices(values):
    return [(i, i) for i in values]


def validate(form_class, data, prefix=''):
    """
    Validate a dict with a form, return the cleaned data

    Raises UserDataError listing all errors with their field names.
    """
    if not isinstance(data, dict):
        raise UserDataError(f'{prefix or "config"}: expected a JSON object')
    unknown = set(data) - set(form_class.base_fields)
    if unknown:
        log.warning(f'{prefix or "config"}: ignoring unknown field(s): '
                    + ', '.join(sorted(unknown)))
    form = form_class(data=data)
    if not form.is_valid():
        msgs = []
        for field, errors in form.errors.items():
            name = prefix + ('' if field == '__all__' else field)
            msgs.append(f'{name or "config"}: {" ".join(errors)}')
        raise UserDataError('; '.join(msgs))
    return form.cleaned_data


def validate_list(form_class, items, prefix):
    if not isinstance(items, list) or not items:
        raise UserDataError(f'{prefix}: expected a non-empty list')
    return [
        validate(form_class, item, f'{prefix}[{num}].')
        for num, item in enumerate(items)
    ]


def _int_list(value, name, minimum=None):
    if not isinstance(value, list) \
            or not all(isinstance(i, int) and not isinstance(i, bool)
                       for i in value):
        raise forms.ValidationError(f'{name} must be a list of integers')
    if minimum is not None and any(i < minimum for i in value):
        raise forms.ValidationError(f'{name} must be at least {minimum}')
    return value


class SyntheticChainForm(forms.Form):
    levels = forms.JSONField(
        help_text='strictly increasing state values, e.g. user counts',
    )
    rows = forms.JSONField(
        required=False,
        help_text='transition matrix rows, random if left out',
    )

    def clean_levels(self):
        levels = _int_list(self.cleaned_data['levels'], 'levels', minimum=0)
        if not levels:
            raise forms.ValidationError('need at least one level')
        if any(b <= a for a, b in zip(levels[:-1], levels[1:])):
            raise forms.ValidationError('levels must be strictly increasing')
        return levels

    def clean(self):
        data = super().clean()
        rows = data.get('rows')
        levels = data.get('levels')
        if rows is not None and levels is not None:
            if not isinstance(rows, list) or len(rows) != len(levels) \
                    or any(not isinstance(i, list) or len(i) != len(levels)
                           for i in rows):
                raise forms.ValidationError(
                    'rows must be a square matrix matching the levels'
                )
        return data


class SyntheticForm(forms.Form):
    users = forms.JSONField()
    mcs = forms.JSONField(required=False)
    heavy_tail = forms.BooleanField(
        required=False,
        help_text='make high user counts rare',
    )


class SliceForm(forms.Form):
    name = forms.CharField(max_length=64)
    series = forms.CharField(
        required=False,
        help_text='slot series CSV, relative to the scenario file',
    )
    synthetic = forms.JSONField(required=False)
    rate_kbps = forms.FloatField(required=False, min_value=1e-9)
    p_h = forms.FloatField(required=False)
    alpha = forms.FloatField(required=False)
    users_step = forms.IntegerField(required=False, min_value=1)
    mcs_step = forms.IntegerField(required=False, min_value=1)
    demand_step = forms.IntegerField(required=False, min_value=1)

    def clean_p_h(self):
        p_h = self.cleaned_data['p_h']
        if p_h is not None and not 0 < p_h <= 1:
            raise forms.ValidationError('must be in (0, 1]')
        return p_h

    def clean_alpha(self):
        alpha = self.cleaned_data['alpha']
        if alpha is not None and not 0 < alpha < 1:
            raise forms.ValidationError('must be in (0, 1)')
        return alpha

    def clean(self):
        data = super().clean()
        if bool(data.get('series')) == (data.get('synthetic') is not None):
            raise forms.ValidationError(
                'give exactly one of "series" and "synthetic"'
            )
        return data


class DetectorForm(forms.Form):
    alpha = forms.FloatField(required=False)
    n = forms.JSONField(
        required=False,
        help_text='sample size or list of sample sizes',
    )
    corrected_threshold = forms.NullBooleanField(required=False)

    def clean_alpha(self):
        alpha = self.cleaned_data['alpha']
        if alpha is not None and not 0 < alpha < 1:
            raise forms.ValidationError('must be in (0, 1)')
        return alpha

    def clean_n(self):
        n = self.cleaned_data['n']
        if n is None:
            return []
        if isinstance(n, int) and not isinstance(n, bool):
            n = [n]
        return _int_list(n, 'n', minimum=2)


class AnomalyForm(forms.Form):
    slice = forms.CharField(
        help_text='name of the misbehaving slice',
    )
    beta = forms.FloatField(required=False)
    remove_k = forms.IntegerField(required=False, min_value=0)
    t_s = forms.IntegerField(required=False, min_value=0)
    seed = forms.IntegerField(required=False, min_value=0)
    chain = forms.ChoiceField(choices=_choices(ANOMALY_CHAINS),
                              required=False)

    def clean_beta(self):
        beta = self.cleaned_data['beta']
        if beta is not None and not 0 <= beta < 1:
            raise forms.ValidationError('must be in [0, 1)')
        return beta

    def clean(self):
        data = super().clean()
        if data.get('beta') is not None and data.get('remove_k') is not None:
            raise forms.ValidationError('give at most one of beta and '
                                        'remove_k')
        return data


class SweepForm(forms.Form):
    beta = forms.JSONField(required=False)
    remove_k = forms.JSONField(required=False)
    n = forms.JSONField(required=False)

    def clean_beta(self):
        beta = self.cleaned_data['beta'] or []
        if not isinstance(beta, list) \
                or not all(isinstance(i, (int, float))
                           and not isinstance(i, bool) and 0 <= i < 1
                           for i in beta):
            raise forms.ValidationError('must be a list of numbers in [0, 1)')
        return beta

    def clean_remove_k(self):
        return _int_list(self.cleaned_data['remove_k'] or [], 'remove_k',
                         minimum=0)

    def clean_n(self):
        return _int_list(self.cleaned_data['n'] or [], 'n', minimum=2)


class ScenarioForm(forms.Form):
    name = forms.CharField(required=False)
    seed = forms.IntegerField(required=False, min_value=0)
    slices = forms.JSONField()
    trial_length = forms.IntegerField(required=False, min_value=2)
    regular_length = forms.IntegerField(required=False, min_value=1)
    schemes = forms.JSONField(required=False)
    detector = forms.JSONField(required=False)
    anomaly = forms.JSONField(required=False)
    sweep = forms.JSONField(required=False)
    chain_mode = forms.ChoiceField(choices=_choices(CHAIN_MODES),
                                   required=False)
    transform = forms.ChoiceField(choices=_choices(TRANSFORMS),
                                  required=False)
    estimator = forms.ChoiceField(choices=_choices(ESTIMATORS),
                                  required=False)
    residual = forms.ChoiceField(choices=_choices(RESIDUAL_MODES),
                                 required=False)
    models = forms.CharField(
        required=False,
        help_text='directory with the output of the trial command',
    )
    mcs_table = forms.CharField(required=False)
    mimo_factor = forms.FloatField(required=False, min_value=1e-9)

    def clean_schemes(self):
        schemes = self.cleaned_data['schemes']
        if schemes is None:
            return []
        if not isinstance(schemes, list) \
                or not all(isinstance(i, str) for i in schemes):
            raise forms.ValidationError('must be a list of scheme names')
        for i in schemes:
            try:
                # bare ShT is completed with the detector's sample sizes
                Scheme.parse(i, default_n=2)
            except UserDataError as e:
                raise forms.ValidationError(str(e))
        return schemes


class IngestSliceForm(forms.Form):
    name = forms.CharField(max_length=64)
    records = forms.CharField(help_text='decoded control records CSV')
    users = forms.CharField(
        required=False,
        help_text='optional per-second user counts CSV',
    )
    rate_kbps = forms.FloatField(required=False, min_value=1e-9)
    slot_seconds = forms.IntegerField(required=False, min_value=1)
    users_step = forms.IntegerField(required=False, min_value=1)
    mcs_step = forms.IntegerField(required=False, min_value=1)
    demand_step = forms.IntegerField(required=False, min_value=1)
    window_seconds = forms.IntegerField(required=False, min_value=1)
    max_prb = forms.IntegerField(required=False, min_value=1)


class IngestForm(forms.Form):
    slices = forms.JSONField()
    mcs_table = forms.CharField(required=False)
    mimo_factor = forms.FloatField(required=False, min_value=1e-9)


class TrialSliceForm(SliceForm):
    def clean(self):
        data = forms.Form.clean(self)
        if not data.get('series'):
            raise forms.ValidationError('"series" is required')
        return data


class TrialForm(forms.Form):
    slices = forms.JSONField()
    trial_length = forms.IntegerField(required=False, min_value=2)
    chain_mode = forms.ChoiceField(choices=_choices(CHAIN_MODES),
                                   required=False)
    transform = forms.ChoiceField(choices=_choices(TRANSFORMS),
                                  required=False)
    estimator = forms.ChoiceField(choices=_choices(ESTIMATORS),
                                  required=False)
    alpha = forms.FloatField(required=False)
    epsilon = forms.FloatField(required=False)
    delta = forms.FloatField(required=False)
    h_z = forms.FloatField(required=False)
    lam = forms.FloatField(required=False)
