from django import forms

from synthdata.services.distributions import parse_family
from trex.services.occurrences import DEFLATION_RULES
from trex_toolkit.exceptions import ParameterError


class ListField(forms.Field):
    """Comma-separated text or a list, converted item by item."""

    def __init__(self, item_type=float, min_items=1, max_items=None, **kwargs):
        self.item_type = item_type
        self.min_items = min_items
        self.max_items = max_items
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return None
        if isinstance(value, str):
            value = [part for part in (p.strip() for p in value.split(',')) if part]
        try:
            items = [self.item_type(v) for v in value]
        except (TypeError, ValueError):
            raise forms.ValidationError(f"Expected a comma-separated list of {self.item_type.__name__} values")
        if len(items) < self.min_items:
            raise forms.ValidationError(f"Expected at least {self.min_items} values")
        if self.max_items is not None and len(items) > self.max_items:
            raise forms.ValidationError(f"Expected at most {self.max_items} values")
        return items


class RunConfigForm(forms.Form):
    seed = forms.IntegerField(required=False, min_value=0)

    K = forms.IntegerField(min_value=1)
    L = forms.IntegerField(required=False, min_value=1)
    T_max = forms.IntegerField(min_value=1)
    v_grid = ListField()
    alpha = forms.FloatField(required=False)
    deflation = forms.ChoiceField(choices=[(rule, rule) for rule in DEFLATION_RULES])

    n = forms.IntegerField(min_value=2)
    p = forms.IntegerField(min_value=1)
    s = forms.IntegerField(min_value=0)
    snr_values = ListField()
    beta_magnitude_range = ListField(min_items=2, max_items=2)
    count = forms.IntegerField(min_value=1)
    families = ListField(item_type=str, required=False)

    epochs = forms.IntegerField(min_value=0)
    lr = forms.FloatField()
    batch_size = forms.IntegerField(min_value=1)
    loss_weight = forms.FloatField()
    hidden_dims = ListField(item_type=int)
    p_max = forms.IntegerField(required=False, min_value=1)

    threads = forms.IntegerField(min_value=1)

    def clean_v_grid(self):
        v_grid = self.cleaned_data['v_grid']
        if any(not 0.5 <= v < 1.0 for v in v_grid):
            raise forms.ValidationError("Voting thresholds must lie in [0.5, 1)")
        if any(b <= a for a, b in zip(v_grid, v_grid[1:])):
            raise forms.ValidationError("Voting thresholds must be strictly increasing")
        return v_grid

    def clean_alpha(self):
        alpha = self.cleaned_data.get('alpha')
        if alpha is not None and not 0.0 < alpha <= 1.0:
            raise forms.ValidationError("alpha must lie in (0, 1]")
        return alpha

    def clean_snr_values(self):
        snr_values = self.cleaned_data['snr_values']
        if any(snr <= 0 for snr in snr_values):
            raise forms.ValidationError("SNR values must be > 0")
        return snr_values

    def clean_beta_magnitude_range(self):
        lo, hi = self.cleaned_data['beta_magnitude_range']
        if not 0 < lo <= hi:
            raise forms.ValidationError("Coefficient magnitudes need 0 < low <= high")
        return [lo, hi]

    def clean_families(self):
        families = self.cleaned_data.get('families')
        if families is None:
            return None
        try:
            return [parse_family(name) for name in families]
        except ParameterError as e:
            raise forms.ValidationError(str(e))

    def clean_lr(self):
        lr = self.cleaned_data['lr']
        if lr <= 0:
            raise forms.ValidationError("Learning rate must be > 0")
        return lr

    def clean_loss_weight(self):
        w = self.cleaned_data['loss_weight']
        if w <= 1:
            raise forms.ValidationError("Loss weight must be > 1")
        return w

    def clean_hidden_dims(self):
        dims = self.cleaned_data['hidden_dims']
        if any(d < 1 for d in dims):
            raise forms.ValidationError("Hidden layer widths must be >= 1")
        return dims

    def clean(self):
        cleaned = super().clean()
        p, s = cleaned.get('p'), cleaned.get('s')
        if p is not None and s is not None and s > p:
            self.add_error('s', f"Sparsity {s} exceeds p={p}")
        T_max, L = cleaned.get('T_max'), cleaned.get('L')
        if T_max is not None and L is not None and T_max > L:
            self.add_error('T_max', f"T_max={T_max} exceeds the number of dummies L={L}")
        return cleaned


def validate_run_config(values: dict) -> dict:
    """Typed, validated run configuration; any problem is a ParameterError."""
    form = RunConfigForm(data=values)
    unknown = sorted(set(values) - set(form.fields))
    if unknown:
        raise ParameterError(f"Unknown configuration keys: {', '.join(unknown)}")
    if not form.is_valid():
        problems = '; '.join(
            f"{field}: {' '.join(messages)}" for field, messages in form.errors.items()
        )
        raise ParameterError(f"Invalid configuration: {problems}")
    return form.cleaned_data
