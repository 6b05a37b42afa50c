from django import forms
from django.conf import settings

from .models import ConvergenceRun
from .run_services import RunConfig


class RunConfigForm(forms.Form):
    element = forms.ChoiceField(choices=ConvergenceRun.ELEMENT_CHOICES, required=False)
    mesh_type = forms.ChoiceField(choices=ConvergenceRun.MESH_CHOICES, required=False)
    sizes = forms.CharField(max_length=200, required=False)
    nu = forms.FloatField(required=False)
    D = forms.FloatField(required=False)
    seed = forms.IntegerField(required=False)
    lloyd_iters = forms.IntegerField(required=False)
    out = forms.CharField(max_length=500, required=False)
    deterministic = forms.BooleanField(required=False)

    def __init__(self, *args, min_sizes=0, **kwargs):
        super().__init__(*args, **kwargs)
        self.min_sizes = min_sizes

    def clean_element(self):
        return self.cleaned_data.get('element') or 'vem31'

    def clean_mesh_type(self):
        return self.cleaned_data.get('mesh_type') or 'triangles'

    def clean_sizes(self):
        raw = self.cleaned_data.get('sizes') or ''
        try:
            sizes = [int(part) for part in raw.split(',') if part.strip()]
        except ValueError:
            raise forms.ValidationError(f"sizes must be a comma separated list of integers, got {raw!r}")
        if any(size < 1 for size in sizes):
            raise forms.ValidationError('sizes must be positive integers')
        if self.min_sizes and len(sizes) < self.min_sizes:
            raise forms.ValidationError(f"need ≥ {self.min_sizes} meshes")
        return tuple(sizes)

    def clean_nu(self):
        nu = self.cleaned_data.get('nu')
        if nu is None:
            return settings.PLATE_LAB['DEFAULT_NU']
        if not 0.0 <= nu < 0.5:
            raise forms.ValidationError('Poisson ratio must lie in [0, 0.5)')
        return nu

    def clean_D(self):
        D = self.cleaned_data.get('D')
        if D is None:
            return settings.PLATE_LAB['DEFAULT_D']
        if D <= 0.0:
            raise forms.ValidationError('bending rigidity must be positive')
        return D

    def clean_seed(self):
        seed = self.cleaned_data.get('seed')
        if seed is None:
            return 0
        if seed < 0:
            raise forms.ValidationError('seed must be a non-negative integer')
        return seed

    def clean_lloyd_iters(self):
        lloyd_iters = self.cleaned_data.get('lloyd_iters')
        if lloyd_iters is None:
            return 0
        if lloyd_iters < 0:
            raise forms.ValidationError('Lloyd iterations must be non-negative')
        return lloyd_iters

    def to_config(self):
        data = self.cleaned_data
        return RunConfig(
            element=data['element'],
            mesh_type=data['mesh_type'],
            sizes=data['sizes'],
            nu=data['nu'],
            D=data['D'],
            seed=data['seed'],
            lloyd_iters=data['lloyd_iters'],
            out=data.get('out') or None,
            deterministic=bool(data.get('deterministic')),
        )

    def error_text(self):
        return '; '.join(
            f"{name}: {' '.join(messages)}" for name, messages in self.errors.items()
        )
