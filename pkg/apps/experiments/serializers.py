"""
Experiment configuration serializers

ExperimentConfig JSON:
    {
      "instance": {"n_rows", "n_columns", "n_blocks", "dof", "noise_sigma", "seed",
                   "matrix_csv", "vector_csv"},
      "sketch": "block_lvg" | "gaussian" | "block_srht" | "none",
      "network": {"servers", "q", "deadline", "runtime", "nu"},
      "policy": {"kind", "xi", "scale", "eta"},
      "iterations", "trials", "master_seed", "output_dir",
      "compare": {"sketches", "scales", "include_optimal"}
    }
"""

import math

from django.conf import settings
from rest_framework import serializers

from apps.core.exceptions import RuntimeModelError
from apps.solver.sketched import SKETCH_KINDS
from apps.solver.steps import POLICY_KINDS
from apps.stragglers.runtime import parse_runtime_spec


def _simulation(key):
    return settings.SIMULATION_CONFIG[key]


def _solver(key):
    return settings.SOLVER_CONFIG[key]


class InstanceSerializer(serializers.Serializer):
    """Synthetic t-distributed instance, or A and b read from headerless CSV files"""
    n_rows = serializers.IntegerField(min_value=2, default=lambda: _simulation('n_rows'))
    n_columns = serializers.IntegerField(min_value=1, default=lambda: _simulation('n_columns'))
    n_blocks = serializers.IntegerField(min_value=1, default=lambda: _simulation('n_blocks'))
    dof = serializers.FloatField(default=lambda: _simulation('dof'))
    noise_sigma = serializers.FloatField(min_value=0.0, default=lambda: _simulation('noise_sigma'))
    seed = serializers.IntegerField(min_value=0, default=lambda: _simulation('instance_seed'))
    matrix_csv = serializers.CharField(required=False, allow_null=True, default=None)
    vector_csv = serializers.CharField(required=False, allow_null=True, default=None)

    def validate_dof(self, value):
        if value <= 0:
            raise serializers.ValidationError('degrees of freedom must be positive')
        return value

    def validate(self, attrs):
        if (attrs['matrix_csv'] is None) != (attrs['vector_csv'] is None):
            raise serializers.ValidationError('matrix_csv and vector_csv must be given together')
        if attrs['matrix_csv'] is None:
            if attrs['n_blocks'] > attrs['n_rows']:
                raise serializers.ValidationError({'n_blocks': 'cannot exceed n_rows'})
            if attrs['n_columns'] >= attrs['n_rows']:
                raise serializers.ValidationError({'n_columns': 'an overdetermined system needs n_columns < n_rows'})
        return attrs


class NetworkSerializer(serializers.Serializer):
    """Servers, responses per round (or a deadline), runtime model and replication scale"""
    servers = serializers.IntegerField(min_value=1, default=lambda: _simulation('servers'))
    q = serializers.IntegerField(min_value=1, default=lambda: _simulation('q'))
    deadline = serializers.FloatField(required=False, allow_null=True, default=None)
    runtime = serializers.CharField(default=lambda: _simulation('runtime'))
    nu = serializers.FloatField(required=False, allow_null=True, default=None)

    def validate_deadline(self, value):
        if value is not None and value <= 0:
            raise serializers.ValidationError('deadline must be positive')
        return value

    def validate_nu(self, value):
        if value is not None and value <= 0:
            raise serializers.ValidationError('nu must be positive')
        return value

    def validate_runtime(self, value):
        try:
            parse_runtime_spec(value)
        except (RuntimeModelError, OSError) as exc:
            raise serializers.ValidationError(str(exc))
        return value

    def validate(self, attrs):
        if attrs['q'] > attrs['servers']:
            raise serializers.ValidationError({'q': f"q={attrs['q']} exceeds servers={attrs['servers']}"})
        return attrs


class PolicySerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=POLICY_KINDS, default=lambda: _solver('policy'))
    xi = serializers.FloatField(required=False, allow_null=True, default=None)
    scale = serializers.FloatField(default=lambda: _solver('step_scale'))
    eta = serializers.FloatField(required=False, allow_null=True, default=None)

    def validate(self, attrs):
        """Each policy kind needs its own positive constant"""
        if attrs['kind'] == 'fixed' and not (attrs['xi'] and attrs['xi'] > 0):
            raise serializers.ValidationError({'xi': 'a fixed step needs xi > 0'})
        if attrs['kind'] == 'conservative' and attrs['scale'] <= 0:
            raise serializers.ValidationError({'scale': 'step scale must be positive'})
        if attrs['kind'] == 'diminishing' and not (attrs['eta'] and attrs['eta'] > 0):
            raise serializers.ValidationError({'eta': 'a diminishing step needs eta > 0'})
        return attrs


class CompareSerializer(serializers.Serializer):
    sketches = serializers.ListField(child=serializers.ChoiceField(choices=SKETCH_KINDS), allow_empty=False,
                                     default=lambda: list(_solver('compare_sketches')))
    scales = serializers.ListField(child=serializers.FloatField(min_value=0.0), allow_empty=False,
                                   default=lambda: list(_solver('compare_scales')))
    include_optimal = serializers.BooleanField(default=False)

    def validate_scales(self, value):
        if any(scale <= 0 for scale in value):
            raise serializers.ValidationError('step scales must be positive')
        return value


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Full experiment configuration. Cross-field checks: q * tau > d for the
    sketch to embed, servers >= K so every block is stored, q <= servers.
    """
    instance = InstanceSerializer(default=dict)
    sketch = serializers.ChoiceField(choices=SKETCH_KINDS, default='block_lvg')
    network = NetworkSerializer(default=dict)
    policy = PolicySerializer(default=dict)
    iterations = serializers.IntegerField(min_value=0, default=lambda: _solver('iterations'))
    trials = serializers.IntegerField(min_value=1, default=lambda: _solver('trials'))
    master_seed = serializers.IntegerField(min_value=0, default=lambda: _simulation('master_seed'))
    output_dir = serializers.CharField(default=lambda: str(settings.RESULTS_DIR))
    compare = CompareSerializer(default=dict)

    def to_internal_value(self, data):
        # nested defaults ({}) still need their own field defaults filled in
        data = dict(data)
        for key in ('instance', 'network', 'policy', 'compare'):
            if data.get(key) is None:
                data[key] = {}
        return super().to_internal_value(data)

    def validate(self, attrs):
        instance, network = attrs['instance'], attrs['network']
        if instance['matrix_csv'] is None:
            K = instance['n_blocks']
            tau = math.ceil(instance['n_rows'] / K)
            if network['q'] * tau <= instance['n_columns']:
                raise serializers.ValidationError(
                    {'network': f"q*tau={network['q'] * tau} must exceed d={instance['n_columns']}"})
            if network['servers'] < K:
                raise serializers.ValidationError(
                    {'network': f"servers={network['servers']} cannot store K={K} blocks"})
        return attrs
