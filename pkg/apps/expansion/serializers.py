"""
Serializers for replication plans (plan.json)
"""

import numpy as np
from rest_framework import serializers

from apps.expansion.replication import ReplicationPlan


class ReplicationPlanSerializer(serializers.Serializer):
    """
    Replication plan as {"pi", "r", "m", "beta", "distortion"} plus the
    induced distribution and design metadata
    """
    pi = serializers.ListField(child=serializers.FloatField(min_value=0.0), source='pi.p', allow_empty=False)
    r = serializers.ListField(child=serializers.IntegerField(min_value=1), allow_empty=False)
    m = serializers.IntegerField(min_value=1)
    beta = serializers.FloatField(read_only=True)
    distortion = serializers.FloatField(read_only=True)
    additive_eps = serializers.FloatField(read_only=True)
    induced = serializers.ListField(child=serializers.FloatField(), source='induced.p', read_only=True)
    method = serializers.CharField(required=False, default='given')

    def validate(self, attrs):
        """Counts must cover every block and use exactly m servers"""
        pi = attrs['pi']['p']
        r = attrs['r']
        if len(pi) != len(r):
            raise serializers.ValidationError({'r': f'{len(r)} counts for {len(pi)} blocks'})
        if sum(r) != attrs['m']:
            raise serializers.ValidationError({'m': f'counts sum to {sum(r)}, not m={attrs["m"]}'})
        if abs(sum(pi) - 1.0) > 1e-12:
            raise serializers.ValidationError({'pi': 'probabilities must sum to 1'})
        return attrs

    def create(self, validated_data):
        return ReplicationPlan.from_counts(
            np.asarray(validated_data['pi']['p'], dtype=np.float64),
            validated_data['r'],
            method=validated_data.get('method', 'given'),
        )
