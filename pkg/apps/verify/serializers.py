"""
Serializers for verification reports
"""

from rest_framework import serializers


class CheckReportSerializer(serializers.Serializer):
    """Report as {"check", "params", "measured", "bound", "pass"}"""
    check = serializers.CharField()
    params = serializers.DictField()
    measured = serializers.DictField()
    bound = serializers.DictField()
    passed = serializers.BooleanField()

    def to_representation(self, instance):
        data = super().to_representation(instance)
        data['pass'] = data.pop('passed')
        return data
