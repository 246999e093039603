from rest_framework import serializers

from core.models import Bus, Instance, Line, Network


class BusSerializer(serializers.Serializer):
    id = serializers.IntegerField()
    cost = serializers.FloatField()
    p_min = serializers.FloatField()
    p_max = serializers.FloatField()
    d_base = serializers.FloatField()


class LineSerializer(serializers.Serializer):
    """Line record of the network file.

    ``from`` is a Python keyword, so the endpoint fields are declared under
    their attribute names and renamed to the file keys in ``get_fields``.
    """
    id = serializers.IntegerField()
    from_bus = serializers.IntegerField(source='from_bus')
    to_bus = serializers.IntegerField(source='to_bus')
    b = serializers.FloatField(source='susceptance')
    f_min = serializers.FloatField()
    f_max = serializers.FloatField()

    def get_fields(self):
        fields = super().get_fields()
        fields['from'] = fields.pop('from_bus')
        fields['to'] = fields.pop('to_bus')
        return fields


class NetworkSerializer(serializers.Serializer):
    name = serializers.CharField()
    buses = BusSerializer(many=True, allow_empty=False)
    lines = LineSerializer(many=True)

    def create(self, validated_data):
        """Build the domain object. Domain invariants are enforced by the constructors."""
        return Network(
            name=validated_data['name'],
            buses=tuple(Bus(**bus) for bus in validated_data['buses']),
            lines=tuple(Line(**line) for line in validated_data['lines']),
        )


class InstanceSerializer(serializers.Serializer):
    network = serializers.CharField(source='network_name')
    seed = serializers.IntegerField(allow_null=True, required=False, default=None)
    index = serializers.IntegerField(min_value=0)
    demand = serializers.ListField(child=serializers.FloatField(), allow_empty=False)

    def create(self, validated_data):
        return Instance(**validated_data)
