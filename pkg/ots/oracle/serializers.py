from rest_framework import serializers


class OracleResultSerializer(serializers.Serializer):
    cost = serializers.FloatField()
    n_feasible = serializers.IntegerField()
    n_topologies = serializers.IntegerField()
    x_opt = serializers.SerializerMethodField()
    flows = serializers.SerializerMethodField()

    def get_x_opt(self, result):
        return {str(line_id): status for line_id, status in sorted(result.x_opt.items())}

    def get_flows(self, result):
        return {str(line_id): value for line_id, value in sorted(result.flows.items())}


class BoundsViolationSerializer(serializers.Serializer):
    line = serializers.IntegerField(allow_null=True)
    reason = serializers.CharField()
    oracle_cost = serializers.FloatField()
    model_cost = serializers.FloatField(allow_null=True)
    x = serializers.SerializerMethodField()

    def get_x(self, violation):
        return {str(line_id): status for line_id, status in sorted(violation.x.items())}
