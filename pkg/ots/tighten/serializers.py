import math

from rest_framework import serializers

from ots.formulation.bounds import Bounds, CostCap, LineBounds
from ots.tighten.config import Action, SubproblemLog, TightenReport


class FiniteFloatField(serializers.FloatField):
    """Float that writes infinite and missing values as null."""

    def __init__(self, **kwargs):
        kwargs.setdefault('allow_null', True)
        kwargs.setdefault('required', False)
        kwargs.setdefault('default', None)
        super().__init__(**kwargs)

    def to_representation(self, value):
        if value is None or not math.isfinite(value):
            return None
        return super().to_representation(value)


class LineBoundsSerializer(serializers.Serializer):
    line = serializers.IntegerField()
    f_lo = serializers.FloatField()
    f_hi = serializers.FloatField()
    m_lo = serializers.FloatField()
    m_hi = serializers.FloatField()


class BoundsField(serializers.Field):
    """Bounds as a list of per-line records sorted by line id."""

    def to_representation(self, bounds: Bounds):
        return [{'line': line_id, **vars(bounds[line_id])} for line_id in bounds]

    def to_internal_value(self, data):
        serializer = LineBoundsSerializer(data=data, many=True)
        serializer.is_valid(raise_exception=True)
        lines = {}
        for row in serializer.validated_data:
            line_id = row.pop('line')
            if line_id in lines:
                raise serializers.ValidationError(f'duplicate bounds for line {line_id}.')
            lines[line_id] = LineBounds(**row)
        return Bounds(lines)


class FixedLineSerializer(serializers.Serializer):
    line = serializers.IntegerField()
    status = serializers.ChoiceField(choices=[0, 1])


class SubproblemLogSerializer(serializers.Serializer):
    line = serializers.IntegerField()
    target = serializers.ChoiceField(choices=['flow', 'dummy'])
    sense = serializers.ChoiceField(choices=['min', 'max'])
    status = serializers.CharField(allow_null=True)
    objective = FiniteFloatField()
    dual_bound = FiniteFloatField()
    runtime = serializers.FloatField(min_value=0)
    action = serializers.ChoiceField(choices=[action.value for action in Action])

    def to_representation(self, instance):
        data = super().to_representation(instance)
        data['action'] = Action(data['action']).value
        return data


class TightenReportSerializer(serializers.Serializer):
    """JSON form of a tightening report.

    ``cap_source`` is ``incumbent``, ``fallback`` or null when no cap was used.
    """
    network = serializers.CharField()
    instance = serializers.IntegerField()
    approach = serializers.CharField()
    cap = FiniteFloatField(source='cap.cap')
    cap_source = serializers.CharField(source='cap.source', allow_null=True, required=False, default=None)
    t_bound = serializers.FloatField(min_value=0)
    t_heuristic = serializers.FloatField(min_value=0)
    fixed_lines = serializers.SerializerMethodField()
    bounds0 = BoundsField()
    bounds = BoundsField()
    per_line_log = SubproblemLogSerializer(many=True)

    def get_fixed_lines(self, report: TightenReport):
        return [{'line': line_id, 'status': status} for line_id, status in sorted(report.fixed_lines.items())]

    def to_internal_value(self, data):
        validated = super().to_internal_value(data)
        fixed = FixedLineSerializer(data=data.get('fixed_lines', []), many=True)
        fixed.is_valid(raise_exception=True)
        validated['fixed_lines'] = {row['line']: row['status'] for row in fixed.validated_data}
        return validated

    def create(self, validated_data):
        cap = validated_data.pop('cap')
        logs = [SubproblemLog(**{**row, 'action': Action(row['action'])}) for row in validated_data.pop('per_line_log')]
        return TightenReport(cap=CostCap(cap['cap'], cap['source']), per_line_log=logs, **validated_data)


class SolutionSerializer(serializers.Serializer):
    status = serializers.CharField()
    cost = FiniteFloatField()
    dual_bound = FiniteFloatField()
    gap_pct = FiniteFloatField(source='gap')
    t_opt = serializers.FloatField()
    x = serializers.SerializerMethodField()
    flows = serializers.SerializerMethodField()
    dispatch = serializers.SerializerMethodField()

    def get_x(self, solution):
        return {str(line_id): status for line_id, status in sorted(solution.x.items())}

    def get_flows(self, solution):
        return {str(line_id): value for line_id, value in sorted(solution.flows.items())}

    def get_dispatch(self, solution):
        return {str(bus_id): value for bus_id, value in sorted(solution.dispatch.items())}
