from core.utils.netio import deserialize, read_json, write_json
from ots.tighten.config import TightenReport
from ots.tighten.serializers import TightenReportSerializer


def save_report(report: TightenReport, path) -> None:
    write_json(path, TightenReportSerializer(report).data)


def load_report(path) -> TightenReport:
    """Load a saved tightening report.

    Raises:
        ParseError: Missing file, bad JSON or wrong fields.
    """
    return deserialize(TightenReportSerializer(data=read_json(path)), str(path))
