"""
Report formatting: pretty text, JSON and CSV
"""
import csv
import io
import json

from config import SCHEMA_VERSION, setup_logging
from core.coeffs import as_rational
from core.errors import NonConstantError
from core.reports import Report
from core.utils import fraction_str, qscalar_json
from i18n.translations import t

logger = setup_logging()

# run plumbing that never changes a result
VOLATILE_CONFIG = ('threads', 'out', 'output', 'lang')
MAX_PRETTY_FAILURES = 10
CSV_COLUMNS = ('record', 'name', 'parameters', 'status', 'residual_nonzero', 'checked_dim',
               'x_exponents', 'q_exponent', 'coefficient')


def _parameters(params: dict) -> str:
    if not params:
        return ''
    return '(' + ', '.join(f"{k}={v}" for k, v in params.items()) + ')'


def _report_fields(report) -> dict:
    """Both report kinds in one shape"""
    if isinstance(report, Report):
        return {
            'name': report.check,
            'parameters': {'N': report.N},
            'residual': report.residual_nonzero_count,
            'checked': report.details.get('entries_checked', 0),
            'failures': [],
        }
    return {
        'name': report.relation,
        'parameters': report.parameters,
        'residual': report.residual_nonzero,
        'checked': report.checked_dim,
        'failures': report.failures,
    }


def _coefficient_text(c) -> str:
    try:
        return fraction_str(as_rational(c))
    except NonConstantError:
        return json.dumps(qscalar_json(c), sort_keys=True)


def format_series(series) -> str:
    """1 + 6q + 27q^2 style, exponents relative to the offset"""
    parts = []
    for exponent, coeff in series.sorted_terms():
        text = _coefficient_text(coeff)
        if exponent == 0:
            parts.append(text)
        elif text == '1':
            parts.append(f"q^{fraction_str(exponent)}")
        else:
            parts.append(f"{text}q^{fraction_str(exponent)}")
    return ' + '.join(parts).replace('+ -', '- ') or '0'


# ======================================================
# 🖨️ PRETTY
# ======================================================

def format_report(report) -> str:
    fields = _report_fields(report)
    params = _parameters(fields['parameters'])
    if report.passed:
        lines = [t('report.ok', name=fields['name'], parameters=params, checked=fields['checked'])]
    else:
        lines = [t('report.failed', name=fields['name'], parameters=params, residual=fields['residual'],
                   checked=fields['checked'])]
        shown = fields['failures'][:MAX_PRETTY_FAILURES]
        lines += [t('report.failure_line', failure=f) for f in shown]
        if fields['residual'] > len(shown):
            lines.append(t('report.more_failures', count=fields['residual'] - len(shown)))
    for key in ('printed_text_matches', 'pattern_matches', 'discarded_phase', 'covered'):
        if key in report.details:
            lines.append(t('report.note', key=key, value=report.details[key]))
    return '\n'.join(lines)


def format_character(series) -> str:
    module = series.details.get('module', {})
    label = f"{module.get('family', '?')}(alpha={module.get('alpha')}, beta={module.get('beta')})"
    kind = t('char.supercharacter') if series.graded else t('char.character')
    lines = [t('char.header', selector=series.details.get('selector', 'Full'), kind=kind, module=label,
               order=series.max_q_order, offset=fraction_str(series.global_q_offset))]
    if series.graded:
        lines.append(t('char.phase', phase=fraction_str(series.global_phase)))
    if not series.terms:
        lines.append(t('char.empty'))
    for key, sector in sorted(series.terms.items()):
        exponents = '(' + ', '.join(fraction_str(x) for x in key) + ')'
        lines.append(t('char.sector', exponents=exponents, series=format_series(sector)))
    return '\n'.join(lines)


def format_pretty(result) -> str:
    lines = [t('run.header', command=result.command), '']
    for series in result.characters:
        lines += [format_character(series), '']
    lines += [format_report(r) for r in result.reports]
    failed = sum(1 for r in result.reports if not r.passed)
    total = len(result.reports)
    lines.append('')
    if failed:
        lines.append(t('run.summary_failed', failed=failed, total=total))
    else:
        lines.append(t('run.summary_ok', passed=total, total=total))
    return '\n'.join(lines)


# ======================================================
# 📦 MACHINE-READABLE
# ======================================================

def format_json(result, config=None) -> str:
    """Sorted keys and no timings, so equal configs give byte-identical documents"""
    document = {
        'schema_version': SCHEMA_VERSION,
        'command': result.command,
        'status': 'ok' if result.passed else 'failed',
        'reports': [r.as_dict(timing=False) for r in result.reports],
        'characters': [s.as_dict() for s in result.characters],
    }
    if config is not None:
        document['config'] = {k: v for k, v in config.as_dict().items() if k not in VOLATILE_CONFIG}
    return json.dumps(document, sort_keys=True, indent=2, default=str)


def format_csv(result) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for report in result.reports:
        fields = _report_fields(report)
        writer.writerow(['report', fields['name'], json.dumps(fields['parameters'], sort_keys=True, default=str),
                         'ok' if report.passed else 'failed', fields['residual'], fields['checked'], '', '', ''])
    for series in result.characters:
        name = series.details.get('selector', 'Full')
        for key, sector in sorted(series.terms.items()):
            exponents = ' '.join(fraction_str(x) for x in key)
            for exponent, coeff in sector.sorted_terms():
                writer.writerow(['character', name, json.dumps(series.details.get('module', {}), sort_keys=True),
                                 '', '', '', exponents, fraction_str(series.global_q_offset + exponent),
                                 _coefficient_text(coeff)])
    return buffer.getvalue()


def render(result, fmt: str, config=None) -> str:
    if fmt == 'json':
        return format_json(result, config)
    if fmt == 'csv':
        return format_csv(result)
    return format_pretty(result)
