"""Jinja2 templates for the Markdown experiment report."""

from jinja2 import BaseLoader, Environment

from latclt.report.formatter import format_flag

# Main report template
MAIN_TEMPLATE = """# latclt report: {{ kind }}

- version: {{ version }}
- seed: {{ seed }}
- trials: {{ trials }}

## Configuration

```json
{{ config_json }}
```
{% if statistics_table %}
## Normalized discrepancy by T

{{ statistics_table }}
{% endif %}
{% if flags %}
## Checks

{% for name, value in flags %}- {{ name }}: {{ value | format_flag }}
{% endfor %}{% endif %}
{% if table %}
## {{ table_title }}

{{ table }}
{% endif %}
{% if summary_json %}
## Summary

```json
{{ summary_json }}
```
{% endif %}
{% if notes %}
## Notes

{% for note in notes %}- {{ note }}
{% endfor %}{% endif %}
"""


def get_template_environment() -> Environment:
    """Get Jinja2 environment with custom filters.

    Returns:
        Configured Jinja2 Environment instance.
    """
    env = Environment(loader=BaseLoader(), keep_trailing_newline=True)

    env.filters["format_flag"] = format_flag

    return env


def render_main_template(**kwargs: object) -> str:
    """Render the main report template.

    Args:
        **kwargs: Template variables including:
            - kind, version, seed, trials: Header fields
            - config_json: Configuration echo
            - statistics_table: Per-T statistics table
            - flags: Sequence of (name, value) pairs
            - table_title, table: Probe table section
            - summary_json: Experiment-specific results
            - notes: Remarks

    Returns:
        Rendered report string.
    """
    env = get_template_environment()
    template = env.from_string(MAIN_TEMPLATE)
    return template.render(**kwargs)
