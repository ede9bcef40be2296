"""
Controllers package initialization (one controller per pipeline stage)
"""

from .ingest_controller import cmd_ingest
from .practices_controller import cmd_practices
from .fit_controller import cmd_fit
from .interpret_controller import cmd_interpret
from .report_controller import cmd_report
from .simulate_controller import cmd_simulate

__all__ = [
    'cmd_ingest',
    'cmd_practices',
    'cmd_fit',
    'cmd_interpret',
    'cmd_report',
    'cmd_simulate',
]
