# app/schemas/__init__.py
from .cochains import CocycleSpec, HwyCochainSpec, TableCochainSpec, cocycle_adapter
from .forms import QuadraticFormSpec
from .reports import EXIT_CODES, CategoryReport, CommandReport, CommandRequest

__all__ = [
    'CategoryReport',
    'CocycleSpec',
    'CommandReport',
    'CommandRequest',
    'EXIT_CODES',
    'HwyCochainSpec',
    'QuadraticFormSpec',
    'TableCochainSpec',
    'cocycle_adapter',
]
