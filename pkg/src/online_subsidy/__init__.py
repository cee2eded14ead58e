"""Online fair division of indivisible goods with envy-eliminating subsidies.

Items arrive one at a time and are assigned irrevocably.  The package keeps
track of whether the partial allocation is locally efficient (equivalently,
envy-freeable) and of the minimum total subsidy that removes all envy.

All values are exact :class:`fractions.Fraction` numbers.  Agents and items
are 0-based: agent ``0`` is the first agent, item ``j`` is the ``j``-th
arrival.
"""

from online_subsidy.model import (
    Allocation,
    CapabilityError,
    InputError,
    OnlineState,
    PositiveCycleError,
    Step,
    SubsidyReport,
    Transcript,
)
from online_subsidy.rational import format_rational, parse_rational

__all__ = [
    "Allocation",
    "CapabilityError",
    "InputError",
    "OnlineState",
    "PositiveCycleError",
    "Step",
    "SubsidyReport",
    "Transcript",
    "format_rational",
    "parse_rational",
]

__version__ = "0.1.0"
