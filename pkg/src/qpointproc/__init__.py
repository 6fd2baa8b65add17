"""q-deformed product densities for stochastic point processes."""

from .qcalc import (
    Backend,
    ConvergenceError,
    PowerSeries,
    QContext,
    QDomainError,
    q_binomial,
    q_derivative,
    q_exp,
    q_exp_dual,
    q_factorial,
    q_falling_factorial,
    q_number,
    q_shift_identity,
)
from .qcomb import (
    StirlingTable,
    build_stirling_table,
    dobinsky_generating,
    q_bell,
    q_bell_dobinsky,
    q_stirling,
    verify_falling_expansion,
)
from .qdist import MomentReport, QPoissonModel
from .qpoly import QPoly

__version__ = "0.1.0"
