"""Exact weak-measurement pointer readings for a qubit with a continuous probe."""
from .model import (
    ObservableA,
    SelectionPair,
    ValidationError,
    WeakValue,
    first_order_shifts,
    make_selection,
    selection_from_beta_y,
    weak_value,
)
from .probe import (
    P,
    Q,
    GaussianProbe,
    GridProbe,
    MultiplicationBy,
    OverlapSet,
    derivative_integrals,
    gaussian_probe,
    grid_probe,
    load_probe_csv,
    overlaps,
    shift,
)
from .exact import (
    MeasurementResult,
    denominator_discriminant,
    expectation_closed_form,
    expectation_orthogonal,
    oracle_expectation,
)

__version__ = "0.1.0"
