"""Back-action, weak values and discrete meter readout for small quantum systems."""

from .backaction import (
    BackActionContext,
    action_and_probability,
    action_curvature,
    action_slope,
    hj_residual,
    probability,
    transition_amplitude,
    weak_value,
    weak_values,
)
from .config import get_settings, set_settings, using
from .core import (
    Observable,
    StateVector,
    pauli,
    random_hermitian,
    random_state,
    tensor_product,
    unitary_from_generator,
)
from .errors import *  # noqa: F401,F403
from .meter import (
    MeterModel,
    backaction_decomposition,
    design_gaussian_meter,
    fourier_readout_basis,
    gaussian_meter_state,
    interaction_unitary,
    readout_distribution,
)
from .scenarios import FreeParticleScenario, SternGerlachScenario
from .uncertainty import minimal_fluctuation, tradeoff_report

__version__ = "0.1.0"
