"""Dense state-vector simulation of n-qudit teleportation over Bell-pair and genuinely entangled channels."""

from .channels import (
    ChannelSpec,
    GlobalUnitary,
    build_channel,
    local_product_unitary,
    random_global_unitary,
    yeo_chua_upsilon,
)
from .measure import MeasurementResult, Outcome, measure_xi, outcome_distribution, project_outcome, sample_product_phi
from .protocols import Transcript, corrections, fidelity, run, run_dn, run_dpn, run_dppn
from .session import ClassicalMessage, decode_message, encode_message, run_session
from .statevec import (
    LocalOperator,
    StateVector,
    apply_local,
    inner,
    make_state,
    random_state,
    reduced_density,
    tensor,
)
from .weyl import BellLabel, gbs_state, mod_add, phi_basis, weyl_u, weyl_v

__version__ = "0.1.0"
