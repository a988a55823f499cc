"""netent: quantifying genuine network multiparty entanglement.

Library + CLI for geometric distances to unitary quantum networks
(Gilbert algorithm), genuine multiparty negativity (witness SDP on an
in-house splitting conic solver), inflation certification, and exact
transverse-field Ising reduced density matrices.
"""

from .qcore import (
    LocalDims,
    PureState,
    DensityMatrix,
    PartySplit,
    qubit_split,
    tensor,
    partial_trace,
    partial_transpose,
    permute_factors,
    negativity,
    log_negativity,
    min_bipartite_negativity,
    canonical_state,
    maximally_mixed,
    white_noise_mix,
    hs_distance,
    save_rdm,
    load_rdm,
)

__version__ = "0.1.0"
