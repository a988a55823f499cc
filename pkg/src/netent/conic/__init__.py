from .cones import ConeLayout, project_psd, smat, svec, svec_len
from .solver import (
    TIGHT,
    ConicProgram,
    ConicSolution,
    SolverSettings,
    program_from_json,
    program_to_json,
    solve,
)
from .herm import (
    BuiltProgram,
    HermitianProgramBuilder,
    embed_map,
    hmat,
    hvec,
    hvec_op,
    op_congruence,
    op_partial_trace,
    op_partial_transpose,
    op_permutation,
    vec_congruence,
    vec_partial_trace,
    vec_partial_transpose,
    vec_permutation,
)
