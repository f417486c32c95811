"""Classical models, Hilbert-space quantum logic, pragmatic justification,
mu-contextual probabilities and contextuality checks, side by side."""

from .errors import (
    BudgetExhausted, FragmentError, InputError, NotTestableError, PreconditionError,
    QLBridgeError, StructureError, TPrimeViolation, UnknownIdentifierError, WffSyntaxError,
    ZeroMeasureError,
)
from .syntax import Fragment, Signature, fragment_of, parse, to_text
from .semantics import (
    ClassicalModel, CTruth, c_truth, concrete_logic, extension, logical_preorder,
    physical_preorder, verifiable_wffs,
)
from .lattice import OrthoStructure, lattice_diagnostics, order_isomorphic
from .hilbert import (
    HilbertSpace, Projection, ProjectionLattice, QuantumState, born, join, meet, ortho,
)
from .pragmatics import (
    QuantumOracle, justify, parse_af, pragmatic_preorder, quantum_fragment_structure,
)
from .probability import (
    MuContextModel, collapse_contexts, compatibility, cond_prob, conditional_q_prob,
    generalized_measure_check, jointly_testable, mean_cond_prob, mean_probability_measurement,
    q_probability, testable,
)
from .synthesis import born_model_synthesize
from .contextuality import (
    Law, ObservableConstraintSystem, check_law, contextuality_report, mcp_solve, mgp_check,
)

__version__ = "0.1.0"
