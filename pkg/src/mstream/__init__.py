"""Monoidal streams: a dataflow engine with delayed feedback over
deterministic and finite stochastic kernels, a small stream language, and
exact observational semantics."""

from .dist import (
    DEFAULT_SUPPORT_CAP, Dist, capped, dist_bind, dist_dirac, dist_map, dist_marginal,
    dist_product, dist_sample, dist_uniform, support_cap,
)
from .errors import (
    DomainError, MStreamError, ParseError, ScheduleError, SignatureError, StochasticKernelError,
    SupportOverflow, TypeCheckError,
)
from .kernel import (
    INT, SET, UNIT, Kernel, Ty, as_stochastic, delay, det_kernel, enumerate_inputs, finite_int,
    kernel_apply, kernel_compose, kernel_tensor, prod, rewire, stoch_kernel, structural_kernel,
)
from .laws import axiom_suite, category_suite
from .stream import (
    ForceCounter, MStream, Stage, TypeSchedule, WireSchedule, stream_copy, stream_delay,
    stream_discard, stream_fby, stream_feedback, stream_identity, stream_lift_constant,
    stream_lift_sequence, stream_par, stream_run, stream_seq, stream_symmetry, stream_unroll,
    stream_wait, stream_wiring,
)
from .trunc import (
    CausalityReport, EquivReport, JointDist, causal_eval, check_causality, obs_equiv,
    proc_semantics, step_marginals,
)

__version__ = "0.1.0"

__all__ = [
    "CausalityReport",
    "DEFAULT_SUPPORT_CAP",
    "Dist",
    "DomainError",
    "EquivReport",
    "ForceCounter",
    "INT",
    "JointDist",
    "Kernel",
    "MStream",
    "MStreamError",
    "ParseError",
    "SET",
    "ScheduleError",
    "SignatureError",
    "Stage",
    "StochasticKernelError",
    "SupportOverflow",
    "Ty",
    "TypeCheckError",
    "TypeSchedule",
    "UNIT",
    "WireSchedule",
    "__version__",
    "axiom_suite",
    "category_suite",
    "as_stochastic",
    "capped",
    "causal_eval",
    "check_causality",
    "delay",
    "det_kernel",
    "dist_bind",
    "dist_dirac",
    "dist_map",
    "dist_marginal",
    "dist_product",
    "dist_sample",
    "dist_uniform",
    "enumerate_inputs",
    "finite_int",
    "kernel_apply",
    "kernel_compose",
    "kernel_tensor",
    "obs_equiv",
    "proc_semantics",
    "prod",
    "rewire",
    "step_marginals",
    "stoch_kernel",
    "stream_copy",
    "stream_delay",
    "stream_discard",
    "stream_fby",
    "stream_feedback",
    "stream_identity",
    "stream_lift_constant",
    "stream_lift_sequence",
    "stream_par",
    "stream_run",
    "stream_seq",
    "stream_symmetry",
    "stream_unroll",
    "stream_wait",
    "stream_wiring",
    "structural_kernel",
    "support_cap",
]
