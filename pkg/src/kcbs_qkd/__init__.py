"""Simulator and analysis toolkit for a contextuality-based qutrit QKD protocol."""

__version__ = "0.1.0"

from .adversary import AttackExpectation, EveRecord, EveStrategy, attack_expectation
from .graphs import (
    ContextGraph,
    EdgeKind,
    MonogamyCertificate,
    joint_commutation_graph,
    verify_monogamy_decomposition,
)
from .kcbs import KcbsBasis, KcbsBounds, bounds, k_anticorr, ktilde, standard_basis
from .protocol import (
    KeyStats,
    ProtocolConfig,
    RoundRecord,
    SecurityReport,
    Transcript,
    estimate_security,
    key_stats,
    run_round,
    run_session,
)
from .qutrit import (
    Projector,
    QutritState,
    RngStream,
    TwoQutritState,
    born_probability,
    entangled_collapse,
    inner_product,
    measure,
    projector_from_state,
)

__all__ = [
    "__version__",
    "AttackExpectation",
    "EveRecord",
    "EveStrategy",
    "attack_expectation",
    "ContextGraph",
    "EdgeKind",
    "MonogamyCertificate",
    "joint_commutation_graph",
    "verify_monogamy_decomposition",
    "KcbsBasis",
    "KcbsBounds",
    "bounds",
    "k_anticorr",
    "ktilde",
    "standard_basis",
    "KeyStats",
    "ProtocolConfig",
    "RoundRecord",
    "SecurityReport",
    "Transcript",
    "estimate_security",
    "key_stats",
    "run_round",
    "run_session",
    "Projector",
    "QutritState",
    "RngStream",
    "TwoQutritState",
    "born_probability",
    "entangled_collapse",
    "inner_product",
    "measure",
    "projector_from_state",
]
