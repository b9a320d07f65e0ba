"""Op-based CRDTs, their semidirect product, and a simulation harness."""

from .core import (
    ANY,
    CausalRelation,
    Crdt,
    CrdtError,
    Dot,
    Id,
    LocalOp,
    Op,
    Receive,
    UndefinedEffect,
    UnknownOperation,
    VectorClock,
    causal_deliverable,
    replica_step,
    vc_compare,
    vc_increment,
    vc_merge,
)
from .crdts import UnknownInstance, get
from .product import (
    CompressedProduct,
    CompressibleMonoid,
    SemidirectProduct,
    SemidirectState,
    TaggedMessage,
    comp_effect,
    comp_prepare,
    compute_m_act,
    prune_stable,
    sp_effect,
    sp_eval,
    sp_prepare,
)

__version__ = "0.1.0"
