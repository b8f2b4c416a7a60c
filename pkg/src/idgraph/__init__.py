"""Structural observability and controllability analysis for influence diagrams."""

from .controllability import (
    ControllabilityReport,
    ControlQuery,
    PathCertificate,
    SideCondition,
    Verdict,
    build_flow_network,
    check_controllability,
    check_side_conditions,
    verify_certificate,
)
from .dot import export_dot
from .flow import FlowNetwork, enumerate_alternative_path_sets, max_node_disjoint_paths
from .model import (
    DiagramError,
    InfluenceDiagram,
    Node,
    NodeKind,
    ValidationReport,
    load_diagram,
    parse_diagram,
    serialize_diagram,
    validate,
)
from .observability import (
    KnowledgeState,
    ObservabilityReport,
    Rule,
    RuleFiring,
    is_chain_observable,
    observability_closure,
    partition_family_classes,
    rule_all_parents_known,
    rule_matching,
)
from .oracle import instantiate_linear, numeric_controllable, numeric_observable, rank
from .unroll import PatternMatrix, UnrollSpec, unroll

__version__ = "0.1.0"
