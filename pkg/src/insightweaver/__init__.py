"""Subspace insight mining and interactive data-story construction.

The usual entry points are :func:`load_table` and :func:`extract_all` for
batch extraction, or :func:`build_session` when you want the full pipeline
(catalog, graph, descriptions, vector index, seeded story) in one object.
"""

from .config import ConfigError, ServiceConfig, load_config
from .engine import (
    AnalysisSession,
    SessionStore,
    build_session,
    query_turn,
    restore_session,
    session_id_for,
    subspace_insights,
)
from .graph import CandidateSet, SubspaceGraph, build_graph, relation_of, structural_filter
from .insights import ExtractionConfig, Insight, InsightCatalog, extract_all
from .narrator import InsightDescription, describe, describe_catalog
from .reasoner import (
    LMProvider,
    PromptBundle,
    Recommendation,
    ReasoningError,
    ScriptedLM,
    StubLM,
    compose_prompt,
    recommend,
)
from .retrieval import (
    MergeConfig,
    ProviderError,
    RankedList,
    StubEmbedder,
    VectorIndex,
    dual_path_merge,
    search,
)
from .story import Story, StoryEdge, StoryNode, export_story, import_story
from .tables import (
    IngestError,
    Locator,
    LocatorError,
    Schema,
    Subspace,
    Table,
    apply_locator,
    enumerate_subspaces,
    load_schema_hints,
    load_table,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisSession",
    "CandidateSet",
    "ConfigError",
    "ExtractionConfig",
    "IngestError",
    "Insight",
    "InsightCatalog",
    "InsightDescription",
    "LMProvider",
    "Locator",
    "LocatorError",
    "MergeConfig",
    "PromptBundle",
    "ProviderError",
    "RankedList",
    "ReasoningError",
    "Recommendation",
    "Schema",
    "ScriptedLM",
    "ServiceConfig",
    "SessionStore",
    "Story",
    "StoryEdge",
    "StoryNode",
    "StubEmbedder",
    "StubLM",
    "Subspace",
    "SubspaceGraph",
    "Table",
    "VectorIndex",
    "apply_locator",
    "build_graph",
    "build_session",
    "compose_prompt",
    "describe",
    "describe_catalog",
    "dual_path_merge",
    "enumerate_subspaces",
    "export_story",
    "extract_all",
    "import_story",
    "load_config",
    "load_schema_hints",
    "load_table",
    "query_turn",
    "recommend",
    "relation_of",
    "restore_session",
    "search",
    "session_id_for",
    "structural_filter",
    "subspace_insights",
    "__version__",
]
