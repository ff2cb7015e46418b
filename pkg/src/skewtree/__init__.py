"""Exact tree-embedding toolkit.

Modules:
    graphs      graph/tree primitives, certificates, serialization
    regularity  density, epsilon-regularity, typical vertices, pair embedding
    treeparts   fine partitions of trees and anchored forests
    clusters    L/S cluster model, validation, synthesis, decomposition
    configs     matching + configuration witnesses on the cluster graph
    embedding   anchored-forest embedding and the four-case master procedure
    oracle      brute-force ground truth, extremal constructions, scans
    cli         command-line front end
"""

from skewtree.graphs import (
    EmbeddingCertificate,
    Graph,
    RootedTree,
    Skew,
    generate_tree,
    skew_of,
    validate_embedding,
)

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "RootedTree",
    "Skew",
    "EmbeddingCertificate",
    "generate_tree",
    "skew_of",
    "validate_embedding",
    "__version__",
]
