"""mvnlock: lockfiles for Maven-style Java builds.

Generates, validates, diffs, and freezes lockfiles that capture the complete
resolved dependency graph of a project — versions, checksums, sources, and
the direct/transitive distinction — so builds are deterministic,
tamper-evident, and rebuildable long after the original resolution happened.
"""

__version__ = "0.1.0"
