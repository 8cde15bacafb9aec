"""Two-cook kitchen coordination sandbox.

Deterministic grid engine, skill vocabulary with machine-checkable
preconditions, search-based controller, language-planner agents, cross-play
evaluation harness, and a live human-vs-agent play server.
"""

__version__ = "0.1.0"
