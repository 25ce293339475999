"""Software development effort estimation toolkit.

Mines developer-activity metrics from version-control history, learns
fixed-length embeddings of project descriptions, and estimates effort
for newly-envisioned software from its most description-similar past
projects, with a comparative evaluation harness against classical
baselines.
"""

__version__ = "0.1.0"
