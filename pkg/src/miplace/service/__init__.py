"""HTTP facade over the placement library.

The precompute-once, evaluate-many workflow maps naturally onto a small
service: a client registers a candidate set once (paying the cubic-in-m
factorization), then issues cheap evaluation and selection calls against
the cached factors.
"""

from .app import app, create_app

__all__ = ["app", "create_app"]
