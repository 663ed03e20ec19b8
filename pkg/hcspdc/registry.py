"""
registry.py — Global parser cache.

Builds each lark grammar exactly ONCE per process. Earley parsers are costly
to construct and cheap to reuse; lark parser objects are safe to share for
parsing. Construction holds a per-key lock, so concurrent first calls do not
build the same grammar twice and one slow build does not block the others.
"""

import threading
from typing import Any, Callable, Dict

import lark

from .debug_timing import trace

_lock = threading.Lock()          # protects _key_locks
_cache: Dict[str, Any] = {}
_key_locks: Dict[str, threading.Lock] = {}


def get_key_lock(key: str) -> threading.Lock:
    """Return (creating if needed) the per-key lock."""
    if key not in _key_locks:
        with _lock:
            if key not in _key_locks:
                _key_locks[key] = threading.Lock()
    return _key_locks[key]


def get_cached(key: str, build: Callable[[], Any]) -> Any:
    """Return the object cached under `key`, calling `build` on first use only."""
    if key not in _cache:
        with get_key_lock(key):
            if key not in _cache:
                trace("registry", f"building {key}")
                _cache[key] = build()
    return _cache[key]


def get_parser(name: str, grammar: str, start: str, **options) -> lark.Lark:
    """Return a cached lark parser for `grammar`, keyed by `name`."""
    return get_cached(f"lark:{name}", lambda: lark.Lark(grammar, start=start, **options))
