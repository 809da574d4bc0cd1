"""Content-addressed persistent cache for density anchor values.

Entries are exact rationals keyed by a canonical JSON encoding of
(field, A-blocks, target, level); hits bypass the character-box enumerations.
The store is a single JSON file per field under HERMLAT_CACHE_DIR (default
~/.cache/hermlat), written atomically; corrupt files are discarded with a
warning and rebuilt.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from fractions import Fraction

_DEFAULT_DIR = os.path.join(os.path.expanduser("~"), ".cache", "hermlat")


def cache_dir():
    return os.environ.get("HERMLAT_CACHE_DIR", _DEFAULT_DIR)


def cache_enabled():
    return os.environ.get("HERMLAT_CACHE", "1") != "0"


class DensityCache:
    def __init__(self, field_key: str):
        self.field_key = field_key
        self.path = os.path.join(cache_dir(), "density-%s.json" % field_key)
        self._data = None
        self._dirty = 0

    def _load(self):
        if self._data is not None:
            return
        self._data = {}
        if not cache_enabled():
            return
        try:
            with open(self.path) as fh:
                raw = json.load(fh)
            for k, v in raw.items():
                self._data[k] = v
        except FileNotFoundError:
            pass
        except Exception as ex:  # corrupt entry: recompute and overwrite
            print("hermlat: discarding corrupt cache %s (%s)" % (self.path, ex),
                  file=sys.stderr)
            self._data = {}

    @staticmethod
    def _key(kind, blocks, target, extra=None):
        def enc(x):
            if isinstance(x, Fraction):
                return "%d/%d" % (x.numerator, x.denominator)
            if isinstance(x, (list, tuple)):
                return [enc(t) for t in x]
            return x

        return json.dumps([kind, enc(blocks), enc(target), enc(extra)], sort_keys=True)

    def get(self, kind, blocks, target, extra=None):
        self._load()
        v = self._data.get(self._key(kind, blocks, target, extra))
        if v is None:
            return None
        return (Fraction(v[0]), v[1], bool(v[2]))

    def put(self, kind, blocks, target, value: Fraction, level: int, certified: bool, extra=None):
        self._load()
        self._data[self._key(kind, blocks, target, extra)] = [
            "%d/%d" % (value.numerator, value.denominator), level, bool(certified)]
        self._dirty += 1
        if self._dirty >= 1:
            self.flush()

    def flush(self):
        if not cache_enabled() or self._data is None or self._dirty == 0:
            return
        os.makedirs(cache_dir(), exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=cache_dir(), suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(self._data, fh, sort_keys=True)
        os.replace(tmp, self.path)
        self._dirty = 0


_caches = {}


def cache_for(field_key: str) -> DensityCache:
    if field_key not in _caches:
        _caches[field_key] = DensityCache(field_key)
    return _caches[field_key]


def flush_all():
    for c in _caches.values():
        c.flush()
