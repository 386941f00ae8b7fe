"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``PORTRAIT_FORGE_PURE=1`` to force the pure backend.
"""

import os

if os.environ.get("PORTRAIT_FORGE_PURE"):
    from . import pure as impl
else:
    try:
        from . import _fast as impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as impl

orbits = impl.orbits
face_permutation = impl.face_permutation
is_transitive = impl.is_transitive
face_components = impl.face_components


def backend():
    return impl.BACKEND
