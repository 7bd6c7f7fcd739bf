"""Patch-theoretic merging of single-file histories.

Files and patches live in :mod:`copatch.lines`; conflicted files and their
colimits in :mod:`copatch.conflict`; encodings and conflict markers in
:mod:`copatch.render`; event-structure repositories in
:mod:`copatch.repository`, persisted by :mod:`copatch.store` and driven from
the command line by :mod:`copatch.cli`.
"""

__version__ = "0.1.0"

from .conflict import (
    ConflictFile,
    PartialMorphism,
    PushoutResult,
    all_objects,
    compose_p,
    conflict_file,
    coproduct,
    embed,
    embed_patch,
    empty_morphism,
    from_pointed,
    hom,
    identity_p,
    initial,
    is_isomorphic,
    is_linear,
    mediating,
    pushout,
    to_pointed,
    validate_morphism,
    validate_object,
)
from .errors import *  # noqa: F401,F403
from .lines import (
    Delete,
    File,
    Insert,
    Patch,
    apply_patch,
    compose,
    delete_line,
    diff,
    identity,
    insert_line,
    make_patch,
    replay,
    tensor,
    to_generators,
    validate_patch,
)
from .render import (
    decode_morphism,
    decode_object,
    digest,
    encode_morphism,
    encode_object,
    parse_morphism,
    render_conflicts,
)
from .repository import (
    Event,
    EventStructure,
    Repository,
    configurations,
    hereditary_closure,
    linear_extensions,
    trace_graph,
    validate_es,
)
