from __future__ import annotations

import json
from typing import Any

__all__ = ['type_str', 'obj_type_str', 'canonical_json', 'check_nonempty']


def type_str(type: Any) -> str:  # noqa: A002
    if type.__module__ in ('builtins', '__main__'):
        return f'`{type.__name__}`'
    else:
        return f'`{type.__module__}.{type.__name__}`'


def obj_type_str(x: Any) -> str:
    return type_str(type(x))


def canonical_json(obj: Any) -> str:
    # sorted keys and compact separators so that identical objects always produce
    # identical bytes
    return json.dumps(obj, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def check_nonempty(x: str, arg_name: str):
    if not isinstance(x, str):
        raise TypeError(
            f'Argument `{arg_name}` must be a string, but has type {obj_type_str(x)}.'
        )
    if len(x) == 0:
        raise ValueError(f'Argument `{arg_name}` must be a non-empty string.')
