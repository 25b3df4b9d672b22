"""
Parsers for the small textual values taken by command line options.

    --params   "n_blob=300, spread=1.5"   -> {'n_blob': 300, 'spread': 1.5}
    --bounds   "-5:5, -4:4"               -> ((-5.0, 5.0), (-4.0, 4.0))
    --resolution "60, 40"                 -> (60, 40)
    --sigmas   "1, 0.5, 0.3"              -> (1.0, 0.5, 0.3)
"""
from __future__ import annotations

from functools import lru_cache
from typing import Any, Union

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import LarkError, VisitError

argument_parser = Lark(r"""
assignments: [assignment ("," assignment)*] ","?
assignment: NAME "=" value
?value: SIGNED_NUMBER -> number
      | NAME -> word

bounds: interval ("," interval)*
interval: SIGNED_NUMBER ":" SIGNED_NUMBER

resolution: INT ("," INT)*

numbers: SIGNED_NUMBER ("," SIGNED_NUMBER)*

NAME: /[a-zA-Z_][a-zA-Z_0-9]*/
%import common.SIGNED_NUMBER
%import common.INT
%ignore " "+
""", start=['assignments', 'bounds', 'resolution', 'numbers'], parser='lalr', maybe_placeholders=True)


class ArgumentSyntaxError(ValueError):
    pass


def _number(text: str) -> Union[int, float]:
    try:
        return int(text)
    except ValueError:
        return float(text)


@v_args(inline=True)
class _Lark2Values(Transformer):
    def __default__(self, data, children, meta):
        raise NotImplementedError((data, children, meta))

    def number(self, t: Token):
        return _number(t.value)

    def word(self, t: Token):
        return t.value

    def assignment(self, name: Token, value: Any):
        return name.value, value

    def assignments(self, *items):
        out = {}
        for item in items:
            if item is None:
                continue
            name, value = item
            if name in out:
                raise ArgumentSyntaxError(f"{name} is given twice")
            out[name] = value
        return out

    def interval(self, lo: Token, hi: Token):
        return float(lo), float(hi)

    def bounds(self, *intervals):
        return intervals

    def resolution(self, *counts: Token):
        return tuple(int(c) for c in counts)

    def numbers(self, *values: Token):
        return tuple(float(v) for v in values)


@lru_cache()
def _parse(text: str, start: str):
    try:
        tree = argument_parser.parse(text, start=start)
    except LarkError as e:
        raise ArgumentSyntaxError(f"can not parse {text!r}: {e}") from None
    try:
        return _Lark2Values().transform(tree)
    except VisitError as e:
        raise e.orig_exc from None


def parse_assignments(text: str) -> dict[str, Union[int, float, str]]:
    return dict(_parse(text, 'assignments'))


def parse_bounds(text: str) -> tuple[tuple[float, float], ...]:
    return _parse(text, 'bounds')


def parse_resolution(text: str) -> tuple[int, ...]:
    return _parse(text, 'resolution')


def parse_numbers(text: str) -> tuple[float, ...]:
    return _parse(text, 'numbers')
