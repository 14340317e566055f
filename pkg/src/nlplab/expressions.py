"""Tiny arithmetic expression compiler for exterior-data formulas.

Grammar: names x (and y in 2d), numeric literals, + - * / **, unary +-,
and calls to min, max, abs.  Everything else is rejected at compile time, so
config files cannot smuggle in arbitrary code.  Compiled expressions are
numpy-vectorized over node coordinates.
"""

from __future__ import annotations

import ast
from typing import Callable

import numpy as np

__all__ = ["ExpressionError", "compile_expression"]


class ExpressionError(ValueError):
    pass


_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}

_UNARYOPS = {
    ast.UAdd: lambda v: v,
    ast.USub: np.negative,
}

_CALLS = {
    "min": np.minimum,
    "max": np.maximum,
    "abs": np.abs,
}


def _check(node: ast.AST, names: tuple[str, ...]) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body, names)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        _check(node.left, names)
        _check(node.right, names)
    elif isinstance(node, ast.UnaryOp):
        if type(node.op) not in _UNARYOPS:
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        _check(node.operand, names)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _CALLS:
            raise ExpressionError("only min, max, abs calls are allowed")
        if node.keywords:
            raise ExpressionError("keyword arguments are not allowed")
        if node.func.id == "abs" and len(node.args) != 1:
            raise ExpressionError("abs takes exactly one argument")
        if node.func.id != "abs" and len(node.args) < 2:
            raise ExpressionError(f"{node.func.id} takes at least two arguments")
        for arg in node.args:
            _check(arg, names)
    elif isinstance(node, ast.Name):
        if node.id not in names:
            raise ExpressionError(
                f"unknown name {node.id!r} (allowed: {', '.join(names)})"
            )
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ExpressionError(f"literal {node.value!r} is not numeric")
    else:
        raise ExpressionError(f"syntax {type(node).__name__} not allowed")


def _evaluate(node: ast.AST, env: dict):
    if isinstance(node, ast.Expression):
        return _evaluate(node.body, env)
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](
            _evaluate(node.left, env), _evaluate(node.right, env)
        )
    if isinstance(node, ast.UnaryOp):
        return _UNARYOPS[type(node.op)](_evaluate(node.operand, env))
    if isinstance(node, ast.Call):
        fn = _CALLS[node.func.id]
        args = [_evaluate(a, env) for a in node.args]
        if node.func.id == "abs":
            return fn(args[0])
        out = args[0]
        for a in args[1:]:
            out = fn(out, a)
        return out
    if isinstance(node, ast.Name):
        return env[node.id]
    if isinstance(node, ast.Constant):
        return float(node.value)
    raise AssertionError("unreachable: node validated earlier")


def compile_expression(source: str, dim: int = 1) -> Callable:
    """Compile a formula in x (and y when dim = 2) into a vectorized callable."""
    if dim not in (1, 2):
        raise ExpressionError("dim must be 1 or 2")
    names = ("x",) if dim == 1 else ("x", "y")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse expression: {exc.msg}") from exc
    _check(tree, names)

    def fn(*axes):
        if len(axes) != dim:
            raise ExpressionError(f"expression expects {dim} coordinate arrays")
        env = dict(zip(names, (np.asarray(a, float) for a in axes)))
        return np.asarray(_evaluate(tree, env), float)

    fn.source = source  # type: ignore[attr-defined]
    return fn
