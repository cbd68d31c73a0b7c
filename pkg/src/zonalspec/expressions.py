"""Safe evaluation of intensity expressions over ``x`` and ``y``.

The grammar covers numeric literals, the variables ``x`` and ``y``, the
constant ``pi``, the operators ``+ - * / **`` with unary minus, and calls
to ``exp``, ``sin``, ``cos``.  Expressions are parsed with :mod:`ast` and
compiled to a vectorized numpy function; nothing else in the source string
can execute.
"""

from __future__ import annotations

import ast

import numpy as np

from .errors import ConfigError

_FUNCTIONS = {"exp": np.exp, "sin": np.sin, "cos": np.cos}
_CONSTANTS = {"pi": np.pi}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


def _check(node: ast.AST, source: str) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body, source)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ConfigError(f"operator not allowed in intensity expression: {source!r}")
        _check(node.left, source)
        _check(node.right, source)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.UAdd, ast.USub)):
            raise ConfigError(f"operator not allowed in intensity expression: {source!r}")
        _check(node.operand, source)
    elif isinstance(node, ast.Call):
        if (
            not isinstance(node.func, ast.Name)
            or node.func.id not in _FUNCTIONS
            or node.keywords
            or len(node.args) != 1
        ):
            raise ConfigError(
                f"only exp/sin/cos with one argument may be called: {source!r}"
            )
        _check(node.args[0], source)
    elif isinstance(node, ast.Name):
        if node.id not in ("x", "y") and node.id not in _CONSTANTS:
            raise ConfigError(
                f"unknown name {node.id!r} in intensity expression {source!r}; "
                "only x, y, pi and exp/sin/cos are available"
            )
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ConfigError(f"only numeric literals are allowed: {source!r}")
    else:
        raise ConfigError(
            f"unsupported syntax in intensity expression {source!r}"
        )


def _evaluate(node: ast.AST, x, y):
    if isinstance(node, ast.Expression):
        return _evaluate(node.body, x, y)
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](
            _evaluate(node.left, x, y), _evaluate(node.right, x, y)
        )
    if isinstance(node, ast.UnaryOp):
        value = _evaluate(node.operand, x, y)
        return -value if isinstance(node.op, ast.USub) else +value
    if isinstance(node, ast.Call):
        return _FUNCTIONS[node.func.id](_evaluate(node.args[0], x, y))
    if isinstance(node, ast.Name):
        if node.id == "x":
            return x
        if node.id == "y":
            return y
        return _CONSTANTS[node.id]
    if isinstance(node, ast.Constant):
        return node.value
    raise AssertionError("unreachable: node survived validation")


def compile_intensity(source: str):
    """Compile an expression string into a vectorized function ``f(x, y)``."""
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse intensity expression {source!r}: {exc}") from exc
    _check(tree, source)

    def evaluate(x, y):
        out = _evaluate(tree, np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.broadcast_to(np.asarray(out, dtype=float),
                               np.broadcast(np.asarray(x), np.asarray(y)).shape).copy()

    evaluate.source = source
    return evaluate


def scan_upper_bound(func, window, grid: int = 256, headroom: float = 1.05) -> float:
    """Approximate upper bound of ``func`` over a window by a dense grid scan.

    The scan cannot prove a bound for arbitrary expressions; the returned
    value is the grid maximum inflated by ``headroom``.
    """
    xs = np.linspace(window.lower[0], window.upper[0], grid)
    ys = np.linspace(window.lower[1], window.upper[1], grid)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vals = np.asarray(func(gx, gy), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ConfigError("intensity expression is not finite everywhere on the window")
    top = float(vals.max())
    if top < 0:
        raise ConfigError("intensity expression is negative everywhere on the window")
    return top * headroom
