"""Console status lines for the fraclab commands.

Colour is dropped when stdout is not a terminal or NO_COLOR is set, so
captured output and CSV-adjacent logs stay plain.
"""
import os
import sys

HEADER_WIDTH = 70

_CODES = {
    "header": "\033[94m",
    "ok": "\033[92m",
    "fail": "\033[91m",
    "info": "\033[96m",
    "warn": "\033[93m",
}
_RESET = "\033[0m"
_MARKS = {"ok": "✓ ", "fail": "✗ ", "info": "ℹ ", "warn": "⚠ ", "header": ""}


def use_color(stream=None) -> bool:
    stream = sys.stdout if stream is None else stream
    if os.environ.get("NO_COLOR"):
        return False
    return bool(getattr(stream, "isatty", lambda: False)())


def _emit(kind: str, msg: str, stream=None) -> None:
    stream = sys.stdout if stream is None else stream
    text = f"{_MARKS[kind]}{msg}"
    if use_color(stream):
        text = f"{_CODES[kind]}{text}{_RESET}"
    print(text, file=stream)


def print_header(msg: str) -> None:
    rule = "=" * HEADER_WIDTH
    print()
    for line in (rule, msg.center(HEADER_WIDTH), rule):
        _emit("header", line)


def print_success(msg: str) -> None:
    _emit("ok", msg)


def print_error(msg: str) -> None:
    _emit("fail", msg)


def print_info(msg: str) -> None:
    _emit("info", msg)


def print_warning(msg: str) -> None:
    _emit("warn", msg)
