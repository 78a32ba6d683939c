from __future__ import annotations

import sys
from pathlib import Path

import pytest

from tensorscript.notation import parse_expression
from tensorscript.properties import Property, PropertyRegistry
from tensorscript.session import Session

ROOT = Path(__file__).resolve().parents[1]
SCRIPTS = ROOT / "scripts"
sys.path.insert(0, str(Path(__file__).resolve().parent))

from oracles import NAMES  # noqa: E402


def P(text):
    return parse_expression(text)


def free_registry():
    """Abstract free-position indices, F antisymmetric, S symmetric."""
    reg = PropertyRegistry()
    reg = reg.attach_all([P(n) for n in NAMES], Property("Indices", {"position": "free"}))
    reg = reg.attach(P("F_{a b}"), Property("AntiSymmetric"))
    reg = reg.attach(P("S_{a b}"), Property("Symmetric"))
    return reg


def script_session(name, mode="plain"):
    sess = Session(mode)
    lines = sess.run_text((SCRIPTS / f"{name}.tens").read_text(encoding="utf-8"))
    return sess, lines


@pytest.fixture
def reg():
    return free_registry()


@pytest.fixture(scope="session")
def maxwell():
    return script_session("maxwell")


@pytest.fixture(scope="session")
def sphere():
    return script_session("sphere")
