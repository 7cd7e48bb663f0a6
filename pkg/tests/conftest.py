"""Shared fixtures: problem files under fixtures/ and expected unifiers written as JSON."""
import sys
from pathlib import Path
from typing import Any, Dict, List

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from services.config import FIXTURES_DIR
from services.pipeline_service import RunConfig, load_problem, solve
from services.render_service import substitution_from_json


# ── Helpers ──────────────────────────────────────────────────────────

def fixture_text(name: str) -> str:
    return (FIXTURES_DIR / f"{name}.lf").read_text(encoding="utf-8")


def expected_unifier(sig, assignments: List[Dict[str, Any]], defs: List[Dict[str, Any]] = (), mode: str = "ho"):
    """Hand-written unifier in the JSON result layout, read back into a substitution."""
    data = {
        "result": "unifier",
        "mode": mode,
        "assignments": [dict({"mode": "REC"}, **a) for a in assignments],
        "defs": list(defs),
    }
    return substitution_from_json(data, sig)


# ── Fixtures ─────────────────────────────────────────────────────────

@pytest.fixture
def problem():
    """Factory: fixture name -> loaded (parsed, elaborated, flattened) problem."""
    def _load(name: str, **overrides):
        return load_problem(fixture_text(name), RunConfig(**overrides))
    return _load


@pytest.fixture
def solved():
    """Factory: fixture name -> UnifyOutcome with the default depth check."""
    def _solve(name: str, **overrides):
        return solve(fixture_text(name), RunConfig(**overrides))
    return _solve
