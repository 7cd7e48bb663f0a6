"""
Ratunif v1.0 - Pipeline Service
parse -> infer types -> normalize -> flatten -> saturate -> unif -> check.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from .config import DEFAULT_BASE_TYPE, DEFAULT_CHECK_DEPTH, DEFAULT_MAX_STEPS, logger
from .errors import InputError, InternalError
from .flatten_service import flatten, patternize_context
from .mgu_service import gc_defs, unif, value_metavars
from .oracle_service import VerifyReport, verify_unifier
from .saturation_service import SatTrace, is_first_order, saturate
from .surface_service import ConcreteContext, Signature, elaborate, parse_problem
from .term_service import MetaVar, NameSupply, Substitution, UnifContext, restrict

MODES = ("auto", "fo", "ho")


@dataclass
class RunConfig:
    path: Optional[str] = None
    mode: str = "auto"
    trace: bool = False
    check_depth: Optional[int] = DEFAULT_CHECK_DEPTH
    output: str = "text"
    max_steps: int = DEFAULT_MAX_STEPS
    schedule: str = "fifo"
    early_stop: bool = True
    check_measure: bool = False
    resolution_policy: str = "earliest"
    default_base_type: Optional[str] = DEFAULT_BASE_TYPE
    abstraction: str = "free"

    @classmethod
    def from_settings(cls, settings: Dict[str, Any], **overrides) -> "RunConfig":
        cfg = cls(
            check_depth=settings.get("check_depth", DEFAULT_CHECK_DEPTH),
            max_steps=settings.get("max_steps", DEFAULT_MAX_STEPS),
            schedule=settings.get("schedule", "fifo"),
            early_stop=settings.get("early_stop_on_contra", True),
            check_measure=settings.get("check_measure", False),
            resolution_policy=settings.get("resolution_policy", "earliest"),
            default_base_type=settings.get("default_base_type", DEFAULT_BASE_TYPE),
            abstraction=settings.get("flatten_abstraction", "free"),
        )
        for key, value in overrides.items():
            if value is not None:
                setattr(cfg, key, value)
        return cfg


@dataclass
class Problem:
    signature: Signature
    concrete: ConcreteContext
    delta: UnifContext
    supply: NameSupply

    @property
    def metavars(self) -> List[MetaVar]:
        return list(self.concrete.metavars)


@dataclass
class UnifyOutcome:
    problem: Problem
    mode: str
    saturated: UnifContext
    trace: SatTrace
    full: Optional[Substitution] = None
    gamma: Optional[Substitution] = None
    free: List[MetaVar] = field(default_factory=list)
    report: Optional[VerifyReport] = None

    @property
    def found(self) -> bool:
        return not self.saturated.contra


def load_problem(text: str, config: Optional[RunConfig] = None) -> Problem:
    config = config or RunConfig()
    sig, raw = parse_problem(text)
    concrete = elaborate(sig, raw, config.default_base_type)
    names = {r.name for r, _ in concrete.defs} | {m.name for m in concrete.metavars}
    supply = NameSupply(names)
    delta = flatten(patternize_context(concrete, supply), supply, config.abstraction)
    return Problem(sig, concrete, delta, supply)


def select_mode(delta: UnifContext, mode: str) -> str:
    if mode not in MODES:
        raise InputError(f"Unknown mode {mode!r}")
    if mode == "auto":
        return "fo" if is_first_order(delta) else "ho"
    return mode


def solve(text: str, config: Optional[RunConfig] = None) -> UnifyOutcome:
    config = config or RunConfig()
    problem = load_problem(text, config)
    mode = select_mode(problem.delta, config.mode)
    logger.info(f"Solving {len(problem.delta.eqs)} equations in {mode} mode")
    saturated, trace = saturate(
        problem.delta, mode, problem.supply, config.max_steps,
        config.early_stop, config.schedule, config.check_measure,
    )
    outcome = UnifyOutcome(problem, mode, saturated, trace)
    if saturated.contra:
        return outcome
    outcome.full = unif(saturated, config.resolution_policy)
    outcome.gamma = gc_defs(restrict(outcome.full, (m.name for m in problem.metavars)))
    outcome.free = value_metavars(outcome.gamma)
    if config.check_depth:
        outcome.report = verify_unifier(problem.delta, outcome.gamma, config.check_depth)
        if not outcome.report.ok:
            failed = outcome.report.failures()[0]
            raise InternalError(f"Unifier check failed: {failed.describe()}")
    return outcome


def solve_file(path: Path, config: Optional[RunConfig] = None) -> UnifyOutcome:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"Cannot read {path}: {e}")
    return solve(text, config)
