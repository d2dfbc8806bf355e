"""Problem input: families of identical jobs, parallel machines, qualification data.

Instances are immutable.  Jobs are never materialized individually; a job is
identified by its family (jobs of one family are interchangeable).  All times
are integers.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any


class InstanceError(ValueError):
    """Raised when instance text cannot be parsed or does not validate."""


@dataclass(frozen=True)
class Family:
    id: int
    jobs: int
    proc: int
    setup: int
    gamma: int
    qualified: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "qualified", tuple(sorted(self.qualified)))


@dataclass(frozen=True)
class Instance:
    machines: int
    families: tuple[Family, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "families", tuple(self.families))

    @property
    def n_jobs(self) -> int:
        return sum(fam.jobs for fam in self.families)

    @property
    def n_families(self) -> int:
        return len(self.families)

    def family(self, f: int) -> Family:
        """Family by 1-based id."""
        return self.families[f - 1]

    def job_family(self, j: int) -> int:
        """Family of job ``j`` (1-based), jobs being numbered family by family."""
        if j < 1:
            raise IndexError(j)
        for fam in self.families:
            if j <= fam.jobs:
                return fam.id
            j -= fam.jobs
        raise IndexError(j)

    def is_qualified(self, f: int, m: int) -> bool:
        return m in self.family(f).qualified

    def max_disqualifications(self) -> int:
        return sum(len(fam.qualified) for fam in self.families)


def validate_instance(inst: Instance) -> list[str]:
    """Return every violated invariant; an empty list means the instance is valid."""
    errors = []
    if not isinstance(inst.machines, int) or inst.machines < 1:
        errors.append(f"machines: must be a positive integer, got {inst.machines!r}")
    if not inst.families:
        errors.append("families: at least one family is required")
    for pos, fam in enumerate(inst.families, start=1):
        where = f"family {fam.id}"
        if fam.id != pos:
            errors.append(f"{where}: id must be {pos} (ids are 1..F without gaps)")
        if fam.jobs < 1:
            errors.append(f"{where}: jobs must be >= 1, got {fam.jobs}")
        if fam.proc < 1:
            errors.append(f"{where}: proc must be >= 1, got {fam.proc}")
        if fam.setup < 0:
            errors.append(f"{where}: setup must be >= 0, got {fam.setup}")
        if fam.gamma < 1:
            errors.append(f"{where}: gamma must be >= 1, got {fam.gamma}")
        if not fam.qualified:
            errors.append(f"{where}: qualified machine set is empty")
        for m in fam.qualified:
            if not 1 <= m <= inst.machines:
                errors.append(f"{where}: qualified machine {m} outside 1..{inst.machines}")
        if len(set(fam.qualified)) != len(fam.qualified):
            errors.append(f"{where}: duplicate qualified machines")
    return errors


def setup_matrix(inst: Instance) -> list[list[int]]:
    """F x F matrix, entry [g][f] is the setup paid when ``f`` follows ``g`` (0-based)."""
    F = inst.n_families
    return [
        [0 if g == f else inst.families[f].setup for f in range(F)]
        for g in range(F)
    ]


_FAMILY_KEYS = {"id", "jobs", "proc", "setup", "gamma", "qualified"}


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    return {
        "machines": inst.machines,
        "families": [
            {
                "id": fam.id,
                "jobs": fam.jobs,
                "proc": fam.proc,
                "setup": fam.setup,
                "gamma": fam.gamma,
                "qualified": list(fam.qualified),
            }
            for fam in inst.families
        ],
    }


def save_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


def _int_field(obj: dict, key: str, where: str) -> int:
    if key not in obj:
        raise InstanceError(f"{where}: missing field {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(f"{where}: field {key!r} must be an integer, got {value!r}")
    return value


def instance_from_dict(data: Any) -> Instance:
    if not isinstance(data, dict):
        raise InstanceError("top level: expected an object")
    unknown = set(data) - {"machines", "families"}
    if unknown:
        raise InstanceError(f"top level: unknown keys {sorted(unknown)}")
    machines = _int_field(data, "machines", "top level")
    raw_families = data.get("families")
    if not isinstance(raw_families, list):
        raise InstanceError("top level: 'families' must be a list")
    families = []
    for pos, raw in enumerate(raw_families):
        where = f"families[{pos}]"
        if not isinstance(raw, dict):
            raise InstanceError(f"{where}: expected an object")
        unknown = set(raw) - _FAMILY_KEYS
        if unknown:
            raise InstanceError(f"{where}: unknown keys {sorted(unknown)}")
        qualified = raw.get("qualified")
        if not isinstance(qualified, list) or not all(
            isinstance(m, int) and not isinstance(m, bool) for m in qualified
        ):
            raise InstanceError(f"{where}: 'qualified' must be a list of integers")
        families.append(
            Family(
                id=_int_field(raw, "id", where),
                jobs=_int_field(raw, "jobs", where),
                proc=_int_field(raw, "proc", where),
                setup=_int_field(raw, "setup", where),
                gamma=_int_field(raw, "gamma", where),
                qualified=tuple(qualified),
            )
        )
    return Instance(machines=machines, families=tuple(families))


def load_instance(text: str) -> Instance:
    """Parse and validate an instance from its JSON text.

    Raises:
        InstanceError: on malformed JSON (with line/column), schema problems
            or invariant violations.
    """
    if not text.strip():
        raise InstanceError("line 1: empty instance text")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    inst = instance_from_dict(data)
    violations = validate_instance(inst)
    if violations:
        raise InstanceError("; ".join(violations))
    return inst


@dataclass(frozen=True)
class GenConfig:
    n_jobs: int
    machines: int
    families: int
    proc: tuple[int, int] = (1, 10)
    setup: tuple[int, int] = (0, 5)
    gamma: tuple[int, int] = (20, 60)
    density: float = 0.6
    seed: int = 0
    max_retries: int = field(default=100, compare=False)


def _draw(cfg: GenConfig, seed: int) -> Instance:
    rng = random.Random(seed)
    cuts = sorted(rng.sample(range(1, cfg.n_jobs), cfg.families - 1))
    bounds = [0, *cuts, cfg.n_jobs]
    families = []
    for f in range(cfg.families):
        qualified = [m for m in range(1, cfg.machines + 1) if rng.random() < cfg.density]
        if not qualified:
            qualified = [rng.randint(1, cfg.machines)]
        families.append(
            Family(
                id=f + 1,
                jobs=bounds[f + 1] - bounds[f],
                proc=rng.randint(*cfg.proc),
                setup=rng.randint(*cfg.setup),
                gamma=rng.randint(*cfg.gamma),
                qualified=tuple(qualified),
            )
        )
    return Instance(machines=cfg.machines, families=tuple(families))


def generate_instance(cfg: GenConfig) -> Instance:
    """Draw a random instance that the qualification-centric heuristic can schedule.

    Deterministic for a given config.  Candidates the heuristic cannot
    schedule are redrawn from the next derived seed, at most
    ``cfg.max_retries`` times.
    """
    from .heuristics import qualification_centric

    if cfg.families > cfg.n_jobs:
        raise InstanceError(f"cannot split {cfg.n_jobs} jobs into {cfg.families} families")
    if min(cfg.n_jobs, cfg.machines, cfg.families) < 1:
        raise InstanceError("n_jobs, machines and families must be positive")
    if not 0.0 < cfg.density <= 1.0:
        raise InstanceError(f"density must lie in (0, 1], got {cfg.density}")
    if cfg.proc[0] < 1 or cfg.setup[0] < 0 or cfg.gamma[0] < 1:
        raise InstanceError("proc and gamma ranges must be positive, setup non-negative")
    seed = cfg.seed
    for _ in range(cfg.max_retries):
        inst = _draw(cfg, seed)
        if qualification_centric(inst) is not None:
            return inst
        seed = (seed * 6364136223846793005 + 1442695040888963407) % 2**64
    raise InstanceError(f"no feasible instance found after {cfg.max_retries} draws")
