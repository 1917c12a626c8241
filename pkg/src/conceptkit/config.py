"""Shared thresholds and limits.

Every tunable the checkers consult lives in one Config value so reports are
reproducible from (inputs, config) alone. Defaults match the shipped corpus.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

MAX_DEPTH = 8


@dataclass(frozen=True)
class Config:
    max_steps: int = 5          # reachability threshold for observed actions
    min_prominence: float = 0.05
    epsilon: float = 0.2        # prominence tolerance for symmetry
    max_ratio: float = 2.0      # default reach-parity ratio
    evoke_k: int = 2            # convention tokens needed to evoke a concept
    depth: int = 3              # trace bound for behavioral checks
    state_cap: int = 10 ** 6    # enumeration budget
    sample_depth: int = 2       # bound for sampling states in UI checks
    sample_cap: int = 25        # max sampled states per check

    def validate(self) -> None:
        if self.max_steps <= 0 or self.evoke_k <= 0 or self.depth < 0:
            raise ValueError("thresholds must be positive")
        if not 0 <= self.min_prominence <= 1:
            raise ValueError("min_prominence must lie in [0, 1]")
        if self.epsilon < 0 or self.max_ratio <= 0:
            raise ValueError("epsilon and max_ratio must be positive")
        if self.depth > MAX_DEPTH:
            raise ValueError("depth must be at most %d" % MAX_DEPTH)

    def with_depth(self, depth) -> "Config":
        if depth is None:
            return self
        return replace(self, depth=depth)


_KEYS = {
    "maxSteps": ("max_steps", int),
    "minProminence": ("min_prominence", float),
    "epsilon": ("epsilon", float),
    "maxRatio": ("max_ratio", float),
    "evokeK": ("evoke_k", int),
    "depth": ("depth", int),
    "stateCap": ("state_cap", int),
    "sampleDepth": ("sample_depth", int),
    "sampleCap": ("sample_cap", int),
}


def parse_config(text: str, base: Config = Config()) -> Config:
    """Parse a key=value config file; unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError("line %d: expected key=value" % lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ValueError("line %d: unknown setting %r" % (lineno, key))
        attr, cast = _KEYS[key]
        values[attr] = cast(value)
    cfg = replace(base, **values)
    cfg.validate()
    return cfg
