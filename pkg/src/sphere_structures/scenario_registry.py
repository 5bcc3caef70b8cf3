# src/sphere_structures/scenario_registry.py

from __future__ import annotations

from sphere_structures.run_config import RunConfig


class ScenarioRegistry:
    """
    Named run configurations, defined as dictionaries in the same shape as
    a JSON config file. get() returns the stored config; RunConfig is
    frozen, so no copy is needed.
    """

    _scenarios: dict[str, RunConfig] = {}

    @classmethod
    def register(cls, name: str, definition: dict) -> RunConfig:
        if name in cls._scenarios:
            raise ValueError(f"Scenario with name '{name}' already registered.")
        run_config = RunConfig.from_dict(definition)
        cls._scenarios[name] = run_config
        return run_config

    @classmethod
    def get(cls, name: str) -> RunConfig | None:
        return cls._scenarios.get(name)

    @classmethod
    def list_scenarios(cls) -> list[str]:
        return list(cls._scenarios.keys())


# --- Pre-defined scenarios ---

# Round sphere S^5(1) in E^6, the totally umbilical case.
ScenarioRegistry.register(
    "hypersphere_default",
    {"family": "hypersphere", "p": 2, "q": 2, "radii": {"R": 1.0}, "signs": 1, "seed": 0},
)

# Per-coordinate signs on the z-block.
ScenarioRegistry.register(
    "hypersphere_mixed_signs",
    {"family": "hypersphere", "p": 2, "q": 2, "radii": {"R": 1.0}, "signs": [1, -1], "seed": 0},
)

# S^3(1) x S^1(2) in E^6.
ScenarioRegistry.register(
    "double_product_default",
    {"family": "double_product", "p": 2, "q": 2, "radii": {"r": 1.0, "r3": 2.0}, "signs": 1, "seed": 0},
)

# S^1(1) x S^1(2) x S^1(1) in E^6.
ScenarioRegistry.register(
    "triple_product_default",
    {
        "family": "triple_product",
        "p": 2,
        "q": 2,
        "radii": {"r1": 1.0, "r2": 2.0, "r3": 1.0},
        "signs": 1,
        "seed": 0,
    },
)

# Same product with P~ = -1 on the z-block.
ScenarioRegistry.register(
    "triple_product_negative",
    {
        "family": "triple_product",
        "p": 2,
        "q": 2,
        "radii": {"r1": 1.0, "r2": 2.0, "r3": 1.0},
        "signs": -1,
        "seed": 0,
    },
)
