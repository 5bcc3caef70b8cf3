from sphere_structures.cli import cmd_table
from sphere_structures.render import render_report
from sphere_structures.scenario_registry import ScenarioRegistry
from sphere_structures.verify import run_suite


def main():
    print("--- Quick Start ---")

    scenario_name = "triple_product_default"
    config = ScenarioRegistry.get(scenario_name)

    if not config:
        print(f"Error: Scenario '{scenario_name}' not found in registry. Exiting quick start.")
        return

    # S^1(1) x S^1(2) x S^1(1): x on the circle of radius 1, y on radius 2, z on radius 1.
    point = [1.0, 0.0, 0.0, 2.0, 0.0, 1.0]
    print(f"\nStructure at {point} on {config.spec}:")
    cmd_table(config, point)

    print("\nRunning a small identity suite...")
    report = run_suite(config.spec, config.signs, n_points=50, n_vectors=5, seed=config.seed, verbose=True)
    print(render_report(report, scenario_name))

    print("\n--- Quick Start Complete ---")
    print("For full runs with reports, use 'sphere-structures verify --scenario <name>'.")


if __name__ == "__main__":
    main()
