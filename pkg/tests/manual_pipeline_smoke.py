"""
tests/manual_pipeline_smoke.py
==============================
Manual smoke-test for the navigation pipeline.

Bootstraps Django, generates a handful of small demonstrations, trains for
a few epochs and drives the trained model and the oracle through one
closed-loop episode. Nothing is written to the database. Run from the
project root:

    python tests/manual_pipeline_smoke.py
"""

import math
import os
import sys
import tempfile

# ---------------------------------------------------------------------------
# Django bootstrap
# ---------------------------------------------------------------------------
# Ensure the project root is on sys.path so Django can find the settings.
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "semnav.settings")

import django  # noqa: E402
django.setup()

# ---------------------------------------------------------------------------
# Imports (must come AFTER django.setup())
# ---------------------------------------------------------------------------
from costnet.services import EncoderConfig  # noqa: E402
from gridworld.services import DEFAULT_CLASS_SET, GridParams  # noqa: E402
from gridworld.services.episodes import generate_split  # noqa: E402
from learner.services import (  # noqa: E402
    LearnedCostStrategy,
    NavigationModel,
    OracleCostStrategy,
    TrainConfig,
    evaluate_split,
    rollout,
    train,
)
from sensor.services import SensorParams  # noqa: E402

GRID = GridParams(width=8, height=8, rect_count=(1, 3), rect_size=(1, 3))
SENSOR = SensorParams(ray_count=16, angular_resolution=22.5, max_range=2.0)


# ---------------------------------------------------------------------------
# Test
# ---------------------------------------------------------------------------
def main() -> None:
    print("=" * 60)
    print("  SemNav – Manual Pipeline Smoke Test")
    print("=" * 60)

    # 1. Demonstrations
    train_demos = generate_split("train", 12, 0, GRID, DEFAULT_CLASS_SET, SENSOR)
    val_demos = generate_split("val", 4, 0, GRID, DEFAULT_CLASS_SET, SENSOR)
    print(f"\n✔ {len(train_demos)} train / {len(val_demos)} val demonstrations")

    # 2. Model and baseline
    model = NavigationModel.from_config(EncoderConfig(channels=(4, 8), seed=0), DEFAULT_CLASS_SET)
    config = TrainConfig(epochs=5, lr=0.01, batch_size=4)
    before, _ = evaluate_split(model, val_demos, config.alpha)
    print(f"✔ untrained val nll: {before:.4f} (uniform policy: {math.log(4):.4f})")

    # 3. Training
    print("\n--- Training ---")
    try:
        with tempfile.TemporaryDirectory() as out:
            result = train(train_demos, config, model, val=val_demos, checkpoint_dir=out)
            for row in result.history:
                print(f"  epoch {row['epoch']} {row['split']:5s} nll={row['nll']:.4f} acc={row['accuracy']:.3f}")
            print(f"\n✔ best epoch {result.best_epoch}, checkpoints: {sorted(result.checkpoints)}")
    except Exception as exc:
        print(f"\n✘ Training failed: {exc.__class__.__name__}: {exc}")
        if hasattr(exc, "details"):
            print(f"  Details: {exc.details}")
        return

    # 4. Closed loop
    print("\n--- Rollouts on the first val episode ---")
    demo = val_demos[0]
    for name, strategy in (
        ("learned", LearnedCostStrategy(model)),
        ("oracle", OracleCostStrategy(DEFAULT_CLASS_SET.count)),
    ):
        outcome = rollout(demo.grid, demo.start, demo.goal, strategy, 2 * demo.length, SENSOR)
        print(
            f"  {name:8s} {outcome.reason:12s} steps={outcome.steps} "
            f"(expert {demo.length}) cost={outcome.path_cost(demo.grid):.1f} "
            f"(expert {demo.path_cost():.1f})"
        )

    print("\n" + "=" * 60)
    print("  Test complete")
    print("=" * 60)


if __name__ == "__main__":
    main()
