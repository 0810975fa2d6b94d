"""Standard benchmark scenes."""

from dataclasses import replace

from ...core.exceptions import ArgumentError
from ...domain.entities.recording import Recording
from .generator import ObjectSpec, SceneSpec, generate

ROTATION = (0.1, 0.15, 0.25)
TRANSLATION = (0.15, 0.05, 0.0)

NOISE_LOW = 20000.0
NOISE_MID = 100000.0
NOISE_HIGH = 300000.0


def standard_suite(seed: int = 0) -> dict[str, SceneSpec]:
    """Named scenes covering the ego-motion grid, a fast object and a noise sweep."""
    base = SceneSpec(seed=seed)
    rotation = replace(base, rotation=ROTATION)
    return {
        "static": base,
        "rotation": rotation,
        "translation": replace(base, translation=TRANSLATION),
        "rotation_translation": replace(base, rotation=ROTATION, translation=TRANSLATION),
        "tailing": replace(
            rotation,
            objects=(ObjectSpec(center=(60.0, 130.0), velocity=(2000.0, -150.0), radius=15.0, rate=150000.0),),
        ),
        "noise_low": replace(rotation, noise_rate=NOISE_LOW),
        "noise_mid": replace(rotation, noise_rate=NOISE_MID),
        "noise_high": replace(rotation, noise_rate=NOISE_HIGH),
    }


class StandardSuiteCatalog:
    """Scene catalog over :func:`standard_suite`."""

    def __init__(self, seed: int = 0) -> None:
        """Initialize catalog.

        Args:
            seed: Seed shared by every scene
        """
        self.scenes = standard_suite(seed)

    def names(self) -> list[str]:
        """Scene names in report order."""
        return list(self.scenes)

    def recording(self, name: str, dt: float) -> Recording:
        """Render one scene.

        Raises:
            ArgumentError: If the scene is unknown
        """
        if name not in self.scenes:
            raise ArgumentError(f"unknown scene {name!r}; choose from {', '.join(self.scenes)}")
        return generate(self.scenes[name], dt).recording(name)
