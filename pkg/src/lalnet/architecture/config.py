from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters.

    ``base_channels`` is the feature width C of the low-resolution branches;
    the colour-separated path splits it into three groups of ``C // 3``.
    The ``use_*`` toggles swap a module for a plain convolutional stand-in,
    which is how the ablation variants are built.
    """

    base_channels: int = 24
    lssm_blocks: int = 1
    expansion_factor: int = 2
    state_dim: int = 16
    mlp_ratio: int = 4
    detail_channels: int = 32
    heads: int = 3
    cab_reduction: int = 4
    pyramid_levels: int = 3
    tau_init: float = 1.0
    use_mcm: bool = True
    use_ddcm: bool = True
    use_lga: bool = True
    use_lssm: bool = True
    use_ss2d: bool = True
    gconv_separated: bool = True
    preset: str = "custom"

    def __post_init__(self):
        if self.pyramid_levels < 2:
            raise ValueError(f"pyramid_levels must be >= 2, got {self.pyramid_levels}")
        if self.base_channels < 3 or self.base_channels % 3:
            raise ValueError(f"base_channels must be a positive multiple of 3, got {self.base_channels}")
        if self.expansion_factor < 1:
            raise ValueError(f"expansion_factor must be >= 1, got {self.expansion_factor}")
        if self.base_channels % self.heads:
            raise ValueError(f"base_channels={self.base_channels} not divisible by heads={self.heads}")
        for name in ("lssm_blocks", "state_dim", "mlp_ratio", "detail_channels", "cab_reduction"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")

    @property
    def group_channels(self) -> int:
        return self.base_channels // 3

    @property
    def expanded_channels(self) -> int:
        return self.expansion_factor * self.base_channels

    @property
    def cab_hidden(self) -> int:
        return max(1, self.base_channels // self.cab_reduction)

    @property
    def multiple(self) -> int:
        """Input extents must be divisible by this."""
        return 2 ** self.pyramid_levels

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown ModelConfig keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "ModelConfig":
        try:
            base = PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
        return cls(**{**base, "preset": name, **overrides})


# Widths chosen so the parameter counts land near 230K (tiny) and 2.45M (full).
PRESETS: dict[str, dict] = {
    "tiny": dict(base_channels=24, lssm_blocks=1, expansion_factor=6, state_dim=32,
                 mlp_ratio=4, detail_channels=32, heads=3),
    "full": dict(base_channels=48, lssm_blocks=4, expansion_factor=6, state_dim=32,
                 mlp_ratio=4, detail_channels=32, heads=3),
}

# Ablation variants: name -> ModelConfig overrides.
ABLATION_VARIANTS: dict[str, dict] = {
    "#1": dict(use_mcm=False, use_ddcm=False, use_lga=False, use_lssm=False),
    "#2": dict(use_mcm=False),
    "#3": dict(use_ddcm=False),
    "#4": dict(use_lga=False),
    "#5": dict(use_lssm=False),
    "#6": dict(),
    "tconv": dict(gconv_separated=False),
    "ss2d-resblock": dict(use_ss2d=False),
    "n=2": dict(pyramid_levels=2),
    "n=3": dict(pyramid_levels=3),
    "n=4": dict(pyramid_levels=4),
}
