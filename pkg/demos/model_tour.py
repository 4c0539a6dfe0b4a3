"""
A tour of the network at initialisation
=======================================

The model splits the input into a Laplacian pyramid, adapts the lighting of
the small low-frequency image, and then adds the detail levels back with
learned masks. At initialisation the output head and refinement tails are
zero and the masks are one, so the whole network starts as the identity.
"""

import numpy as np

from lalnet.architecture import ModelConfig, init_params, lalnet_forward, valid_size
from lalnet.architecture.model import count_parameters
from lalnet.numerics import Tensor, no_grad

config = ModelConfig.from_preset("tiny")
params = init_params(config, seed=0)
print(f"tiny preset: C={config.base_channels}, {config.lssm_blocks} state-space block, "
      f"{config.pyramid_levels} pyramid levels, {count_parameters(params):,} parameters")
print(f"full preset: {count_parameters(init_params(ModelConfig.from_preset('full'))):,} parameters")

###############################################################################
# Inputs must divide by 2^L and leave a power-of-two low-frequency image.
# ``valid_size`` rounds an extent up; ``enhance`` pads and crops for you.

for n in (32, 50, 100):
    print(f"extent {n:3d} -> runs at {valid_size(n, config)}")

###############################################################################
# The pyramid and the identity property.

rng = np.random.default_rng(1)
x = rng.uniform(0, 1, (1, 3, 64, 64)).astype(np.float32)
with no_grad():
    y, pyramid = lalnet_forward(Tensor(x), params, config, return_pyramid=True)
for lvl, hf in enumerate(pyramid.hf):
    print(f"detail level {lvl}: {hf.shape[-2]}x{hf.shape[-1]}, energy {float((hf.data**2).mean()):.4f}")
print(f"low-frequency image: {pyramid.lf.shape[-2]}x{pyramid.lf.shape[-1]}")
print(f"max |output - input| at init: {np.abs(y.data - x).max():.2e}")

###############################################################################
# Switching off a module swaps in a plain convolutional stand-in. The parameter
# count shows what each module costs.

for flag in ("use_mcm", "use_ddcm", "use_lga", "use_lssm"):
    variant = config.replace(**{flag: False})
    print(f"without {flag[4:]:5s}: {count_parameters(init_params(variant)):,} parameters")
