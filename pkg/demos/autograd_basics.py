"""
Reverse-mode gradients with the numpy tape
==========================================

Every array operation in the package records how to push a gradient back to
its inputs. This walk-through builds a few expressions, differentiates them and
compares the results with central finite differences.
"""

import numpy as np

from lalnet.numerics import Tensor, conv2d, fft2, grad_check, ifft2_real, silu

###############################################################################
# A scalar function first. ``backward`` fills ``.grad`` on every leaf that asked
# for it.

x = Tensor(np.array([0.5, -1.0, 2.0]), requires_grad=True)
y = (silu(x) * x).sum()
y.backward()
print("x          ", x.data)
print("d/dx       ", x.grad)

# silu(x) * x = x^2 * s(x), so the derivative is 2x s + x^2 s (1 - s)
s = 1 / (1 + np.exp(-x.data))
print("closed form", 2 * x.data * s + x.data**2 * s * (1 - s))

###############################################################################
# Convolutions, spectra and the like have hand-written adjoints. ``grad_check``
# perturbs each input coordinate by +-h and compares the finite difference of a
# random projection of the output with the analytic gradient.

rng = np.random.default_rng(0)
img = Tensor(rng.standard_normal((1, 2, 8, 8)))
w = Tensor(rng.standard_normal((3, 2, 3, 3)))
b = Tensor(rng.standard_normal(3))
err = grad_check(lambda a, k, c: conv2d(a, k, c, padding="reflect"), [img, w, b])
print(f"conv2d    max relative error {err:.2e}")


def spectral_filter(a):
    # keep the real part of an inverse transform of the scaled forward transform
    return ifft2_real(fft2(a) * 0.5)


err = grad_check(spectral_filter, [Tensor(rng.standard_normal((1, 1, 8, 8)))])
print(f"fft round trip max relative error {err:.2e}")

###############################################################################
# The same check runs over every block of the network from the command line:
#
#     lalnet gradcheck
