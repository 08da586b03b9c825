"""
Static, input-conditioned and crossed filters
=============================================
"""

# %%
import numpy as np

from xlinear.crossfilter import PaiKernel, cross_integrate, init_pai, init_texnet, pai_filter, tex_filter
from xlinear.spectral import num_bins
from xlinear.tensor import Tensor

L = 64
t = np.arange(L)
x = (np.sin(2 * np.pi * 3 * t / L) + 0.4 * np.sin(2 * np.pi * 20 * t / L)).reshape(1, L, 1)

# a hand-set static kernel: pass everything except bin 20
re = np.ones(num_bins(L))
re[20] = 0.0
y = pai_filter(x, PaiKernel(Tensor(re), Tensor(np.zeros_like(re))))
print("residual vs the clean tone:", np.abs(y.data.ravel() - np.sin(2 * np.pi * 3 * t / L)).max())

# %%
# freshly initialised filters start near identity
rng = np.random.default_rng(0)
pai, tex = init_pai(L, rng), init_texnet(L, rng)
print("pai drift:", np.abs(pai_filter(x, pai).data - x).max())
print("tex output scale:", np.abs(tex_filter(x, tex).data).max())

# %%
# the crossed form gates each branch with GELU of the other
print(cross_integrate(x, pai, tex).shape)
