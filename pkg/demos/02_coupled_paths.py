"""Coupled solutions and the flow derivative.

Two Euler solutions from x0 and x0 + eps driven by one noise path stay
ordered, and their gap divided by eps tracks exp(int b'(X) ds).
"""

# %%
import numpy as np

from fracdrift import SdeConfig, TimeGrid, coupled_solve, flow_derivative, sample_fbm
from fracdrift.sde import damped_sine_drift

grid = TimeGrid(1.0, 512)
drift = damped_sine_drift(theta=1.0, a=0.5)  # b(x) = -x + 0.5 sin x, so -1.5 <= b' <= -0.5
config = SdeConfig(drift, x0=1.0, sigma=0.5, grid=grid, H=0.75)
noise = sample_fbm(grid, 0.75, seed=3)[0]

# %%
eps = 1e-4
pair = coupled_solve(config, eps, noise)
ratio = pair.difference / eps
flow = flow_derivative(config, pair.low).values
print(f"max |gap/eps - flow| = {np.max(np.abs(ratio - flow)):.2e}")

# %% The gap is sandwiched by the bounds on b'
t = grid.times
inside = np.all((ratio >= np.exp(-1.5 * t) - 1e-2) & (ratio <= np.exp(-0.5 * t) + 1e-2))
print("gap within [e^{-1.5 t}, e^{-0.5 t}]:", inside)
for k in (0, 128, 256, 512):
    print(f"t={t[k]:.2f}  gap/eps={ratio[k]:.4f}  bounds=({np.exp(-1.5 * t[k]):.4f}, {np.exp(-0.5 * t[k]):.4f})")
