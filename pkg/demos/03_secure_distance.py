# %% [markdown]
# # How far can the link go?
#
# With a 10% QBER limit, solve for the distance where the diluted visibility
# reaches 0.8. Without backscatter only dark counts limit the range.

# %%
from dataclasses import replace

from pnpqkd import FiberSpec, SystemConfig, improvement_equivalent_db, max_secure_distance

config = SystemConfig()
dark_limited = config.without_stray()

d_025 = max_secure_distance(dark_limited)
d_017 = max_secure_distance(replace(dark_limited, fiber=FiberSpec(loss_db_per_km=0.17)))
print(f"no stray light, 0.25 dB/km: {d_025:.1f} km")
print(f"no stray light, 0.17 dB/km: {d_017:.1f} km")
print(f"with stray light, 0.25 dB/km: {max_secure_distance(config):.1f} km")

# %% [markdown]
# The balanced detector cuts dark counts by 17 dB. Stray light caps how much
# of that gain turns into extra reach.

# %%
gain, usable = improvement_equivalent_db(config)
print(f"detector gain {gain:.1f} dB, usable {usable:.1f} dB")
gain, usable = improvement_equivalent_db(dark_limited)
print(f"without stray light: usable {usable:.1f} dB")
