# %% [markdown]
# # Detector and background noise budget

# %%
from pnpqkd import DetectorSpec, FiberSpec, SystemConfig, conventional_equivalent, snr_db
from pnpqkd import noise_floor_per_detector, stray_prob_per_pulse, temporal_broadening_ns

balanced = DetectorSpec()
conventional = conventional_equivalent(balanced)
print(f"balanced S/N      {snr_db(0.1, balanced.dark_count_prob_per_gate):.1f} dB")
print(f"conventional S/N  {snr_db(0.1, conventional.dark_count_prob_per_gate):.1f} dB")
print(f"with stray floor  {snr_db(0.1, 2e-7 + 1.2e-6):.1f} dB")

# %% [markdown]
# Backscatter scales with the square of the repetition rate and is flat
# beyond 40 km. The ramp below 40 km is a placeholder.

# %%
config = SystemConfig()
for rate in (1e6, 5e5, 2.5e5):
    row = [stray_prob_per_pulse(d, rate, config.stray) for d in (10, 40, 100)]
    print(f"{rate / 1e3:6.0f} kHz  " + "  ".join(f"{p:.2e}" for p in row))
print(f"per-detector floor at 100 km: {noise_floor_per_detector(config):.2e}")

# %% [markdown]
# Dispersion never matters here: even a 1 nm wide source spreads by 1.7 ns.

# %%
fiber = FiberSpec(100.0)
for width in (1.0, 0.1, 0.01):
    print(f"{width:5.2f} nm -> {temporal_broadening_ns(fiber, width):.3f} ns (gate 0.75 ns)")
