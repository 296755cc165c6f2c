"""
Dual-slope pathloss and one network drop
=========================================

Walks through the link budget used by every study: the breakpoint distance,
the two pathloss slopes, the noise floor and the all-active SINR of a drop.
"""

import numpy as np

from d2dsched.channel import NetworkConfig, geometric_drop, link_budget_gain_linear, noise_power_w, pathloss_db

cfg = NetworkConfig()

# The slope changes from 20 to 40 dB per decade at R_bp = 4 h^2 / lambda.
print(f"breakpoint distance  {cfg.breakpoint_distance_m:.2f} m")
print(f"loss at breakpoint   {pathloss_db(cfg.breakpoint_distance_m, cfg):.2f} dB")

for d in (2.0, 10.0, 33.5, 65.0, 200.0, 1000.0):
    snr_db = 10 * np.log10(link_budget_gain_linear(d, cfg) * cfg.tx_power_w / noise_power_w(cfg))
    print(f"  d = {d:7.1f} m   L = {pathloss_db(d, cfg):6.1f} dB   SNR = {snr_db:6.1f} dB")

# Noise: -184 dBm/Hz over 5 MHz plus a 7 dB noise figure.
print(f"noise floor          {10 * np.log10(noise_power_w(cfg)) + 30:.2f} dBm")

# A 200-pair drop with Rayleigh fading. Receivers hear every transmitter, so
# the all-active SINR is far below the SNR for most links.
topo, real, _ = geometric_drop(NetworkConfig(num_pairs=200), drop_index=0)
snr_db = 10 * np.log10(real.snr)
sinr_db = 10 * np.log10(real.sinr_all_active)
print(f"median SNR {np.median(snr_db):.1f} dB, median all-active SINR {np.median(sinr_db):.1f} dB")
print(f"link distances {topo.link_distances().min():.1f} .. {topo.link_distances().max():.1f} m")
