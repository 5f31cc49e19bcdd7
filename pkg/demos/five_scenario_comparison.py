"""Walk through the bundled five-scenario comparison.

Starting from the base case (1000 vehicles, 20% DWPT-equipped, toll 100,
charging value 100), we halve and raise the toll, then halve and raise
the value of charging, and watch what moves: the threshold SoC, the
DWPT flow onto the electrified link, the charged energy, and revenue.
"""

from erstoll.harness import table1_scenario, table2_rows

scenario = table1_scenario()
print("base scenario")
print(f"  vehicles          {scenario.total_vehicles:.0f}")
print(f"  dwpt share        {scenario.dwpt_ratio:.0%}")
print(f"  soc range         [{scenario.soc.s_lo}, {scenario.soc.s_hi}]")
print(f"  toll              {scenario.toll.price:.0f} JPY")
print(f"  vot / voe         {scenario.prefs.vot:.0f} / {scenario.prefs.voe:.0f} JPY")
print()

# each row is one solved equilibrium; identifiers carry the knob values
rows = table2_rows()
header = f"{'case':>4} {'toll':>6} {'voe':>6} {'s_thres':>8} {'x1_d':>8} {'tcv':>9} {'revenue':>10}"
print(header)
print("-" * len(header))
for row in rows:
    case, toll, voe = (value for _, value in row.identifiers)
    print(
        f"{case:>4.0f} {toll:>6.0f} {voe:>6.0f}"
        f" {row.s_thres:>8.4f} {row.x1_d:>8.2f} {row.tcv:>9.2f} {row.revenue:>10.2f}"
    )
print()

# with a 20% DWPT share the aggregate flows never move: both links carry
# 500 vehicles and 11.5 minutes in every case, so total travel time is
# pinned at the network minimum and the toll only redistributes WHO is
# on the electrified link, not how many.
base = rows[0]
print(f"every case: x1 = {base.x1:.1f}, t1 = {base.t1:.2f} min, ttt = {base.ttt:.0f} veh-min")
print()

# cheaper tolls / pricier electricity pull more DWPT vehicles onto the
# charging lane (higher threshold -> more of the SoC range charges);
# revenue moves the other way for the toll knob but the same way for voe
cheap, dear = rows[1], rows[2]
print(f"toll 100 -> 50 : s_thres {base.s_thres:.3f} -> {cheap.s_thres:.3f}, "
      f"tcv {base.tcv:.0f} -> {cheap.tcv:.0f} kWh, "
      f"revenue {base.revenue:.0f} -> {cheap.revenue:.0f} JPY")
print(f"toll 100 -> 150: s_thres {base.s_thres:.3f} -> {dear.s_thres:.3f}, "
      f"tcv {base.tcv:.0f} -> {dear.tcv:.0f} kWh, "
      f"revenue {base.revenue:.0f} -> {dear.revenue:.0f} JPY")
