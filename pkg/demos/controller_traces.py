"""Step through the BS controllers on a few random draws.

Each trace lists what each BS tried, the result bits sent over the backhaul
and any message forwarded between BSs. The last line counts how often the
controllers disagree with the event algebra on a larger batch (it should be
zero).

    python3 demos/controller_traces.py
"""

import numpy as np

from uplinkcomp.channel import PowerConfig, ScenarioGeometry, link_attenuations, sample_fading
from uplinkcomp.protocol import run_aw_dis_protocol, verify_protocol_equivalence

geom = ScenarioGeometry()
power = PowerConfig.from_db(20.0, 0.0)
rng = np.random.default_rng(4)
draws = sample_fading(link_attenuations(geom), rng, 4)

for k in range(4):
    hsq = draws.hsq[..., k]
    trace = run_aw_dis_protocol(hsq, power.P, (power.theta1, power.theta2))
    print(f"-- draw {k}: |h|^2 = {np.round(hsq, 4).tolist()}")
    print(trace.to_text())

rep = verify_protocol_equivalence(100_000, geom, power, seed=5)
print(f"\n1e5 draws: AW+SIC mismatches {rep['aw_sic_mismatches']}, "
      f"AW+DIS mismatches {rep['aw_dis_mismatches']}, max bits {rep['max_bits']}")
