"""
Size and throughput
===================
"""

# %%
from xlinear.bench import efficiency_report
from xlinear.model import XLinearConfig, build_model

for flags in ({}, {"use_efa": False}, {"use_crossfilter": False}, {"use_efa": False, "use_crossfilter": False}):
    model = build_model(XLinearConfig(**flags), seed=0)
    rep = efficiency_report(model)
    print(flags or "full", rep["params"], rep["efa_params"], rep["peak_live_bytes"],
          f"{rep['samples_per_second']:.0f}/s")
