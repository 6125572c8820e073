"""
Running experiments from a config
=================================

The ``submodknap`` command runs a JSON experiment config, writes one CSV row per
(n, budget, repetition, algorithm), and aggregates rows into mean/std per
setting.  The same steps from Python::

    submodknap run demos/configs/er_cut_small.json --out out/er_cut.csv
    submodknap aggregate out/er_cut.csv
"""
import sys
import tempfile
from pathlib import Path

from submodknap.cli import main

here = Path(__file__).parent
with tempfile.TemporaryDirectory() as tmp:
    for name in ("er_cut_small", "revenue_adaptive"):
        raw = Path(tmp) / f"{name}.csv"
        if main(["run", str(here / "configs" / f"{name}.json"), "--out", str(raw),
                 "--threads", "4"]) != 0:
            sys.exit(1)
        main(["aggregate", str(raw)])
        print((Path(tmp) / f"{name}_agg.csv").read_text())
