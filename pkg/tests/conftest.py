import pytest

from fahvsim import ScenarioConfig
from fahvsim.acceptance import (SWEEP_CELLS, NominalRuns, run_nominal,
                                run_sweep_cell)


@pytest.fixture(scope="session")
def nominal_cfg() -> ScenarioConfig:
    return ScenarioConfig()


@pytest.fixture(scope="session")
def nominal_runs(nominal_cfg) -> NominalRuns:
    """The full-length default scenario at dt and dt/2, shared suite-wide."""
    return run_nominal(nominal_cfg)


@pytest.fixture(scope="session")
def sweep_results(nominal_cfg):
    """Metrics of every initial-error sweep cell, proposed and baseline."""
    out = {}
    for h_err in SWEEP_CELLS:
        for variant in ("proposed", "baseline"):
            out[(h_err, variant)] = run_sweep_cell(nominal_cfg, h_err, variant)
    return out
