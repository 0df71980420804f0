"""Supply-chain competitiveness and vulnerability analytics.

Builds the full pipeline from bilateral trade flows and input-output tables
to specialization matrices, fitness-complexity scores, progression
forecasts, supplier-share decompositions, and product vulnerability indices.
"""

__version__ = "0.1.0"

from .catalog import SupplyChainCatalog, builtin_catalog, load_catalog
from .fitness import EfcResult, fitness_complexity, fitness_ranking_series, sector_fitness
from .io_tables import (
    IOTable,
    aggregate_region_sector,
    import_level_series,
    load_io_table,
    partner_shares,
    sector_input_shares,
)
from .progression import (
    ProgressionForecast,
    cooccurrence_relatedness,
    country_progression_stats,
    density,
    predict_progression,
    train_progression_models,
)
from .regions import RegionDefinition, builtin_eu27, load_region
from .specialization import RcaMatrix, SpecializationMatrix, binarize, compute_rca, diversification, ubiquity
from .trade import (
    TradeFlowRecord,
    TradeTensor,
    aggregate_exports,
    category_series,
    convert_vintage,
    import_growth_ranking,
    parse_flows,
    reconcile_mirror_flows,
)
from .vulnerability import build_vulnerability_table, hhi_m, net_exposure

__all__ = [
    "__version__",
    "SupplyChainCatalog", "builtin_catalog", "load_catalog",
    "RegionDefinition", "builtin_eu27", "load_region",
    "TradeFlowRecord", "TradeTensor", "parse_flows", "reconcile_mirror_flows",
    "aggregate_exports", "convert_vintage", "category_series", "import_growth_ranking",
    "RcaMatrix", "SpecializationMatrix", "compute_rca", "binarize", "diversification", "ubiquity",
    "EfcResult", "fitness_complexity", "sector_fitness", "fitness_ranking_series",
    "cooccurrence_relatedness", "density", "train_progression_models",
    "predict_progression", "country_progression_stats", "ProgressionForecast",
    "IOTable", "load_io_table", "aggregate_region_sector", "partner_shares",
    "sector_input_shares", "import_level_series",
    "net_exposure", "hhi_m", "build_vulnerability_table",
]
