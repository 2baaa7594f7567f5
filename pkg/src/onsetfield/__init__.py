"""起始场: 格点几何、过程模拟与密度"""
from src.onsetfield.lattice import Lattice, MigrationRates, neighbors, cell_of
from src.onsetfield.field import (
    rho, rho_grid, simulate_field, log_density_field, log_density_fields,
    arrival_count, field_in_bounds, front_speed, export_field, load_grid
)

__all__ = [
    'Lattice', 'MigrationRates', 'neighbors', 'cell_of',
    'rho', 'rho_grid', 'simulate_field', 'log_density_field', 'log_density_fields',
    'arrival_count', 'field_in_bounds', 'front_speed', 'export_field', 'load_grid',
]
