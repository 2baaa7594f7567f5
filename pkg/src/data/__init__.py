# Data layer module
from src.data.dataset_loader import Dataset, DateList, Pit, build_dataset, load_dataset, parse_dates, parse_pits

__all__ = ['Dataset', 'DateList', 'Pit', 'build_dataset', 'load_dataset', 'parse_dates', 'parse_pits']
