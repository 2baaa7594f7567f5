"""产物生成模块"""
from src.reporting.heatmap import heatmap_annotations, heatmap_rgba, render_heatmap, render_partition
from src.reporting.report_writer import ReportWriter, write_grid_csv, write_json_report, write_table_csv

__all__ = [
    'heatmap_annotations', 'heatmap_rgba', 'render_heatmap', 'render_partition',
    'ReportWriter', 'write_grid_csv', 'write_json_report', 'write_table_csv',
]
