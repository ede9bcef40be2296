"""
Persistence package initialization (CSV, GeoJSON, versioned JSON, run manifests)
"""

from .panel_store import PanelSchema, load_panel, read_cross_section, write_cross_section
from .model_store import save_model, load_model
from .manifest import write_manifest, read_manifest

__all__ = [
    'PanelSchema',
    'load_panel',
    'read_cross_section',
    'write_cross_section',
    'save_model',
    'load_model',
    'write_manifest',
    'read_manifest',
]
