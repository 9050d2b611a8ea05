"""Reference visualization client and its geometry."""

from .client import SimulatorClient, measure_distance
from .geometry import StrikeDip, plane_normal, strike_dip
from .render import render_screenshot
from .scenes import BUNDLED_SCENES, Scene, load_scene, load_scene_file
from .script import Step, Transcript, parse_script, parse_script_file, run_script

__all__ = [
    "BUNDLED_SCENES",
    "Scene",
    "SimulatorClient",
    "Step",
    "StrikeDip",
    "Transcript",
    "load_scene",
    "load_scene_file",
    "measure_distance",
    "parse_script",
    "parse_script_file",
    "plane_normal",
    "render_screenshot",
    "run_script",
    "strike_dip",
]
