"""Packaged case studies."""

from .traffic_light import ScenarioReport, build_system, run_traffic_light_scenario, traffic_light_descriptor

__all__ = ["ScenarioReport", "build_system", "run_traffic_light_scenario", "traffic_light_descriptor"]
