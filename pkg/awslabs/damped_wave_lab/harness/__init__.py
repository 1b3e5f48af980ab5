"""Configuration, experiments, reports and the command line."""
