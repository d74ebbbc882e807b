"""Multi-station benchmark: sweeps, model selection and report files."""
