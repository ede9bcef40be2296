# Domain types of the pipeline (panel, practices, estimation, run config)
