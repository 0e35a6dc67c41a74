"""Click commands, one module per CLI verb."""
