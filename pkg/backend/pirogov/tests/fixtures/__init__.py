# Test fixtures for pirogov
