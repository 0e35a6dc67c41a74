# Integration tests for pirogov
