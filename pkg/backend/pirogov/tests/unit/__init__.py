# Unit tests for pirogov
