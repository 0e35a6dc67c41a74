# Test package for pirogov
