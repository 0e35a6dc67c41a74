"""Pydantic schemas for every JSON surface of pirogov."""
