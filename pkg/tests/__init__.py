"""Unit tests for gradfit."""
