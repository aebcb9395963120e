"""Root package for tests."""
