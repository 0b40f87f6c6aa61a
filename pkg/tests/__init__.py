"""package for qlangevin tests."""
