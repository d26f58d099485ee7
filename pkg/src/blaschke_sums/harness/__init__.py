"""Property suites, the coverage scanner and radial-limit checks."""
