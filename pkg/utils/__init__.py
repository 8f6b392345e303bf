# Report writers, duration parsing and parallel runners
