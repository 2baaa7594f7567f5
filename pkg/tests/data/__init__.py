# Tests for data layer
