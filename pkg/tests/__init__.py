"""Test suite for NematicLimit."""
