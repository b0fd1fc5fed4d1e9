"""Tests for og6-lattice."""
