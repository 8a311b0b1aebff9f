"""Tests for latclt."""
