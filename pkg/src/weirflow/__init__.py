"""Discharge-coefficient prediction for streamlined weirs."""
