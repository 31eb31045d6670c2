"""
Test suite for the quantum liquid state machine simulator
"""
