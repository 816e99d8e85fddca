"""
Hardy Core package
"""
